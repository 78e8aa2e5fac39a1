#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tvlevel/anisotropy.hpp"
#include "tvlevel/grid.hpp"

namespace tvlevel {

enum class Regularizer { Pairwise, PerCell };
enum class FKind { Identity, Huber };
enum class BoundaryMode { Neumann, Dirichlet };

/// Discrete anisotropic ROF problem
///   min_u  R(u) + (delta^2 / lambda) sum (u - g)^2 / 2
/// with R either the pairwise Crofton total variation or the per-cell
/// phi(forward gradient) form, optionally Moreau/Huber smoothed with
/// parameter eps. In Dirichlet mode the Boundary cells of g carry the trace:
/// they stay fixed, their pairs count in R and they carry no fidelity.
struct RofProblem {
  ScalarField g;
  double lambda = 1.0;
  Regularizer reg = Regularizer::Pairwise;
  Stencil stencil;                             // Pairwise
  Anisotropy aniso = Anisotropy::euclidean();  // PerCell
  FKind f = FKind::Identity;
  double huber_eps = 0.0;
  BoundaryMode boundary = BoundaryMode::Neumann;

  void validate() const;
};

struct SolverReport {
  double primal = 0.0;
  double dual = 0.0;
  double gap_abs = 0.0;
  double gap_rel = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_ms = 0.0;
  /// (iteration, relative gap) at every gap evaluation.
  std::vector<std::pair<int, double>> gap_history;

  /// One JSON object per line; wall time only on request so that identical
  /// runs stay byte-identical.
  std::string to_json_line(bool with_timing = false) const;
};

/// Accelerated primal-dual solve to relative duality gap <= tol. Always
/// returns the best iterate; converged=false if max_iter was hit first.
std::pair<ScalarField, SolverReport> solve(const RofProblem& p, double tol = 1e-8,
                                           int max_iter = 200000);

/// Exact evaluation of the discrete objective at u.
double energy(const RofProblem& p, const ScalarField& u);

/// Euclidean projection of y onto {p : polar(a)(p) <= radius}. Closed form
/// for euclidean/weighted-l2/crystalline kinds, 1-D search on the boundary
/// for lp.
Vec2 project_polar_ball(const Anisotropy& a, Vec2 y, double radius);

}  // namespace tvlevel
