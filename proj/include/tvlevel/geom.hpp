#pragma once

#include <cstdint>
#include <vector>

#include "tvlevel/grid.hpp"

namespace tvlevel {

enum class Seed : std::uint8_t { Free = 0, ForcedIn = 1, ForcedOut = 2 };

/// Reals are scaled to integer capacities by this many units per 1.0;
/// exactness statements are modulo one quantum.
inline constexpr double kCapacityQuantum = 4294967296.0;  // 2^32

/// Binary minimization of  Per_w(E) + scale * delta^2 * sum_{x in E} (level - g(x))
/// over sets respecting the seeds. Seeds encode Dirichlet traces as forced
/// bits on boundary cells.
struct CurvatureProblem {
  ScalarField g;
  double level = 0.0;
  Stencil stencil;
  double scale = 1.0;
  std::vector<Seed> seeds;  // empty means all Free

  void validate() const;  // finite level; forced bits only on non-outside cells
};

struct FlowStats {
  std::int64_t flow_value = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  int phases = 0;
  double quantum = kCapacityQuantum;
};

/// Both extreme global minimizers. Every optimal set S satisfies
/// minimal <= S <= maximal, and all achieve the same energy.
struct CutResult {
  BinarySet minimal;
  BinarySet maximal;
  double energy = 0.0;           // real-valued resum of the minimal minimizer
  std::int64_t energy_int = 0;   // quantized objective (exact certificate)
  FlowStats stats;
};

/// Exact solve via max-flow. Throws std::overflow_error (naming the cell or
/// pair) if a quantized capacity cannot be represented.
CutResult solve_curvature(const CurvatureProblem& p, double quantum = kCapacityQuantum);

/// Quantized objective of a given set; used as the energy certificate.
std::int64_t quantized_energy(const CurvatureProblem& p, const BinarySet& e, double quantum = kCapacityQuantum);
double real_energy(const CurvatureProblem& p, const BinarySet& e);

/// Dirichlet total-variation minimizer by monotone level stacking. The trace
/// lives on the Boundary cells of `trace`; interior values are ignored.
/// Each level solves the seeded pure-perimeter cut (forced-in where the trace
/// exceeds the level) and the maximal minimizers are stacked:
///   u(x) = min trace + sum_j (t_{j+1} - t_j) [x in E_{t_j}].
/// Empty `levels` selects midpoints between consecutive distinct trace values.
ScalarField solve_dirichlet_tv(const ScalarField& trace, const Stencil& stencil,
                               std::vector<double> levels = {});

/// The cuts used by solve_dirichlet_tv, exposed for nesting certificates.
std::vector<BinarySet> dirichlet_level_sets(const ScalarField& trace, const Stencil& stencil,
                                            const std::vector<double>& levels);

/// Midpoints between consecutive distinct boundary-trace values.
std::vector<double> default_dirichlet_levels(const ScalarField& trace);

}  // namespace tvlevel
