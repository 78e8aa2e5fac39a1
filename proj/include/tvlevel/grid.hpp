#pragma once

#include <cstdint>
#include <vector>

#include "tvlevel/anisotropy.hpp"

namespace tvlevel {

enum class CellKind : std::uint8_t { Outside = 0, Boundary = 1, Interior = 2 };

/// Shared geometry of all gridded quantities: a w x h cell grid with spacing
/// delta and a per-cell mask splitting the plane into domain interior,
/// prescribed boundary and outside cells.
struct GridGeometry {
  int width = 0;
  int height = 0;
  double delta = 1.0;
  std::vector<CellKind> mask;

  GridGeometry() = default;
  GridGeometry(int w, int h, double d, CellKind fill = CellKind::Interior);

  int cells() const { return width * height; }
  int idx(int x, int y) const { return y * width + x; }
  bool in_grid(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  CellKind kind(int x, int y) const { return mask[idx(x, y)]; }
  bool inside(int x, int y) const { return in_grid(x, y) && kind(x, y) != CellKind::Outside; }

  bool same_geometry(const GridGeometry& o) const;
  void validate() const;  // at least one interior cell, spacing > 0
};

/// A gridded real function together with its domain mask.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(int w, int h, double delta, double fill = 0.0);
  ScalarField(GridGeometry geom, std::vector<double> values);

  const GridGeometry& geom() const { return geom_; }
  int width() const { return geom_.width; }
  int height() const { return geom_.height; }
  double delta() const { return geom_.delta; }
  int cells() const { return geom_.cells(); }
  int idx(int x, int y) const { return geom_.idx(x, y); }

  double& at(int x, int y) { return values_[geom_.idx(x, y)]; }
  double at(int x, int y) const { return values_[geom_.idx(x, y)]; }
  double& operator[](int i) { return values_[i]; }
  double operator[](int i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  CellKind kind(int x, int y) const { return geom_.kind(x, y); }
  void set_kind(int x, int y, CellKind k) { geom_.mask[geom_.idx(x, y)] = k; }

  /// Checks finiteness on non-outside cells and mask validity; throws
  /// std::invalid_argument on violation.
  void validate() const;

  /// min/max over non-outside cells.
  std::pair<double, double> range() const;

 private:
  GridGeometry geom_;
  std::vector<double> values_;
};

/// A set of cells (a level set) over the same geometry.
class BinarySet {
 public:
  BinarySet() = default;
  BinarySet(GridGeometry geom, bool fill = false);

  const GridGeometry& geom() const { return geom_; }
  bool contains(int x, int y) const { return in_[geom_.idx(x, y)] != 0; }
  void set(int x, int y, bool v) { in_[geom_.idx(x, y)] = v ? 1 : 0; }
  const std::vector<std::uint8_t>& bits() const { return in_; }
  std::vector<std::uint8_t>& bits() { return in_; }
  int count() const;

  bool operator==(const BinarySet& o) const { return in_ == o.in_; }

 private:
  GridGeometry geom_;
  std::vector<std::uint8_t> in_;
};

/// One direction of a half-system pairwise stencil. The weight multiplies
/// |u(x+e) - u(x)| and already carries the grid spacing.
struct StencilArm {
  int dx = 0;
  int dy = 0;
  double weight = 0.0;
};

struct Stencil {
  std::vector<StencilArm> arms;
  int order = 4;       // 4, 8 or 16 neighbours
  double delta = 1.0;  // spacing the weights were built for

  void validate() const;  // positive weights, pairwise non-parallel offsets
};

/// Forward-difference vector field; one (dx, dy) pair per cell.
struct VectorField {
  GridGeometry geom;
  std::vector<double> dx, dy;

  VectorField() = default;
  explicit VectorField(GridGeometry g)
      : geom(std::move(g)), dx(geom.cells(), 0.0), dy(geom.cells(), 0.0) {}
};

/// Forward differences divided by the spacing. A difference that would cross
/// the mask edge (into an outside cell or off the grid) is zero.
VectorField forward_gradient(const ScalarField& u);

/// Exact negative adjoint of forward_gradient: <grad u, p> = -<u, div p>
/// holds to machine precision for every u, p on the same geometry.
ScalarField divergence(const VectorField& p);

/// Pairwise stencil whose cut energy reproduces the phi-perimeter of
/// digitized half-planes. Offsets are a half-system (one per +- pair);
/// weights are calibrated against the half-plane limit, with per-direction
/// angular sectors taken between neighbouring directions. Crystalline norms
/// are allowed (only eval is used) and may drop arms that carry no mass.
Stencil crofton_weights(const Anisotropy& a, int order, double delta);

/// Sum of w_k over cut pairs. Pairs with either cell outside contribute
/// nothing (free boundary); boundary-flagged cells count like interior ones.
double pairwise_perimeter(const BinarySet& e, const Stencil& s);

/// Sum of w_k |u(x+e_k) - u(x)| over non-outside pairs. Satisfies the exact
/// coarea identity against pairwise_perimeter of the level sets.
double pairwise_tv(const ScalarField& u, const Stencil& s);

/// delta^2 * sum phi(forward gradient). A consistent (but not coarea-exact)
/// alternative to the pairwise form.
double cellwise_tv(const ScalarField& u, const Anisotropy& a);

}  // namespace tvlevel
