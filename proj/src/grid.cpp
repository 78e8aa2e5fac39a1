#include "tvlevel/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace tvlevel {

GridGeometry::GridGeometry(int w, int h, double d, CellKind fill)
    : width(w), height(h), delta(d), mask(static_cast<size_t>(w) * h, fill) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("grid: dimensions must be positive");
  if (!(d > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
}

bool GridGeometry::same_geometry(const GridGeometry& o) const {
  return width == o.width && height == o.height && delta == o.delta && mask == o.mask;
}

void GridGeometry::validate() const {
  if (width <= 0 || height <= 0 || !(delta > 0.0))
    throw std::invalid_argument("grid: bad dimensions or spacing");
  if (mask.size() != static_cast<size_t>(cells()))
    throw std::invalid_argument("grid: mask size mismatch");
  if (std::none_of(mask.begin(), mask.end(),
                   [](CellKind k) { return k == CellKind::Interior; }))
    throw std::invalid_argument("grid: needs at least one interior cell");
}

ScalarField::ScalarField(int w, int h, double delta, double fill)
    : geom_(w, h, delta), values_(static_cast<size_t>(w) * h, fill) {}

ScalarField::ScalarField(GridGeometry geom, std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)) {
  if (values_.size() != static_cast<size_t>(geom_.cells()))
    throw std::invalid_argument("field: value count mismatch");
}

void ScalarField::validate() const {
  geom_.validate();
  for (int i = 0; i < cells(); i++)
    if (geom_.mask[i] != CellKind::Outside && !std::isfinite(values_[i]))
      throw std::invalid_argument("field: non-finite value on a domain cell");
}

std::pair<double, double> ScalarField::range() const {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < cells(); i++) {
    if (geom_.mask[i] == CellKind::Outside) continue;
    lo = std::min(lo, values_[i]);
    hi = std::max(hi, values_[i]);
  }
  return {lo, hi};
}

BinarySet::BinarySet(GridGeometry geom, bool fill)
    : geom_(std::move(geom)), in_(geom_.cells(), fill ? 1 : 0) {}

int BinarySet::count() const {
  int n = 0;
  for (auto b : in_) n += b;
  return n;
}

void Stencil::validate() const {
  if (arms.empty()) throw std::invalid_argument("stencil: no arms");
  for (size_t i = 0; i < arms.size(); i++) {
    if (!(arms[i].weight > 0.0)) throw std::invalid_argument("stencil: weights must be positive");
    for (size_t j = i + 1; j < arms.size(); j++)
      if (arms[i].dx * arms[j].dy - arms[i].dy * arms[j].dx == 0)
        throw std::invalid_argument("stencil: parallel offsets");
  }
}

VectorField forward_gradient(const ScalarField& u) {
  VectorField p(u.geom());
  const auto& g = u.geom();
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      const int i = g.idx(x, y);
      if (g.inside(x + 1, y)) p.dx[i] = (u[g.idx(x + 1, y)] - u[i]) / g.delta;
      if (g.inside(x, y + 1)) p.dy[i] = (u[g.idx(x, y + 1)] - u[i]) / g.delta;
    }
  return p;
}

ScalarField divergence(const VectorField& p) {
  const auto& g = p.geom;
  ScalarField d(g, std::vector<double>(g.cells(), 0.0));
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      const int i = g.idx(x, y);
      double acc = 0.0;
      if (g.inside(x + 1, y)) acc += p.dx[i];
      if (g.inside(x, y + 1)) acc += p.dy[i];
      if (g.inside(x - 1, y)) acc -= p.dx[g.idx(x - 1, y)];
      if (g.inside(x, y - 1)) acc -= p.dy[g.idx(x, y - 1)];
      d[i] = acc / g.delta;
    }
  return d;
}

namespace {

struct RawArm {
  int dx, dy;
  double ang, len;
};

std::vector<RawArm> arms_for_order(int order) {
  std::vector<std::pair<int, int>> off;
  switch (order) {
    case 4: off = {{1, 0}, {0, 1}}; break;
    case 8: off = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}}; break;
    case 16:
      off = {{1, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 1}, {-1, 2}, {-1, 1}, {-2, 1}};
      break;
    default:
      throw std::invalid_argument("crofton_weights: order must be 4, 8 or 16");
  }
  std::vector<RawArm> arms;
  for (auto [dx, dy] : off) {
    double ang = std::atan2(double(dy), double(dx));
    if (ang < 0) ang += std::numbers::pi;
    arms.push_back({dx, dy, ang, std::hypot(double(dx), double(dy))});
  }
  std::sort(arms.begin(), arms.end(), [](const RawArm& a, const RawArm& b) { return a.ang < b.ang; });
  return arms;
}

// Solve the n x n system A w = b by Gauss-Jordan with partial pivoting.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; c++) {
    int piv = c;
    for (int r = c + 1; r < n; r++)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    for (int cc = 0; cc < n; cc++) std::swap(A[c * n + cc], A[piv * n + cc]);
    std::swap(b[c], b[piv]);
    for (int r = 0; r < n; r++) {
      if (r == c) continue;
      const double f = A[r * n + c] / A[c * n + c];
      for (int cc = 0; cc < n; cc++) A[r * n + cc] -= f * A[c * n + cc];
      b[r] -= f * b[c];
    }
  }
  for (int c = 0; c < n; c++) b[c] /= A[c * n + c];
  return b;
}

// Half-plane estimate of the weights W: sum_k W_k |cos(theta_k - alpha)|.
double halfplane_estimate(const std::vector<RawArm>& arms, const std::vector<double>& W, double alpha) {
  double s = 0.0;
  for (size_t k = 0; k < arms.size(); k++) s += W[k] * std::abs(std::cos(arms[k].ang - alpha));
  return s;
}

double worst_relative_error(const Anisotropy& a, const std::vector<RawArm>& arms,
                            const std::vector<double>& W, int nsamp) {
  double worst = 0.0;
  for (int i = 0; i < nsamp; i++) {
    const double al = std::numbers::pi * i / nsamp;
    const double ph = a.eval({std::cos(al), std::sin(al)});
    worst = std::max(worst, std::abs(halfplane_estimate(arms, W, al) - ph) / ph);
  }
  return worst;
}

// Exact at the arm directions themselves; used for order 4 where the two
// axis normals must come out exactly.
std::vector<double> collocation_weights(const Anisotropy& a, const std::vector<RawArm>& arms) {
  const int n = static_cast<int>(arms.size());
  std::vector<double> A(n * n), b(n);
  for (int j = 0; j < n; j++) {
    for (int k = 0; k < n; k++) A[j * n + k] = std::abs(std::cos(arms[j].ang - arms[k].ang));
    b[j] = a.eval({std::cos(arms[j].ang), std::sin(arms[j].ang)});
  }
  return solve_dense(std::move(A), std::move(b));
}

// Relative least squares over many normals, then a deterministic coordinate
// search that shrinks the worst-case relative error. Keeps weights >= 0.
std::vector<double> calibrated_weights(const Anisotropy& a, const std::vector<RawArm>& arms) {
  const int n = static_cast<int>(arms.size());
  const int nsamp = 256;
  std::vector<double> AtA(n * n, 0.0), Atb(n, 0.0), row(n);
  for (int i = 0; i < nsamp; i++) {
    const double al = std::numbers::pi * (i + 0.5) / nsamp;
    const double ph = a.eval({std::cos(al), std::sin(al)});
    for (int k = 0; k < n; k++) row[k] = std::abs(std::cos(arms[k].ang - al)) / ph;
    for (int r = 0; r < n; r++) {
      Atb[r] += row[r];
      for (int c = 0; c < n; c++) AtA[r * n + c] += row[r] * row[c];
    }
  }
  std::vector<double> W = solve_dense(std::move(AtA), std::move(Atb));
  for (double& w : W) w = std::max(w, 0.0);

  static constexpr double kFactors[] = {0.999, 0.998, 0.995, 0.99, 0.98,
                                        1.001, 1.002, 1.005, 1.01, 1.02};
  double best = worst_relative_error(a, arms, W, 1440);
  for (int round = 0; round < 16; round++) {
    for (int k = 0; k < n; k++) {
      double keep = W[k];
      double best_w = keep;
      for (double f : kFactors) {
        W[k] = keep * f;
        const double e = worst_relative_error(a, arms, W, 1440);
        if (e < best) {
          best = e;
          best_w = W[k];
        }
      }
      W[k] = best_w;
    }
  }
  return W;
}

}  // namespace

Stencil crofton_weights(const Anisotropy& a, int order, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("crofton_weights: spacing must be positive");
  auto arms = arms_for_order(order);
  std::vector<double> W =
      order == 4 ? collocation_weights(a, arms) : calibrated_weights(a, arms);

  // crystalline norms put zero mass on some directions; drop those arms
  const double wmax = *std::max_element(W.begin(), W.end());
  Stencil s;
  s.order = order;
  s.delta = delta;
  for (size_t k = 0; k < arms.size(); k++) {
    if (W[k] <= 1e-9 * wmax) continue;
    s.arms.push_back({arms[k].dx, arms[k].dy, delta * W[k] / arms[k].len});
  }
  s.validate();
  return s;
}

double pairwise_perimeter(const BinarySet& e, const Stencil& s) {
  const auto& g = e.geom();
  double per = 0.0;
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      for (const auto& arm : s.arms) {
        const int X = x + arm.dx, Y = y + arm.dy;
        if (!g.inside(X, Y)) continue;
        if (e.contains(x, y) != e.contains(X, Y)) per += arm.weight;
      }
    }
  return per;
}

double pairwise_tv(const ScalarField& u, const Stencil& s) {
  const auto& g = u.geom();
  double tv = 0.0;
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      for (const auto& arm : s.arms) {
        const int X = x + arm.dx, Y = y + arm.dy;
        if (!g.inside(X, Y)) continue;
        tv += arm.weight * std::abs(u.at(X, Y) - u.at(x, y));
      }
    }
  return tv;
}

double cellwise_tv(const ScalarField& u, const Anisotropy& a) {
  const auto& g = u.geom();
  const VectorField p = forward_gradient(u);
  const double cell_area = g.delta * g.delta;
  double tv = 0.0;
  for (int i = 0; i < g.cells(); i++) {
    if (g.mask[i] == CellKind::Outside) continue;
    tv += cell_area * a.eval({p.dx[i], p.dy[i]});
  }
  return tv;
}

}  // namespace tvlevel
