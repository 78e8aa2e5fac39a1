#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "tvlevel/grid.hpp"
#include "tvlevel/verify.hpp"

using namespace tvlevel;

TEST_CASE("forward gradient examples") {
  // constant field -> zero gradient
  ScalarField c(5, 4, 0.5, 3.3);
  const VectorField gc = forward_gradient(c);
  for (int i = 0; i < c.cells(); i++) {
    CHECK(gc.dx[i] == 0.0);
    CHECK(gc.dy[i] == 0.0);
  }
  // u = x*delta: first component 1 in the interior, 0 at the right edge
  ScalarField ux(6, 3, 0.25);
  for (int y = 0; y < 3; y++)
    for (int x = 0; x < 6; x++) ux.at(x, y) = x * 0.25;
  const VectorField gx = forward_gradient(ux);
  for (int y = 0; y < 3; y++)
    for (int x = 0; x < 6; x++) {
      CHECK(gx.dx[ux.idx(x, y)] == doctest::Approx(x < 5 ? 1.0 : 0.0));
      CHECK(gx.dy[ux.idx(x, y)] == 0.0);
    }
  // 2x1 field (0, 3): gradient (3, 0) at the first cell, zero at the edge cell
  ScalarField two(2, 1, 1.0);
  two[1] = 3.0;
  const VectorField gt = forward_gradient(two);
  CHECK(gt.dx[0] == doctest::Approx(3.0));
  CHECK(gt.dy[0] == 0.0);
  CHECK(gt.dx[1] == 0.0);
}

TEST_CASE("divergence is the exact negative adjoint") {
  verify::Rng rng(11);
  for (int k = 0; k < 100; k++) {
    ScalarField u(16, 16, 0.5);
    if (k % 3 == 0) {
      for (int y = 5; y < 9; y++)
        for (int x = 2; x < 12; x++) u.set_kind(x, y, CellKind::Outside);
    }
    VectorField p(u.geom());
    for (int i = 0; i < u.cells(); i++) {
      u[i] = rng.uniform(-1, 1);
      p.dx[i] = rng.uniform(-1, 1);
      p.dy[i] = rng.uniform(-1, 1);
    }
    const VectorField gu = forward_gradient(u);
    const ScalarField dp = divergence(p);
    double lhs = 0, rhs = 0;
    for (int i = 0; i < u.cells(); i++) {
      lhs += gu.dx[i] * p.dx[i] + gu.dy[i] * p.dy[i];
      rhs += u[i] * dp[i];
    }
    CHECK(std::abs(lhs + rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
  // divergence of the gradient of a delta equals the Laplacian row
  ScalarField d(3, 3, 1.0);
  d.at(1, 1) = 1.0;
  const ScalarField lap = divergence(forward_gradient(d));
  CHECK(lap.at(1, 1) == doctest::Approx(-4.0));
  CHECK(lap.at(0, 1) == doctest::Approx(1.0));
  CHECK(lap.at(2, 1) == doctest::Approx(1.0));
  CHECK(lap.at(1, 0) == doctest::Approx(1.0));
  CHECK(lap.at(1, 2) == doctest::Approx(1.0));
  CHECK(lap.at(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("crofton weight examples") {
  const Stencil s4 = crofton_weights(Anisotropy::euclidean(), 4, 1.0);
  REQUIRE(s4.arms.size() == 2);
  CHECK(s4.arms[0].weight == doctest::Approx(s4.arms[1].weight).epsilon(1e-12));
  CHECK(s4.arms[0].weight == doctest::Approx(1.0).epsilon(1e-12));

  // weights scale linearly with the spacing
  const Stencil s4h = crofton_weights(Anisotropy::euclidean(), 4, 0.25);
  CHECK(s4h.arms[0].weight == doctest::Approx(0.25 * s4.arms[0].weight));

  // crystalline norms drop the arms that carry no mass
  const Stencil l1_16 = crofton_weights(Anisotropy::l1(), 16, 1.0);
  for (const auto& arm : l1_16.arms) {
    const bool axis = arm.dx == 0 || arm.dy == 0;
    CHECK(axis);
  }
  const Stencil linf8 = crofton_weights(Anisotropy::linf(), 8, 1.0);
  for (const auto& arm : linf8.arms) CHECK(std::abs(arm.dx) == std::abs(arm.dy));

  CHECK_THROWS_AS((void)crofton_weights(Anisotropy::euclidean(), 5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)crofton_weights(Anisotropy::euclidean(), 8, 0.0), std::invalid_argument);
}

namespace {

double halfplane_rate(const Anisotropy& a, int order, double angle, int n) {
  const Stencil s = crofton_weights(a, order, 1.0);
  GridGeometry g(n, n, 1.0);
  BinarySet e(g);
  const double cx = (n - 1) / 2.0, cy = (n - 1) / 2.0;
  const Vec2 nu{std::cos(angle), std::sin(angle)};
  for (int y = 0; y < n; y++)
    for (int x = 0; x < n; x++) e.bits()[g.idx(x, y)] = (x - cx) * nu.x + (y - cy) * nu.y <= 0;
  const double per = pairwise_perimeter(e, s);
  const Vec2 t{-nu.y, nu.x};
  double tmin = -1e300, tmax = 1e300;
  auto clip = [&](double p0, double dir) {
    if (std::abs(dir) < 1e-15) return;
    double u1 = (-0.5 - p0) / dir, u2 = (n - 0.5 - p0) / dir;
    if (u1 > u2) std::swap(u1, u2);
    tmin = std::max(tmin, u1);
    tmax = std::min(tmax, u2);
  };
  clip(cx, t.x);
  clip(cy, t.y);
  return per / (tmax - tmin);
}

}  // namespace

TEST_CASE("half-plane consistency of the weights") {
  // axis-aligned half-plane at order 4: exactly 1
  CHECK(halfplane_rate(Anisotropy::euclidean(), 4, 0.0, 64) == doctest::Approx(1.0).epsilon(1e-12));
  // diagonal at order 8: within 9 percent (order 4 alone is ~41 percent off)
  CHECK(std::abs(halfplane_rate(Anisotropy::euclidean(), 8, std::numbers::pi / 4, 256) - 1.0) <
        0.09);
  CHECK(std::abs(halfplane_rate(Anisotropy::euclidean(), 4, std::numbers::pi / 4, 256) - 1.0) >
        0.3);
  // weighted anisotropy at order 16, axis normal: within 5 percent of phi = 2
  const Anisotropy w = Anisotropy::weighted_l2({4, 0, 1});
  CHECK(std::abs(halfplane_rate(w, 16, 0.0, 256) - 2.0) / 2.0 < 0.05);
}

TEST_CASE("pairwise perimeter examples") {
  const Stencil s = crofton_weights(Anisotropy::euclidean(), 4, 1.0);
  GridGeometry g(8, 8, 1.0);
  BinarySet empty(g), full(g, true);
  CHECK(pairwise_perimeter(empty, s) == 0.0);
  CHECK(pairwise_perimeter(full, s) == 0.0);  // mask rule suppresses the frame
  BinarySet one(g);
  one.set(4, 4, true);
  CHECK(pairwise_perimeter(one, s) == doctest::Approx(4.0 * s.arms[0].weight));
}

TEST_CASE("pairwise tv and the exact coarea identity") {
  const Stencil s = crofton_weights(Anisotropy::euclidean(), 8, 1.0);
  ScalarField c(7, 5, 1.0, 2.5);
  CHECK(pairwise_tv(c, s) == 0.0);

  verify::Rng rng(99);
  for (int k = 0; k < 100; k++) {
    const ScalarField u = verify::quantized_field(6, 6, 1.0, rng.next(), 4);
    // binary indicator: tv equals the perimeter
    BinarySet e(u.geom());
    for (int i = 0; i < u.cells(); i++) e.bits()[i] = u[i] > 0.5;
    ScalarField ind(u.geom(), std::vector<double>(u.cells(), 0.0));
    for (int i = 0; i < u.cells(); i++) ind[i] = e.bits()[i] ? 1.0 : 0.0;
    CHECK(pairwise_tv(ind, s) == doctest::Approx(pairwise_perimeter(e, s)).epsilon(1e-14));

    const double tv = pairwise_tv(u, s);
    std::set<double> vals(u.values().begin(), u.values().end());
    std::vector<double> sorted(vals.begin(), vals.end());
    double stacked = 0;
    for (size_t j = 0; j + 1 < sorted.size(); j++) {
      BinarySet lev(u.geom());
      for (int i = 0; i < u.cells(); i++) lev.bits()[i] = u[i] > sorted[j];
      stacked += (sorted[j + 1] - sorted[j]) * pairwise_perimeter(lev, s);
    }
    CHECK(std::abs(tv - stacked) <= 1e-10 * std::max(1.0, tv));
  }
}

TEST_CASE("perimeter submodularity and translation invariance") {
  const Stencil s = crofton_weights(Anisotropy::euclidean(), 8, 1.0);
  verify::Rng rng(4242);
  for (int k = 0; k < 100; k++) {
    const BinarySet A = verify::random_set(12, 12, 1.0, rng.next());
    const BinarySet B = verify::random_set(12, 12, 1.0, rng.next());
    BinarySet I(A.geom()), U(A.geom());
    for (int i = 0; i < 144; i++) {
      I.bits()[i] = A.bits()[i] && B.bits()[i];
      U.bits()[i] = A.bits()[i] || B.bits()[i];
    }
    CHECK(pairwise_perimeter(I, s) + pairwise_perimeter(U, s) <=
          pairwise_perimeter(A, s) + pairwise_perimeter(B, s) + 1e-12);
  }
  for (int k = 0; k < 20; k++) {
    GridGeometry g(16, 16, 1.0);
    BinarySet e(g), t(g);
    const BinarySet blob = verify::random_set(6, 6, 1.0, rng.next());
    const int zx = rng.below(5), zy = rng.below(5);
    for (int y = 0; y < 6; y++)
      for (int x = 0; x < 6; x++) {
        e.set(x + 3, y + 3, blob.contains(x, y));
        t.set(x + 3 + zx, y + 3 + zy, blob.contains(x, y));
      }
    CHECK(pairwise_perimeter(e, s) ==
          doctest::Approx(pairwise_perimeter(t, s)).epsilon(1e-12));
  }
}

TEST_CASE("cellwise tv of a linear ramp") {
  // u = x: per-cell integrand phi((1,0)) on all cells with a live x-edge
  ScalarField u(9, 4, 0.5);
  for (int y = 0; y < 4; y++)
    for (int x = 0; x < 9; x++) u.at(x, y) = x * 0.5;
  const Anisotropy a = Anisotropy::weighted_l2({4, 0, 1});
  // 8 of 9 columns have a forward x-difference; each cell contributes
  // delta^2 * phi(1,0) = 0.25 * 2
  CHECK(cellwise_tv(u, a) == doctest::Approx(8 * 4 * 0.25 * 2.0));
}

TEST_CASE("field and stencil validation") {
  ScalarField f(3, 3, 1.0);
  f[4] = std::nan("");
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f[4] = 0.0;
  for (int i = 0; i < 9; i++) f.set_kind(i % 3, i / 3, CellKind::Outside);
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(3, 3, -1.0), std::invalid_argument);

  Stencil s;
  s.arms = {{1, 0, 1.0}, {2, 0, 0.5}};  // parallel offsets
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.arms = {{1, 0, 0.0}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}
