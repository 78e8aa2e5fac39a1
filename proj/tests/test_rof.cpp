#include <doctest.h>

#include <cmath>

#include "tvlevel/rof.hpp"
#include "tvlevel/verify.hpp"

using namespace tvlevel;

namespace {

Stencil st4() { return crofton_weights(Anisotropy::euclidean(), 4, 1.0); }
Stencil st8() { return crofton_weights(Anisotropy::euclidean(), 8, 1.0); }

}  // namespace

TEST_CASE("constant data is a fixed point") {
  RofProblem p;
  p.g = ScalarField(6, 5, 1.0, 1.7);
  p.lambda = 0.8;
  p.stencil = st8();
  const auto [u, r] = solve(p, 1e-10, 100000);
  CHECK(r.converged);
  CHECK(r.gap_abs <= 1e-10);
  for (int i = 0; i < u.cells(); i++) CHECK(u[i] == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("two-pixel closed form, verified by ternary search") {
  const double a = 0.9;
  for (double lambda : {0.05, 0.15, 0.3, 0.6}) {
    RofProblem p;
    p.g = ScalarField(2, 1, 1.0);
    p.g[1] = a;
    p.lambda = lambda;
    p.stencil = st4();
    const double w = p.stencil.arms[0].weight;
    const auto [u, r] = solve(p, 1e-12, 200000);
    REQUIRE(r.converged);

    // closed form
    const double d_closed = std::max(a - 2 * w * lambda, 0.0);
    // independent 1-D ternary search over the jump d (u = (m - d/2, m + d/2))
    auto objective = [&](double d) { return w * d + (a - d) * (a - d) / (4 * lambda); };
    double lo = 0.0, hi = a;
    for (int it = 0; it < 300; it++) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (objective(m1) < objective(m2))
        hi = m2;
      else
        lo = m1;
    }
    const double d_oracle = (lo + hi) / 2;
    CHECK(d_closed == doctest::Approx(d_oracle).epsilon(1e-6));
    CHECK(u[0] == doctest::Approx(a / 2 - d_closed / 2).epsilon(1e-9));
    CHECK(u[1] == doctest::Approx(a / 2 + d_closed / 2).epsilon(1e-9));
  }
}

TEST_CASE("energy examples") {
  RofProblem p;
  p.g = verify::smooth_field(4, 4, 1.0, 8);
  p.lambda = 1.0;
  p.stencil = st8();
  // u = g: fidelity vanishes
  CHECK(energy(p, p.g) == doctest::Approx(pairwise_tv(p.g, p.stencil)).epsilon(1e-14));
  // u = 0, g = 1: fidelity only, n/2
  RofProblem q;
  q.g = ScalarField(4, 4, 1.0, 1.0);
  q.lambda = 1.0;
  q.stencil = st8();
  const ScalarField zero(4, 4, 1.0, 0.0);
  CHECK(energy(q, zero) == doctest::Approx(8.0).epsilon(1e-14));
  // equals the independent resummation
  verify::Rng rng(3);
  ScalarField u(4, 4, 1.0);
  for (int i = 0; i < 16; i++) u[i] = rng.uniform(-1, 1);
  CHECK(energy(p, u) == doctest::Approx(verify::resum_rof_energy(p, u)).epsilon(1e-12));
}

TEST_CASE("maximum principle, mean preservation and comparison") {
  verify::Rng rng(17);
  for (int k = 0; k < 8; k++) {
    RofProblem pg;
    pg.g = verify::smooth_field(8, 8, 1.0, rng.next());
    pg.lambda = 1.0;
    pg.stencil = st8();
    RofProblem ph = pg;
    const ScalarField bump = verify::smooth_field(8, 8, 1.0, rng.next());
    for (int i = 0; i < 64; i++) ph.g[i] = pg.g[i] + 0.5 * bump[i] * bump[i];
    const auto [ug, rg] = solve(pg, 1e-11, 300000);
    const auto [uh, rh] = solve(ph, 1e-11, 300000);
    REQUIRE(rg.converged);
    const auto [lo, hi] = pg.g.range();
    double mean = 0;
    for (int i = 0; i < 64; i++) {
      CHECK(ug[i] >= lo - 1e-6);
      CHECK(ug[i] <= hi + 1e-6);
      CHECK(ug[i] <= uh[i] + 1e-6);
      mean += ug[i] - pg.g[i];
    }
    CHECK(std::abs(mean) <= 1e-6 * 64);
  }
}

TEST_CASE("shift equivariance and sup-norm contraction") {
  verify::Rng rng(29);
  RofProblem pg;
  pg.g = verify::smooth_field(8, 8, 1.0, 1234);
  pg.lambda = 0.7;
  pg.stencil = st8();
  const auto [ug, rg] = solve(pg, 1e-12, 300000);
  RofProblem pc = pg;
  for (int i = 0; i < 64; i++) pc.g[i] += 0.37;
  const auto [uc, rc] = solve(pc, 1e-12, 300000);
  double worst = 0, sup_u = 0, sup_g = 0;
  for (int i = 0; i < 64; i++) worst = std::max(worst, std::abs(uc[i] - ug[i] - 0.37));
  CHECK(worst <= 1e-7);
  RofProblem ph = pg;
  for (int i = 0; i < 64; i++) ph.g[i] = pg.g[i] + rng.uniform(0.0, 0.3);
  const auto [uh, rh] = solve(ph, 1e-12, 300000);
  for (int i = 0; i < 64; i++) {
    sup_u = std::max(sup_u, std::abs(uh[i] - ug[i]));
    sup_g = std::max(sup_g, std::abs(ph.g[i] - pg.g[i]));
  }
  CHECK(sup_u <= sup_g + 1e-6);
}

TEST_CASE("duality gap trend is monotone-ish under acceleration") {
  RofProblem p;
  p.g = verify::smooth_field(12, 12, 1.0, 55);
  p.lambda = 0.5;
  p.stencil = st8();
  const auto [u, r] = solve(p, 1e-300, 20000);  // run the full budget
  REQUIRE(r.gap_history.size() > 10);
  for (const auto& [it_i, gap_i] : r.gap_history) {
    for (const auto& [it_j, gap_j] : r.gap_history) {
      if (it_j >= 9 * it_i && it_j <= 11 * it_i && gap_i > 1e-14)
        CHECK(gap_j <= gap_i * 1.1);
    }
  }
}

TEST_CASE("huber smoothing solves and certifies") {
  RofProblem p;
  p.g = verify::smooth_field(8, 8, 1.0, 91);
  p.lambda = 0.4;
  p.stencil = st8();
  p.f = FKind::Huber;
  p.huber_eps = 0.05;
  const auto [u, r] = solve(p, 1e-10, 200000);
  CHECK(r.converged);
  CHECK(r.gap_rel <= 1e-10);
  CHECK(energy(p, u) == doctest::Approx(r.primal).epsilon(1e-12));

  // per-cell huber with each norm family
  for (const auto& a : {Anisotropy::euclidean(), Anisotropy::weighted_l2({2, 0.8, 1}),
                        Anisotropy::lp(1.5)}) {
    RofProblem q;
    q.g = verify::smooth_field(6, 6, 1.0, 17);
    q.lambda = 0.4;
    q.reg = Regularizer::PerCell;
    q.aniso = a;
    q.f = FKind::Huber;
    q.huber_eps = 0.1;
    const auto [uq, rq] = solve(q, 1e-9, 300000);
    CHECK(rq.converged);
    CHECK(rq.gap_rel <= 1e-9);
  }
}

TEST_CASE("per-cell identity certifies for every smooth norm kind") {
  for (const auto& a : {Anisotropy::euclidean(), Anisotropy::weighted_l2({4, 0, 1}),
                        Anisotropy::lp(3.0)}) {
    RofProblem p;
    p.g = verify::smooth_field(6, 6, 0.5, 23);
    p.lambda = 0.2;
    p.reg = Regularizer::PerCell;
    p.aniso = a;
    const auto [u, r] = solve(p, 1e-9, 400000);
    CHECK(r.converged);
    const auto [lo, hi] = p.g.range();
    for (int i = 0; i < 36; i++) {
      CHECK(u[i] >= lo - 1e-7);
      CHECK(u[i] <= hi + 1e-7);
    }
  }
}

TEST_CASE("dirichlet boundary mode pins the trace") {
  ScalarField g(6, 6, 1.0);
  for (int y = 0; y < 6; y++)
    for (int x = 0; x < 6; x++) {
      g.at(x, y) = 0.5;
      if (x == 0 || y == 0 || x == 5 || y == 5) {
        g.set_kind(x, y, CellKind::Boundary);
        g.at(x, y) = x < 3 ? 0.0 : 1.0;
      }
    }
  RofProblem p;
  p.g = g;
  p.lambda = 2.0;
  p.stencil = st8();
  p.boundary = BoundaryMode::Dirichlet;
  const auto [u, r] = solve(p, 1e-10, 300000);
  CHECK(r.converged);
  for (int y = 0; y < 6; y++)
    for (int x = 0; x < 6; x++)
      if (g.kind(x, y) == CellKind::Boundary) CHECK(u.at(x, y) == g.at(x, y));
  // interior stays within the trace range
  for (int i = 0; i < 36; i++) {
    CHECK(u[i] >= -1e-9);
    CHECK(u[i] <= 1.0 + 1e-9);
  }
}

TEST_CASE("non-convergence is reported, not thrown") {
  RofProblem p;
  p.g = verify::smooth_field(10, 10, 1.0, 3);
  p.lambda = 1.0;
  p.stencil = st8();
  const auto [u, r] = solve(p, 1e-14, 40);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 40);
  CHECK(u.cells() == 100);  // last iterate still returned
}

TEST_CASE("problem validation") {
  RofProblem p;
  p.g = ScalarField(3, 3, 1.0);
  p.stencil = st4();
  p.lambda = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.lambda = 1.0;
  p.f = FKind::Huber;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // eps missing
  p.f = FKind::Identity;
  p.reg = Regularizer::PerCell;
  p.aniso = Anisotropy::l1();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // crystalline per-cell
  p.aniso = Anisotropy::euclidean();
  p.boundary = BoundaryMode::Dirichlet;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // no boundary cells
  CHECK_THROWS_AS((void)solve(p, 0.0, 10), std::invalid_argument);
}

TEST_CASE("polar ball projection is a true euclidean projection") {
  verify::Rng rng(7);
  for (const auto& a : {Anisotropy::euclidean(), Anisotropy::weighted_l2({4, 0, 1}),
                        Anisotropy::weighted_l2({2, 0.8, 1}), Anisotropy::lp(1.5),
                        Anisotropy::lp(3.0), Anisotropy::l1(), Anisotropy::linf()}) {
    const Anisotropy polar = a.polar();
    for (int k = 0; k < 200; k++) {
      const Vec2 y{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const double r = rng.uniform(0.2, 2.0);
      const Vec2 p = project_polar_ball(a, y, r);
      CHECK(polar.eval(p) <= r * (1 + 1e-9));
      if (polar.eval(y) <= r) {
        CHECK(p.x == y.x);
        CHECK(p.y == y.y);
        continue;
      }
      // no feasible point is closer (spot check against random candidates)
      const double dp = norm2(p - y);
      for (int t = 0; t < 50; t++) {
        Vec2 z{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        const double pv = polar.eval(z);
        if (pv > r) z = (r / pv) * z;  // radial pullback keeps it feasible
        CHECK(norm2(z - y) >= dp - 1e-7);
      }
    }
  }
}
