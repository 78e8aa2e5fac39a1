#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tvlevel/anisotropy.hpp"
#include "tvlevel/verify.hpp"

using namespace tvlevel;

namespace {

// Numeric polar by support-function maximization over the unit circle; the
// closed forms are checked against this, never the other way round.
double polar_oracle(const Anisotropy& a, Vec2 xi) {
  double best = -1e300, best_th = 0;
  const int n = 8192;
  for (int i = 0; i < n; i++) {
    const double th = 2 * std::numbers::pi * i / n;
    const Vec2 x{std::cos(th), std::sin(th)};
    const double v = dot(x, xi) / a.eval(x);
    if (v > best) {
      best = v;
      best_th = th;
    }
  }
  double lo = best_th - 2 * std::numbers::pi / n, hi = best_th + 2 * std::numbers::pi / n;
  for (int it = 0; it < 200; it++) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    auto val = [&](double th) {
      const Vec2 x{std::cos(th), std::sin(th)};
      return dot(x, xi) / a.eval(x);
    };
    if (val(m1) < val(m2))
      lo = m1;
    else
      hi = m2;
  }
  const Vec2 x{std::cos((lo + hi) / 2), std::sin((lo + hi) / 2)};
  return std::max(best, dot(x, xi) / a.eval(x));
}

}  // namespace

TEST_CASE("eval closed forms") {
  CHECK(Anisotropy::euclidean().eval({3, 4}) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(Anisotropy::weighted_l2({4, 0, 1}).eval({1, 0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(Anisotropy::lp(1.5).eval({1, 1}) ==
        doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(Anisotropy::l1().eval({1, -2}) == doctest::Approx(3.0));
  CHECK(Anisotropy::linf().eval({1, -2}) == doctest::Approx(2.0));
}

TEST_CASE("polar closed forms") {
  CHECK(Anisotropy::euclidean().polar_eval({0, 2}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(Anisotropy::weighted_l2({4, 0, 1}).polar_eval({1, 0}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  // Hoelder conjugate of p = 3 is q = 1.5, so the polar at (1,1) is 2^(2/3)
  CHECK(Anisotropy::lp(3).polar_eval({1, 1}) ==
        doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-14));
  CHECK(Anisotropy::l1().polar().kind() == NormKind::Linf);
  CHECK(Anisotropy::linf().polar().kind() == NormKind::L1);
}

TEST_CASE("polar matches the numeric support-function oracle") {
  verify::Rng rng(77);
  const std::vector<Anisotropy> kinds = {
      Anisotropy::euclidean(),       Anisotropy::weighted_l2({4, 0, 1}),
      Anisotropy::weighted_l2({2, 0.8, 1}), Anisotropy::lp(1.5),
      Anisotropy::lp(3.0),           Anisotropy::l1(),
      Anisotropy::linf()};
  for (const auto& a : kinds) {
    for (int k = 0; k < 20; k++) {
      const Vec2 xi{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      if (norm2(xi) < 1e-2) continue;
      CHECK(a.polar_eval(xi) == doctest::Approx(polar_oracle(a, xi)).epsilon(1e-9));
    }
  }
}

TEST_CASE("grad examples and errors") {
  const Vec2 ge = Anisotropy::euclidean().grad({3, 4});
  CHECK(ge.x == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(ge.y == doctest::Approx(0.8).epsilon(1e-14));
  const Vec2 gw = Anisotropy::weighted_l2({4, 0, 1}).grad({1, 0});
  CHECK(gw.x == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gw.y == doctest::Approx(0.0));
  // lp p=3 at (1,1): checked against central differences
  const Anisotropy a3 = Anisotropy::lp(3);
  const Vec2 g3 = a3.grad({1, 1});
  const double h = 1e-6;
  const double fdx = (a3.eval({1 + h, 1}) - a3.eval({1 - h, 1})) / (2 * h);
  CHECK(g3.x == doctest::Approx(fdx).epsilon(1e-8));
  CHECK(g3.x == doctest::Approx(std::pow(2.0, -2.0 / 3.0)).epsilon(1e-12));
  CHECK(g3.y == doctest::Approx(g3.x));

  CHECK_THROWS_AS((void)Anisotropy::euclidean().grad({0, 0}), std::domain_error);
  CHECK_THROWS_AS((void)Anisotropy::l1().grad({1, 1}), capability_error);
  CHECK_THROWS_AS((void)Anisotropy::linf().grad({1, 1}), capability_error);
}

TEST_CASE("duality identities on seeded samples") {
  verify::Rng rng(123);
  const std::vector<Anisotropy> kinds = {Anisotropy::euclidean(),
                                         Anisotropy::weighted_l2({4, 0, 1}),
                                         Anisotropy::weighted_l2({2, 0.8, 1}),
                                         Anisotropy::lp(1.5), Anisotropy::lp(3.0)};
  for (const auto& a : kinds) {
    const Anisotropy polar = a.polar();
    for (int k = 0; k < 1000; k++) {
      Vec2 x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      if (norm2(x) < 1e-3) continue;
      const double phi = a.eval(x);
      const Vec2 gr = a.grad(x);
      CHECK(std::abs(dot(gr, x) - phi) <= 1e-9 * phi);
      CHECK(std::abs(polar.eval(gr) - 1.0) <= 1e-9);
      const Vec2 y = phi * gr;
      const Vec2 back = polar.eval(y) * polar.grad(y);
      CHECK(norm2(back - x) <= 1e-8 * norm2(x));
      // Hoelder with tiny slack
      const Vec2 xi{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      CHECK(dot(x, xi) <= a.eval(x) * polar.eval(xi) + 1e-12);
      // polar duality via closed-form pairing
      CHECK(polar.polar().eval(x) == doctest::Approx(phi).epsilon(1e-9));
    }
  }
}

TEST_CASE("norm axioms") {
  verify::Rng rng(5);
  for (const auto& a : {Anisotropy::euclidean(), Anisotropy::lp(1.5), Anisotropy::l1(),
                        Anisotropy::linf(), Anisotropy::weighted_l2({2, 0.8, 1})}) {
    CHECK(a.eval({0, 0}) == 0.0);
    for (int k = 0; k < 200; k++) {
      const Vec2 x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const Vec2 y{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const double s = rng.uniform(-4, 4);
      CHECK(a.eval(x) >= 0.0);
      CHECK(a.eval({-x.x, -x.y}) == a.eval(x));
      CHECK(a.eval(s * x) == doctest::Approx(std::abs(s) * a.eval(x)).epsilon(1e-12));
      CHECK(a.eval(x + y) <= a.eval(x) + a.eval(y) + 1e-12);
    }
    auto [A, B] = a.equivalence_constants();
    CHECK(A > 0);
    CHECK(A <= B);
    for (int k = 0; k < 200; k++) {
      const Vec2 x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      const double n = norm2(x);
      CHECK(a.eval(x) >= A * n - 1e-12);
      CHECK(a.eval(x) <= B * n + 1e-12);
    }
  }
}

TEST_CASE("capability flags") {
  CHECK(Anisotropy::euclidean().squared_strongly_convex());
  CHECK(Anisotropy::weighted_l2({4, 0, 1}).squared_strongly_convex());
  CHECK(Anisotropy::lp(1.5).squared_strongly_convex());
  CHECK_FALSE(Anisotropy::lp(3.0).squared_strongly_convex());
  CHECK_FALSE(Anisotropy::l1().squared_strongly_convex());
  CHECK(Anisotropy::l1().crystalline());
  CHECK(Anisotropy::linf().crystalline());
  CHECK_FALSE(Anisotropy::lp(1.5).crystalline());
}

TEST_CASE("json descriptor round trip and rejection") {
  const auto a = Anisotropy::from_json_text(R"({"kind":"weighted_l2","matrix":[[4,0],[0,1]]})");
  CHECK(a.kind() == NormKind::WeightedL2);
  CHECK(a.eval({1, 0}) == doctest::Approx(2.0));
  const auto b = Anisotropy::from_json_text(a.to_json_text());
  CHECK(b.eval({0.3, -1.2}) == doctest::Approx(a.eval({0.3, -1.2})));
  const auto c = Anisotropy::from_json_text(R"({"kind":"lp","p":1.5})");
  CHECK(c.exponent() == doctest::Approx(1.5));

  CHECK_THROWS_AS((void)Anisotropy::from_json_text(R"({"kind":"lp","p":1.0})"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)Anisotropy::from_json_text(R"({"kind":"lp","p":0.5})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      (void)Anisotropy::from_json_text(R"({"kind":"weighted_l2","matrix":[[1,2],[2,1]]})"),
      std::invalid_argument);  // not positive definite
  CHECK_THROWS_AS(
      (void)Anisotropy::from_json_text(R"({"kind":"weighted_l2","matrix":[[1,0.5],[0.4,1]]})"),
      std::invalid_argument);  // not symmetric
  CHECK_THROWS_AS((void)Anisotropy::from_json_text(R"({"kind":"spherical"})"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)Anisotropy::from_json_text(R"({"kind":"euclidean","extra":1})"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)Anisotropy::from_json_text("not json"), std::invalid_argument);
}
