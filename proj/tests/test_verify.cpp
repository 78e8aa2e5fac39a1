#include <doctest.h>

#include <cmath>

#include "tvlevel/verify.hpp"

using namespace tvlevel;
using namespace tvlevel::verify;

TEST_CASE("brute force: single free cell") {
  // include the cell iff perimeter cost + volume < 0; a tie keeps the
  // minimal minimizer empty and the maximal one full
  Stencil s;
  s.arms = {{1, 0, 0.25}, {0, 1, 0.25}};
  s.order = 4;
  CurvatureProblem p;
  p.g = ScalarField(3, 3, 1.0, 0.0);
  p.stencil = s;
  p.scale = 1.0;
  p.seeds.assign(9, Seed::ForcedOut);
  p.seeds[4] = Seed::Free;  // centre cell: 4 incident pairs, cost 1.0 to flip

  p.g[4] = p.level - (-1.0 + 2.0);  // volume = level - g = -1: total +... tune below
  // volume v = scale*(level - g). perimeter cost of including: 4 * 0.25 = 1.
  p.level = 0.0;
  p.g[4] = 1.5;  // v = -1.5: include (1 - 1.5 < 0)
  auto r = brute_force_curvature(p);
  CHECK(r.minimal.bits()[4] == 1);
  CHECK(r.maximal.bits()[4] == 1);
  p.g[4] = 0.5;  // v = -0.5: exclude (1 - 0.5 > 0)
  r = brute_force_curvature(p);
  CHECK(r.minimal.bits()[4] == 0);
  CHECK(r.maximal.bits()[4] == 0);
  p.g[4] = 1.0;  // exact tie
  r = brute_force_curvature(p);
  CHECK(r.minimal.bits()[4] == 0);
  CHECK(r.maximal.bits()[4] == 1);
}

TEST_CASE("brute force refuses large instances") {
  CurvatureProblem p;
  p.g = ScalarField(5, 5, 1.0, 0.0);
  p.stencil = crofton_weights(Anisotropy::euclidean(), 4, 1.0);
  CHECK_THROWS_AS((void)brute_force_curvature(p), std::invalid_argument);
}

TEST_CASE("stacked oracle on constant data") {
  const ScalarField g(3, 3, 1.0, 0.4);
  const Stencil s = crofton_weights(Anisotropy::euclidean(), 4, 1.0);
  const ScalarField u = stacked_rof_oracle(g, 1.0, s, 64);
  for (int i = 0; i < 9; i++) CHECK(u[i] == doctest::Approx(0.4));
}

TEST_CASE("fixtures are deterministic and normalized") {
  const ScalarField a = smooth_field(9, 7, 1.0, 42);
  const ScalarField b = smooth_field(9, 7, 1.0, 42);
  CHECK(a.values() == b.values());
  const auto [lo, hi] = a.range();
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(1.0));
  const ScalarField q = quantized_field(6, 6, 1.0, 9, 4);
  for (int i = 0; i < 36; i++) {
    bool on_level = false;
    for (int l = 0; l < 4; l++) on_level |= q[i] == doctest::Approx(l / 3.0);
    CHECK(on_level);
  }
}

TEST_CASE("check reports serialize deterministically") {
  const SuiteJob job{"maxflow_reference", nlohmann::json::object(), 7, "fast"};
  const CheckReport r1 = run_check(job, "");
  const CheckReport r2 = run_check(job, "");
  CHECK(r1.to_json_line() == r2.to_json_line());
  CHECK(r1.status == "pass");
}

TEST_CASE("manifest parsing") {
  auto jobs = parse_manifest(R"([{"check":"maxflow_reference","seed":3,"tier":"fast"}])");
  REQUIRE(jobs.size() == 1);
  CHECK(jobs[0].check == "maxflow_reference");
  CHECK(jobs[0].seed == 3);
  CHECK(parse_manifest("[]").empty());
  CHECK_THROWS_AS((void)parse_manifest("{}"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_manifest("[{\"seed\":1}]"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_manifest("nope"), std::invalid_argument);
  const SuiteJob bad{"unknown_check", nlohmann::json::object(), 0, "fast"};
  CHECK_THROWS_AS((void)run_check(bad, ""), std::invalid_argument);
}

TEST_CASE("default manifest reruns byte-identically and passes the quick checks") {
  const auto jobs = default_manifest();
  // a cheap deterministic subset; the full tiers run in the acceptance suite
  std::vector<SuiteJob> quick;
  for (const auto& j : jobs)
    if (j.check == "anisotropy_identities" || j.check == "maxflow_reference" ||
        j.check == "curvature_exactness")
      quick.push_back(j);
  const auto r1 = run_suite(quick, "all", 1, "");
  const auto r2 = run_suite(quick, "all", 2, "");
  CHECK(reports_to_jsonl(r1) == reports_to_jsonl(r2));
  for (const auto& r : r1) CHECK(r.status == "pass");
  CHECK(summary_csv(r1).rfind("check,status,seed,metric,value\n", 0) == 0);
}

TEST_CASE("broken tolerance forces a failure") {
  // a zero tolerance on the finite-difference identity cannot be met
  SuiteJob job{"anisotropy_identities",
               nlohmann::json{{"tolerance_fd", 0.0}, {"samples", 50}}, 1, "fast"};
  const CheckReport r = run_check(job, "");
  CHECK(r.status == "fail");
}
