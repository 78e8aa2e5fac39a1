#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tvlevel/geom.hpp"
#include "tvlevel/grid.hpp"
#include "tvlevel/rof.hpp"

namespace tvlevel::verify {

/// Deterministic splitmix64 generator; identical streams on every platform.
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int below(int n) { return int(next() % std::uint64_t(n)); }
};

/// Outcome of one executable property check. Serialization is fully
/// deterministic given the seed (no wall times inside reports).
struct CheckReport {
  std::string check;
  std::string property;  // one-line statement of what was verified
  std::string status;    // "pass", "fail" or "report-only"
  std::uint64_t seed = 0;
  nlohmann::ordered_json params;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::string> artifacts;  // dump paths of failing fixtures

  bool failed() const { return status == "fail"; }
  void metric(const std::string& k, double v) { metrics.emplace_back(k, v); }
  void tolerance(const std::string& k, double v) { tolerances.emplace_back(k, v); }
  std::string to_json_line() const;
};

// ---- seeded fixtures -------------------------------------------------------

/// Band-limited random field, affinely normalized to [0, 1].
ScalarField smooth_field(int w, int h, double delta, std::uint64_t seed);
/// smooth_field rounded to n equally spaced values.
ScalarField quantized_field(int w, int h, double delta, std::uint64_t seed, int n_levels);
/// Level set of a smooth field (roughly half full).
BinarySet random_set(int w, int h, double delta, std::uint64_t seed);
/// Left/right two-value step image.
ScalarField step_field(int w, int h, double delta, double left, double right);
ScalarField checkerboard_field(int w, int h, double delta, int block, double a, double b);
/// Rectangle mask with a one-cell Boundary ring carrying trace values.
ScalarField ring_trace(int w, int h, double delta, const std::vector<double>& boundary_values);

// ---- independent oracles ---------------------------------------------------

/// Re-summations written against the raw definitions (separate code path from
/// the grid/geom modules; used for energy certificates).
double resum_pairwise_tv(const ScalarField& u, const Stencil& s);
double resum_perimeter(const BinarySet& e, const Stencil& s);
double resum_rof_energy(const RofProblem& p, const ScalarField& u);

/// Exhaustive minimizer for at most 18 free cells. Minimal/maximal are the
/// intersection/union of all optimal sets under the declared quantization.
CutResult brute_force_curvature(const CurvatureProblem& p, double quantum = kCapacityQuantum);

/// ROF minimizer reconstructed by stacking maximal brute-force minimizers at
/// n_levels midpoint thresholds; quantization error <= range / n_levels.
ScalarField stacked_rof_oracle(const ScalarField& g, double lambda, const Stencil& s,
                               int n_levels, double quantum = kCapacityQuantum);

/// Simple augmenting-path max-flow, independent of MaxflowGraph. Edge list
/// format: (u, v, cap) with implicit source = n, sink = n + 1.
std::int64_t reference_maxflow(int n_nodes,
                               const std::vector<std::tuple<int, int, std::int64_t>>& edges);

// ---- checks ----------------------------------------------------------------

CheckReport check_anisotropy_identities(std::uint64_t seed, const nlohmann::json& params,
                                        const std::string& artifact_dir);
CheckReport check_discrete_calculus(std::uint64_t seed, const nlohmann::json& params,
                                    const std::string& artifact_dir);
CheckReport check_maxflow_reference(std::uint64_t seed, const nlohmann::json& params,
                                    const std::string& artifact_dir);
CheckReport check_curvature_exactness(std::uint64_t seed, const nlohmann::json& params,
                                      const std::string& artifact_dir);
CheckReport check_stacked_oracle(std::uint64_t seed, const nlohmann::json& params,
                                 const std::string& artifact_dir);
CheckReport check_levelset_equivalence(std::uint64_t seed, const nlohmann::json& params,
                                       const std::string& artifact_dir);
CheckReport check_comparison_suite(std::uint64_t seed, const nlohmann::json& params,
                                   const std::string& artifact_dir);
CheckReport check_modulus(std::uint64_t seed, const nlohmann::json& params,
                          const std::string& artifact_dir);
CheckReport check_jump_inclusion(std::uint64_t seed, const nlohmann::json& params,
                                 const std::string& artifact_dir);
CheckReport check_dirichlet_solver(std::uint64_t seed, const nlohmann::json& params,
                                   const std::string& artifact_dir);
CheckReport check_crofton_halfspace(std::uint64_t seed, const nlohmann::json& params,
                                    const std::string& artifact_dir);
CheckReport report_density_and_separation(std::uint64_t seed, const nlohmann::json& params,
                                          const std::string& artifact_dir);

// ---- suite -----------------------------------------------------------------

struct SuiteJob {
  std::string check;
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::string tier = "fast";
};

std::vector<SuiteJob> parse_manifest(const std::string& json_text);
std::vector<SuiteJob> default_manifest();
std::string manifest_to_json(const std::vector<SuiteJob>& jobs);

/// Runs one job by name; throws std::invalid_argument for unknown checks.
CheckReport run_check(const SuiteJob& job, const std::string& artifact_dir);

/// Runs all jobs matching the tier ("fast", "slow" or "all"), optionally on
/// several threads; report order always follows the manifest order.
std::vector<CheckReport> run_suite(const std::vector<SuiteJob>& jobs, const std::string& tier,
                                   int parallel_jobs, const std::string& artifact_dir);

std::string reports_to_jsonl(const std::vector<CheckReport>& reports);
std::string summary_csv(const std::vector<CheckReport>& reports);
std::string summary_table(const std::vector<CheckReport>& reports);

}  // namespace tvlevel::verify
