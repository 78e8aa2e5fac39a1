// Command-line front end: denoising, Dirichlet solves, level-set extraction,
// stencil inspection and the verification suite.
//
// Exit codes: 0 ok, 1 usage/IO/validation, 2 solver non-convergence,
// 3 verification failures.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tvlevel/geom.hpp"
#include "tvlevel/io.hpp"
#include "tvlevel/rof.hpp"
#include "tvlevel/verify.hpp"

using nlohmann::json;
using nlohmann::ordered_json;
using namespace tvlevel;

namespace {

struct Config {
  std::string anisotropy = R"({"kind":"euclidean"})";
  std::string regularizer = "pairwise";
  int order = 8;
  double lambda = 1.0;
  std::string f = "identity";
  double epsilon = 0.0;
  std::string boundary = "neumann";
  double tol = 1e-6;
  int max_iter = 200000;
  std::vector<double> thresholds;
  std::uint64_t seed = 0;
  std::string input, mask, trace, seeds_in, seeds_out;
  std::string output_prefix = "out";
  double level = 0.5;
  double scale = 1.0;
  double delta = 1.0;
  double lo = 0.0, hi = 1.0;
  int maxval = 65535;
  bool ascii = false;
  bool dump_levels = false;
  bool timings = false;
  std::string tier = "fast";
  int jobs = 1;
  std::string manifest;
  std::string output_dir = "verify_out";

  ordered_json to_json() const {
    ordered_json j;
    j["anisotropy"] = json::parse(anisotropy);
    j["regularizer"] = regularizer;
    j["order"] = order;
    j["lambda"] = lambda;
    j["f"] = f;
    j["epsilon"] = epsilon;
    j["boundary"] = boundary;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["thresholds"] = thresholds;
    j["seed"] = seed;
    j["input"] = input;
    j["mask"] = mask;
    j["trace"] = trace;
    j["seeds_in"] = seeds_in;
    j["seeds_out"] = seeds_out;
    j["output_prefix"] = output_prefix;
    j["level"] = level;
    j["scale"] = scale;
    j["delta"] = delta;
    j["lo"] = lo;
    j["hi"] = hi;
    j["maxval"] = maxval;
    j["ascii"] = ascii;
    j["dump_levels"] = dump_levels;
    j["timings"] = timings;
    j["tier"] = tier;
    j["jobs"] = jobs;
    j["manifest"] = manifest;
    j["output_dir"] = output_dir;
    return j;
  }
};

void apply_config_file(Config& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": bad JSON: " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error(path + ": config must be an object");
  for (const auto& [key, val] : j.items()) {
    if (key == "anisotropy") c.anisotropy = val.dump();
    else if (key == "regularizer") c.regularizer = val.get<std::string>();
    else if (key == "order") c.order = val.get<int>();
    else if (key == "lambda") c.lambda = val.get<double>();
    else if (key == "f") c.f = val.get<std::string>();
    else if (key == "epsilon") c.epsilon = val.get<double>();
    else if (key == "boundary") c.boundary = val.get<std::string>();
    else if (key == "tol") c.tol = val.get<double>();
    else if (key == "max_iter") c.max_iter = val.get<int>();
    else if (key == "thresholds") c.thresholds = val.get<std::vector<double>>();
    else if (key == "seed") c.seed = val.get<std::uint64_t>();
    else if (key == "input") c.input = val.get<std::string>();
    else if (key == "mask") c.mask = val.get<std::string>();
    else if (key == "trace") c.trace = val.get<std::string>();
    else if (key == "seeds_in") c.seeds_in = val.get<std::string>();
    else if (key == "seeds_out") c.seeds_out = val.get<std::string>();
    else if (key == "output_prefix") c.output_prefix = val.get<std::string>();
    else if (key == "level") c.level = val.get<double>();
    else if (key == "scale") c.scale = val.get<double>();
    else if (key == "delta") c.delta = val.get<double>();
    else if (key == "lo") c.lo = val.get<double>();
    else if (key == "hi") c.hi = val.get<double>();
    else if (key == "maxval") c.maxval = val.get<int>();
    else if (key == "ascii") c.ascii = val.get<bool>();
    else if (key == "dump_levels") c.dump_levels = val.get<bool>();
    else if (key == "timings") c.timings = val.get<bool>();
    else if (key == "tier") c.tier = val.get<std::string>();
    else if (key == "jobs") c.jobs = val.get<int>();
    else if (key == "manifest") c.manifest = val.get<std::string>();
    else if (key == "output_dir") c.output_dir = val.get<std::string>();
    else throw std::runtime_error(path + ": unknown config key \"" + key + "\"");
  }
}

void validate_config(const Config& c) {
  (void)Anisotropy::from_json_text(c.anisotropy);
  if (c.regularizer != "pairwise" && c.regularizer != "per_cell")
    throw std::runtime_error("regularizer must be pairwise or per_cell");
  if (c.order != 4 && c.order != 8 && c.order != 16)
    throw std::runtime_error("order must be 4, 8 or 16");
  if (!(c.lambda > 0)) throw std::runtime_error("lambda must be positive");
  if (c.f != "identity" && c.f != "huber") throw std::runtime_error("f must be identity or huber");
  if (c.f == "huber" && !(c.epsilon > 0)) throw std::runtime_error("huber needs epsilon > 0");
  if (c.boundary != "neumann" && c.boundary != "dirichlet")
    throw std::runtime_error("boundary must be neumann or dirichlet");
  if (!(c.tol > 0)) throw std::runtime_error("tol must be positive");
  if (c.max_iter <= 0) throw std::runtime_error("max_iter must be positive");
  if (!(c.delta > 0)) throw std::runtime_error("delta must be positive");
  if (!(c.hi > c.lo)) throw std::runtime_error("range needs hi > lo");
  if (c.maxval != 255 && c.maxval != 65535) throw std::runtime_error("maxval must be 255 or 65535");
  if (c.tier != "fast" && c.tier != "slow" && c.tier != "all")
    throw std::runtime_error("tier must be fast, slow or all");
  if (c.jobs < 1) throw std::runtime_error("jobs must be >= 1");
  for (size_t i = 1; i < c.thresholds.size(); i++)
    if (!(c.thresholds[i] > c.thresholds[i - 1]))
      throw std::runtime_error("thresholds must be strictly increasing");
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ScalarField load_field(const Config& c, const std::string& path) {
  ScalarField f;
  if (ends_with(path, ".csv")) {
    f = read_csv(path).field;
  } else if (ends_with(path, ".pgm")) {
    f = read_pgm(path, c.lo, c.hi, c.delta);
  } else {
    throw std::runtime_error(path + ": expected a .csv or .pgm field");
  }
  if (!c.mask.empty()) {
    const GridGeometry m = read_mask_pgm(c.mask, f.delta());
    if (m.width != f.width() || m.height != f.height())
      throw std::runtime_error(c.mask + ": mask size does not match the field");
    ScalarField g(m, f.values());
    g.validate();
    return g;
  }
  f.validate();
  return f;
}

Stencil stencil_for(const Config& c, double delta) {
  return crofton_weights(Anisotropy::from_json_text(c.anisotropy), c.order, delta);
}

void write_field_outputs(const Config& c, const ScalarField& u) {
  write_pgm(c.output_prefix + ".pgm", u, c.lo, c.hi, c.maxval, c.ascii);
  write_csv(c.output_prefix + ".csv", u, c.lo, c.hi);
}

int cmd_denoise(const Config& c) {
  const ScalarField g = load_field(c, c.input);
  RofProblem p;
  p.g = g;
  p.lambda = c.lambda;
  if (c.regularizer == "pairwise") {
    p.reg = Regularizer::Pairwise;
    p.stencil = stencil_for(c, g.delta());
  } else {
    p.reg = Regularizer::PerCell;
    p.aniso = Anisotropy::from_json_text(c.anisotropy);
  }
  if (c.f == "huber") {
    p.f = FKind::Huber;
    p.huber_eps = c.epsilon;
  }
  p.boundary = c.boundary == "dirichlet" ? BoundaryMode::Dirichlet : BoundaryMode::Neumann;
  p.validate();

  const auto [u, report] = solve(p, c.tol, c.max_iter);
  write_field_outputs(c, u);
  ordered_json meta = ordered_json::parse(report.to_json_line(c.timings));
  meta["range"] = {c.lo, c.hi};
  if (p.reg == Regularizer::Pairwise)
    meta["pairwise_tv"] = pairwise_tv(u, p.stencil);
  else
    meta["cellwise_tv"] = cellwise_tv(u, p.aniso);
  atomic_write(c.output_prefix + "_report.json", meta.dump(2) + "\n");
  if (!report.converged) {
    std::cerr << "not converged: relative gap " << report.gap_rel << " after "
              << report.iterations << " iterations\n";
    return 2;
  }
  return 0;
}

int cmd_dirichlet(const Config& c) {
  Config cc = c;
  if (cc.mask.empty()) throw std::runtime_error("dirichlet needs --mask with boundary cells");
  const ScalarField trace = load_field(cc, cc.trace.empty() ? cc.input : cc.trace);
  const Stencil st = stencil_for(c, trace.delta());
  const std::vector<double> levels =
      c.thresholds.empty() ? default_dirichlet_levels(trace) : c.thresholds;
  const auto cuts = dirichlet_level_sets(trace, st, levels);
  const ScalarField u = solve_dirichlet_tv(trace, st, c.thresholds);

  bool nested = true;
  for (size_t j = 1; j < cuts.size(); j++)
    for (int i = 0; i < u.cells(); i++)
      if (cuts[j].bits()[i] && !cuts[j - 1].bits()[i]) nested = false;

  write_field_outputs(c, u);
  ordered_json meta;
  meta["levels"] = levels;
  meta["nesting_exact"] = nested;
  meta["range"] = {c.lo, c.hi};
  ordered_json sizes = ordered_json::array();
  for (const auto& cut : cuts) sizes.push_back(cut.count());
  meta["level_set_cells"] = sizes;
  atomic_write(c.output_prefix + "_meta.json", meta.dump(2) + "\n");
  if (c.dump_levels)
    for (size_t j = 0; j < cuts.size(); j++)
      write_pbm(c.output_prefix + "_level_" + std::to_string(j) + ".pbm", cuts[j]);
  return 0;
}

int cmd_levelset(const Config& c) {
  const ScalarField g = load_field(c, c.input);
  CurvatureProblem p;
  p.g = g;
  p.level = c.level;
  p.scale = c.scale;
  p.stencil = stencil_for(c, g.delta());
  if (!c.seeds_in.empty() || !c.seeds_out.empty()) {
    p.seeds.assign(g.cells(), Seed::Free);
    auto apply = [&](const std::string& path, Seed s) {
      if (path.empty()) return;
      const BinarySet bits = read_pbm(path, g.delta());
      if (bits.geom().width != g.width() || bits.geom().height != g.height())
        throw std::runtime_error(path + ": seed size does not match the field");
      for (int i = 0; i < g.cells(); i++) {
        if (!bits.bits()[i]) continue;
        if (p.seeds[i] != Seed::Free) throw std::runtime_error("conflicting seeds at cell " + std::to_string(i));
        p.seeds[i] = s;
      }
    };
    apply(c.seeds_in, Seed::ForcedIn);
    apply(c.seeds_out, Seed::ForcedOut);
  }
  p.validate();
  const CutResult r = solve_curvature(p);
  write_pbm(c.output_prefix + "_min.pbm", r.minimal);
  write_pbm(c.output_prefix + "_max.pbm", r.maximal);
  ordered_json meta;
  meta["energy"] = r.energy;
  meta["energy_int"] = r.energy_int;
  meta["quantum_per_unit"] = r.stats.quantum;
  meta["minimal_cells"] = r.minimal.count();
  meta["maximal_cells"] = r.maximal.count();
  meta["flow_value"] = r.stats.flow_value;
  meta["nodes"] = r.stats.nodes;
  meta["edges"] = r.stats.edges;
  if (c.timings) meta["phases"] = r.stats.phases;
  atomic_write(c.output_prefix + "_energy.json", meta.dump(2) + "\n");
  return 0;
}

int cmd_weights(const Config& c) {
  const Stencil s = stencil_for(c, c.delta);
  std::cout << "dx,dy,weight\n";
  char buf[64];
  for (const auto& arm : s.arms) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", arm.dx, arm.dy, arm.weight);
    std::cout << buf;
  }
  return 0;
}

int cmd_verify(const Config& c) {
  std::vector<verify::SuiteJob> jobs;
  if (c.manifest.empty()) {
    jobs = verify::default_manifest();
  } else {
    std::ifstream in(c.manifest);
    if (!in) throw std::runtime_error(c.manifest + ": cannot open manifest");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    jobs = verify::parse_manifest(text);
  }
  std::filesystem::create_directories(c.output_dir);
  const auto reports = verify::run_suite(jobs, c.tier, c.jobs, c.output_dir);
  atomic_write(c.output_dir + "/reports.jsonl", verify::reports_to_jsonl(reports));
  atomic_write(c.output_dir + "/summary.csv", verify::summary_csv(reports));
  std::cout << verify::summary_table(reports);
  for (const auto& r : reports)
    if (r.failed()) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anisotropic total variation: denoising, level sets and theorem checks"};
  app.require_subcommand(1);

  Config cfg;
  std::string config_path;
  bool dry_run = false;

  // flag presence is tracked so that flags win over the config file
  Config flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config; explicit flags take precedence");
    sub->add_flag("--dry-run", dry_run, "print the resolved configuration and exit");
    sub->add_option("--anisotropy", flags.anisotropy, "anisotropy descriptor (JSON)");
    sub->add_option("--order", flags.order, "stencil order: 4, 8 or 16");
    sub->add_option("--seed", flags.seed, "random seed (TVLEVEL_SEED overrides)");
    sub->add_option("--delta", flags.delta, "grid spacing for inputs without one");
    sub->add_option("--lo", flags.lo, "declared low end of the value range");
    sub->add_option("--hi", flags.hi, "declared high end of the value range");
    sub->add_option("--maxval", flags.maxval, "PGM maxval: 255 or 65535");
    sub->add_flag("--ascii", flags.ascii, "write P2 instead of P5");
    sub->add_flag("--timings", flags.timings, "include wall times in reports");
    sub->add_option("--output-prefix,-o", flags.output_prefix, "output path prefix");
    return sub;
  };

  auto* denoise = add_common(app.add_subcommand("denoise", "anisotropic ROF denoising"));
  denoise->add_option("--input,-i", flags.input, "input field (.pgm or .csv)");
  denoise->add_option("--mask", flags.mask, "mask PGM {0,128,255}");
  denoise->add_option("--regularizer", flags.regularizer, "pairwise or per_cell");
  denoise->add_option("--lambda", flags.lambda, "fidelity weight");
  denoise->add_option("--f", flags.f, "identity or huber");
  denoise->add_option("--epsilon", flags.epsilon, "huber smoothing parameter");
  denoise->add_option("--boundary", flags.boundary, "neumann or dirichlet");
  denoise->add_option("--tol", flags.tol, "relative duality-gap target");
  denoise->add_option("--max-iter", flags.max_iter, "iteration budget");

  auto* dirichlet = add_common(app.add_subcommand("dirichlet", "Dirichlet level-set solve"));
  dirichlet->add_option("--trace", flags.trace, "trace field (.pgm or .csv)");
  dirichlet->add_option("--input,-i", flags.input, "alias for --trace");
  dirichlet->add_option("--mask", flags.mask, "mask PGM with boundary cells");
  dirichlet->add_option("--levels", flags.thresholds, "explicit level thresholds");
  dirichlet->add_flag("--dump-levels", flags.dump_levels, "write one PBM per level");

  auto* levelset = add_common(app.add_subcommand("levelset", "one prescribed-curvature cut"));
  levelset->add_option("--input,-i", flags.input, "field g (.pgm or .csv)");
  levelset->add_option("--mask", flags.mask, "mask PGM {0,128,255}");
  levelset->add_option("--level,-t", flags.level, "threshold t");
  levelset->add_option("--scale", flags.scale, "volume term multiplier (1/lambda)");
  levelset->add_option("--seeds-in", flags.seeds_in, "PBM of forced-in cells");
  levelset->add_option("--seeds-out", flags.seeds_out, "PBM of forced-out cells");

  auto* weights = add_common(app.add_subcommand("weights", "print the Crofton stencil as CSV"));

  auto* verify_cmd = add_common(app.add_subcommand("verify", "run the verification suite"));
  verify_cmd->add_option("--manifest", flags.manifest, "manifest JSON (defaults to built-in)");
  verify_cmd->add_option("--tier", flags.tier, "fast, slow or all");
  verify_cmd->add_option("--jobs", flags.jobs, "parallel check jobs");
  verify_cmd->add_option("--output-dir", flags.output_dir, "report directory");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    // flags win over the config file
    auto take = [&](const char* name, auto member) {
      if (sub->count(name)) cfg.*member = flags.*member;
    };
    take("--anisotropy", &Config::anisotropy);
    take("--order", &Config::order);
    take("--seed", &Config::seed);
    take("--delta", &Config::delta);
    take("--lo", &Config::lo);
    take("--hi", &Config::hi);
    take("--maxval", &Config::maxval);
    take("--ascii", &Config::ascii);
    take("--timings", &Config::timings);
    take("--output-prefix", &Config::output_prefix);
    if (sub == denoise) {
      take("--input", &Config::input);
      take("--mask", &Config::mask);
      take("--regularizer", &Config::regularizer);
      take("--lambda", &Config::lambda);
      take("--f", &Config::f);
      take("--epsilon", &Config::epsilon);
      take("--boundary", &Config::boundary);
      take("--tol", &Config::tol);
      take("--max-iter", &Config::max_iter);
    } else if (sub == dirichlet) {
      take("--trace", &Config::trace);
      take("--input", &Config::input);
      take("--mask", &Config::mask);
      take("--levels", &Config::thresholds);
      take("--dump-levels", &Config::dump_levels);
    } else if (sub == levelset) {
      take("--input", &Config::input);
      take("--mask", &Config::mask);
      take("--level", &Config::level);
      take("--scale", &Config::scale);
      take("--seeds-in", &Config::seeds_in);
      take("--seeds-out", &Config::seeds_out);
    } else if (sub == verify_cmd) {
      take("--manifest", &Config::manifest);
      take("--tier", &Config::tier);
      take("--jobs", &Config::jobs);
      take("--output-dir", &Config::output_dir);
    }
    if (const char* env_seed = std::getenv("TVLEVEL_SEED")) cfg.seed = std::strtoull(env_seed, nullptr, 10);

    validate_config(cfg);
    if (dry_run) {
      std::cout << cfg.to_json().dump(2) << "\n";
      return 0;
    }
    if (sub == denoise) return cmd_denoise(cfg);
    if (sub == dirichlet) return cmd_dirichlet(cfg);
    if (sub == levelset) return cmd_levelset(cfg);
    if (sub == weights) return cmd_weights(cfg);
    if (sub == verify_cmd) return cmd_verify(cfg);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
