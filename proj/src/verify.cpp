#include "tvlevel/verify.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <thread>
#include <tuple>

#include "tvlevel/io.hpp"
#include "tvlevel/maxflow.hpp"

namespace tvlevel::verify {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr std::int64_t kCapLimit = std::int64_t(1) << 56;

std::int64_t quantize_int(double v, double quantum) {
  const double scaled = v * quantum;
  if (!(std::abs(scaled) < double(kCapLimit)))
    throw std::overflow_error("verify: capacity overflow");
  return std::llround(scaled);
}

}  // namespace

std::string CheckReport::to_json_line() const {
  ordered_json j;
  j["check"] = check;
  j["property"] = property;
  j["status"] = status;
  j["seed"] = seed;
  j["params"] = params.empty() ? ordered_json::object() : params;
  ordered_json m = ordered_json::object();
  for (const auto& [k, v] : metrics) m[k] = v;
  j["metrics"] = m;
  ordered_json t = ordered_json::object();
  for (const auto& [k, v] : tolerances) t[k] = v;
  j["tolerances"] = t;
  j["artifacts"] = artifacts;
  return j.dump();
}

// ---- fixtures ---------------------------------------------------------------

ScalarField smooth_field(int w, int h, double delta, std::uint64_t seed) {
  Rng rng(seed);
  struct Wave {
    double fx, fy, ph, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 5; k++)
    waves.push_back({rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5),
                     rng.uniform(0.0, 2 * std::numbers::pi), rng.uniform(0.3, 1.0)});
  ScalarField f(w, h, delta);
  const double scale = std::max(w, h);
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++) {
      double v = 0;
      for (const auto& wv : waves)
        v += wv.amp * std::cos(2 * std::numbers::pi * (wv.fx * x + wv.fy * y) / scale + wv.ph);
      f.at(x, y) = v;
    }
  auto [lo, hi] = f.range();
  for (int i = 0; i < f.cells(); i++) f[i] = hi > lo ? (f[i] - lo) / (hi - lo) : 0.5;
  return f;
}

ScalarField quantized_field(int w, int h, double delta, std::uint64_t seed, int n_levels) {
  ScalarField f = smooth_field(w, h, delta, seed);
  for (int i = 0; i < f.cells(); i++) {
    const int level = std::min(n_levels - 1, int(f[i] * n_levels));
    f[i] = double(level) / (n_levels - 1);
  }
  return f;
}

BinarySet random_set(int w, int h, double delta, std::uint64_t seed) {
  const ScalarField f = smooth_field(w, h, delta, seed);
  BinarySet e(f.geom());
  for (int i = 0; i < f.cells(); i++) e.bits()[i] = f[i] > 0.5;
  return e;
}

ScalarField step_field(int w, int h, double delta, double left, double right) {
  ScalarField f(w, h, delta);
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++) f.at(x, y) = x < w / 2 ? left : right;
  return f;
}

ScalarField checkerboard_field(int w, int h, double delta, int block, double a, double b) {
  ScalarField f(w, h, delta);
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++) f.at(x, y) = ((x / block + y / block) % 2 == 0) ? a : b;
  return f;
}

ScalarField ring_trace(int w, int h, double delta, const std::vector<double>& boundary_values) {
  ScalarField f(w, h, delta);
  std::vector<std::pair<int, int>> ring;
  for (int x = 0; x < w; x++) ring.emplace_back(x, 0);
  for (int y = 1; y < h; y++) ring.emplace_back(w - 1, y);
  for (int x = w - 2; x >= 0; x--) ring.emplace_back(x, h - 1);
  for (int y = h - 2; y >= 1; y--) ring.emplace_back(0, y);
  if (boundary_values.size() != ring.size())
    throw std::invalid_argument("ring_trace: need one value per ring cell");
  for (size_t k = 0; k < ring.size(); k++) {
    auto [x, y] = ring[k];
    f.set_kind(x, y, CellKind::Boundary);
    f.at(x, y) = boundary_values[k];
  }
  return f;
}

// ---- independent resummation -------------------------------------------------

double resum_pairwise_tv(const ScalarField& u, const Stencil& s) {
  // arm-major order on purpose: different accumulation path than the library
  const auto& g = u.geom();
  double total = 0.0;
  for (const auto& arm : s.arms) {
    double sub = 0.0;
    for (int y = g.height - 1; y >= 0; y--)
      for (int x = g.width - 1; x >= 0; x--) {
        if (!g.inside(x, y) || !g.inside(x + arm.dx, y + arm.dy)) continue;
        sub += std::abs(u.at(x + arm.dx, y + arm.dy) - u.at(x, y));
      }
    total += arm.weight * sub;
  }
  return total;
}

double resum_perimeter(const BinarySet& e, const Stencil& s) {
  const auto& g = e.geom();
  double total = 0.0;
  for (const auto& arm : s.arms) {
    long cuts = 0;
    for (int y = g.height - 1; y >= 0; y--)
      for (int x = g.width - 1; x >= 0; x--) {
        if (!g.inside(x, y) || !g.inside(x + arm.dx, y + arm.dy)) continue;
        cuts += e.contains(x, y) != e.contains(x + arm.dx, y + arm.dy) ? 1 : 0;
      }
    total += arm.weight * cuts;
  }
  return total;
}

double resum_rof_energy(const RofProblem& p, const ScalarField& u) {
  if (p.f != FKind::Identity || p.reg != Regularizer::Pairwise)
    throw std::invalid_argument("resum_rof_energy covers the pairwise identity form");
  const auto& g = p.g.geom();
  double fid = 0.0;
  for (int i = g.cells() - 1; i >= 0; i--) {
    if (g.mask[i] == CellKind::Outside) continue;
    if (p.boundary == BoundaryMode::Dirichlet && g.mask[i] == CellKind::Boundary) continue;
    fid += (u[i] - p.g[i]) * (u[i] - p.g[i]);
  }
  return resum_pairwise_tv(u, p.stencil) + g.delta * g.delta / p.lambda * fid / 2;
}

// ---- brute force -------------------------------------------------------------

namespace {

struct BruteSetup {
  std::vector<int> free_ids;          // cell index per free slot
  std::vector<int> slot_of;           // cell -> slot or -1
  std::vector<std::int64_t> vol;      // per-slot volume coefficient
  // per-slot incident pairs
  std::vector<std::vector<std::pair<int, std::int64_t>>> free_nbrs;  // (slot, w)
  std::vector<std::vector<std::pair<int, std::int64_t>>> fixed_nbrs; // (member, w)
  std::int64_t base = 0;  // energy of the empty free assignment
  BinarySet forced;
};

BruteSetup brute_setup(const CurvatureProblem& p, double quantum) {
  p.validate();
  const auto& g = p.g.geom();
  BruteSetup s;
  s.slot_of.assign(g.cells(), -1);
  s.forced = BinarySet(g);
  auto seed_at = [&](int i) { return p.seeds.empty() ? Seed::Free : p.seeds[i]; };
  for (int i = 0; i < g.cells(); i++) {
    if (g.mask[i] == CellKind::Outside) continue;
    if (seed_at(i) == Seed::Free) {
      s.slot_of[i] = int(s.free_ids.size());
      s.free_ids.push_back(i);
    } else if (seed_at(i) == Seed::ForcedIn) {
      s.forced.bits()[i] = 1;
    }
  }
  if (s.free_ids.size() > 18)
    throw std::invalid_argument("brute_force_curvature: more than 18 free cells");
  const int nf = int(s.free_ids.size());
  s.vol.resize(nf);
  s.free_nbrs.resize(nf);
  s.fixed_nbrs.resize(nf);
  const double cell_area = g.delta * g.delta;
  for (int k = 0; k < nf; k++)
    s.vol[k] = quantize_int(p.scale * cell_area * (p.level - p.g[s.free_ids[k]]), quantum);
  // forced-in volume
  for (int i = 0; i < g.cells(); i++)
    if (s.forced.bits()[i])
      s.base += quantize_int(p.scale * cell_area * (p.level - p.g[i]), quantum);
  // pairs
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      const int i = g.idx(x, y);
      for (const auto& arm : p.stencil.arms) {
        const int X = x + arm.dx, Y = y + arm.dy;
        if (!g.inside(X, Y)) continue;
        const int j = g.idx(X, Y);
        const std::int64_t w = quantize_int(arm.weight, quantum);
        const int si = s.slot_of[i], sj = s.slot_of[j];
        if (si >= 0 && sj >= 0) {
          s.free_nbrs[si].emplace_back(sj, w);
          s.free_nbrs[sj].emplace_back(si, w);
        } else if (si >= 0) {
          s.fixed_nbrs[si].emplace_back(s.forced.bits()[j] ? 1 : 0, w);
          if (s.forced.bits()[j]) s.base += w;  // cut while the free cell is out
        } else if (sj >= 0) {
          s.fixed_nbrs[sj].emplace_back(s.forced.bits()[i] ? 1 : 0, w);
          if (s.forced.bits()[i]) s.base += w;
        } else {
          if (s.forced.bits()[i] != s.forced.bits()[j]) s.base += w;
        }
      }
    }
  return s;
}

struct BruteSweep {
  std::int64_t best;
  std::uint32_t and_mask, or_mask;
};

// Gray-code sweep over all free assignments; returns the optimal energy and
// the intersection/union of the optimizer set family.
BruteSweep brute_sweep(const BruteSetup& s, const std::vector<std::int64_t>& vol) {
  const int nf = int(s.free_ids.size());
  std::vector<std::uint8_t> bits(nf, 0);
  std::int64_t cur = s.base;
  BruteSweep out{cur, 0, 0};
  std::uint32_t mask = 0;
  const std::uint32_t total = nf == 0 ? 1 : (1u << nf);
  for (std::uint32_t k = 1; k < total; k++) {
    const int b = std::countr_zero(k);
    bits[b] ^= 1;
    mask ^= (1u << b);
    cur += bits[b] ? vol[b] : -vol[b];
    for (const auto& [j, w] : s.free_nbrs[b]) cur += bits[j] == bits[b] ? -w : w;
    for (const auto& [m, w] : s.fixed_nbrs[b]) cur += int(bits[b]) == m ? -w : w;
    if (cur < out.best) {
      out.best = cur;
      out.and_mask = out.or_mask = mask;
    } else if (cur == out.best) {
      out.and_mask &= mask;
      out.or_mask |= mask;
    }
  }
  return out;
}

BinarySet assemble(const BruteSetup& s, std::uint32_t mask) {
  BinarySet e = s.forced;
  for (size_t k = 0; k < s.free_ids.size(); k++)
    if (mask & (1u << k)) e.bits()[s.free_ids[k]] = 1;
  return e;
}

}  // namespace

CutResult brute_force_curvature(const CurvatureProblem& p, double quantum) {
  const BruteSetup s = brute_setup(p, quantum);
  const BruteSweep sw = brute_sweep(s, s.vol);
  CutResult r;
  r.minimal = assemble(s, sw.and_mask);
  r.maximal = assemble(s, sw.or_mask);
  r.energy_int = sw.best;
  r.energy = real_energy(p, r.minimal);
  r.stats.quantum = quantum;
  r.stats.nodes = s.free_ids.size();
  return r;
}

ScalarField stacked_rof_oracle(const ScalarField& g, double lambda, const Stencil& s,
                               int n_levels, double quantum) {
  g.validate();
  if (n_levels < 1) throw std::invalid_argument("stacked_rof_oracle: n_levels must be positive");
  const auto [lo, hi] = g.range();
  ScalarField u(g.geom(), std::vector<double>(g.cells(), lo));
  if (hi == lo) return u;

  CurvatureProblem p;
  p.g = g;
  p.stencil = s;
  p.scale = 1.0 / lambda;
  const BruteSetup setup = brute_setup(p, quantum);
  const int nf = int(setup.free_ids.size());
  const double step = (hi - lo) / n_levels;
  const double cell_area = g.delta() * g.delta();
  std::vector<std::int64_t> vol(nf);
  for (int j = 0; j < n_levels; j++) {
    const double t = lo + (j + 0.5) * step;
    for (int k = 0; k < nf; k++)
      vol[k] = quantize_int((t - g[setup.free_ids[k]]) * cell_area / lambda, quantum);
    const BruteSweep sw = brute_sweep(setup, vol);
    for (int k = 0; k < nf; k++)
      if (sw.or_mask & (1u << k)) u[setup.free_ids[k]] += step;
  }
  for (int i = 0; i < g.cells(); i++)
    if (g.geom().mask[i] == CellKind::Outside) u[i] = 0.0;
  return u;
}

std::int64_t reference_maxflow(int n_nodes,
                               const std::vector<std::tuple<int, int, std::int64_t>>& edges) {
  const int n = n_nodes + 2, src = n_nodes, snk = n_nodes + 1;
  std::vector<std::vector<std::int64_t>> cap(n, std::vector<std::int64_t>(n, 0));
  for (const auto& [u, v, c] : edges) cap[u][v] += c;
  std::int64_t flow = 0;
  while (true) {
    std::vector<int> parent(n, -1);
    parent[src] = src;
    std::vector<int> queue{src};
    for (size_t qi = 0; qi < queue.size() && parent[snk] < 0; qi++) {
      const int v = queue[qi];
      for (int w = 0; w < n; w++)
        if (parent[w] < 0 && cap[v][w] > 0) {
          parent[w] = v;
          queue.push_back(w);
        }
    }
    if (parent[snk] < 0) break;
    std::int64_t aug = std::numeric_limits<std::int64_t>::max();
    for (int v = snk; v != src; v = parent[v]) aug = std::min(aug, cap[parent[v]][v]);
    for (int v = snk; v != src; v = parent[v]) {
      cap[parent[v]][v] -= aug;
      cap[v][parent[v]] += aug;
    }
    flow += aug;
  }
  return flow;
}

// ---- shared helpers ----------------------------------------------------------

namespace {

Stencil euclid_stencil(int order, double delta = 1.0) {
  return crofton_weights(Anisotropy::euclidean(), order, delta);
}

// max over cell pairs of |f(x) - f(y)| / polar(x - y); the polar distance is
// evaluated on physical offsets.
double max_pair_ratio(const ScalarField& f, const Anisotropy& a) {
  const auto& g = f.geom();
  const Anisotropy polar = a.polar();
  const int w = g.width, h = g.height;
  std::vector<double> dist(size_t(h) * (2 * w - 1), 0.0);
  for (int dy = 0; dy < h; dy++)
    for (int dx = -(w - 1); dx <= w - 1; dx++) {
      if (dy == 0 && dx <= 0) continue;
      dist[size_t(dy) * (2 * w - 1) + (dx + w - 1)] =
          polar.eval({dx * g.delta, dy * g.delta});
    }
  double best = 0.0;
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++) {
      if (!g.inside(x, y)) continue;
      const double v = f.at(x, y);
      for (int dy = 0; dy < h - y; dy++) {
        const int xlo = dy == 0 ? x + 1 : 0;
        for (int X = xlo; X < w; X++) {
          if (!g.inside(X, y + dy)) continue;
          const double d = dist[size_t(dy) * (2 * w - 1) + (X - x + w - 1)];
          if (d <= 0) continue;
          best = std::max(best, std::abs(f.at(X, y + dy) - v) / d);
        }
      }
    }
  return best;
}

// same ratio for a concave square-root modulus (diagnostic only)
double max_pair_ratio_sqrt(const ScalarField& f, const Anisotropy& a) {
  const auto& g = f.geom();
  const Anisotropy polar = a.polar();
  double best = 0.0;
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++)
      for (int dy = 0; dy < g.height - y; dy++)
        for (int X = dy == 0 ? x + 1 : 0; X < g.width; X++) {
          const double d = polar.eval({(X - x) * g.delta, dy * g.delta});
          if (d <= 0) continue;
          best = std::max(best, std::abs(f.at(X, y + dy) - f.at(x, y)) / std::sqrt(d));
        }
  return best;
}

std::string dump_field(const std::string& artifact_dir, const std::string& name,
                       const ScalarField& f) {
  if (artifact_dir.empty()) return {};
  const std::string path = artifact_dir + "/" + name + ".csv";
  auto [lo, hi] = f.range();
  write_csv(path, f, lo, hi == lo ? lo + 1 : hi);
  return path;
}

void fail_with_artifact(CheckReport& rep, const std::string& artifact_dir,
                        const std::string& name, const ScalarField& f) {
  rep.status = "fail";
  const std::string p = dump_field(artifact_dir, name, f);
  if (!p.empty()) rep.artifacts.push_back(p);
}

ScalarField cone_field(int w, int h, double delta, const Anisotropy& a, double cap_frac) {
  const Anisotropy polar = a.polar();
  ScalarField f(w, h, delta);
  const double cx = 0.37 * (w - 1) * delta, cy = 0.29 * (h - 1) * delta;
  double maxd = 0.0;
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++)
      maxd = std::max(maxd, polar.eval({x * delta - cx, y * delta - cy}));
  for (int y = 0; y < h; y++)
    for (int x = 0; x < w; x++)
      f.at(x, y) = std::min(polar.eval({x * delta - cx, y * delta - cy}), cap_frac * maxd);
  return f;
}

}  // namespace

// ---- checks ------------------------------------------------------------------

CheckReport check_anisotropy_identities(std::uint64_t seed, const json& params,
                                        const std::string&) {
  CheckReport rep;
  rep.check = "anisotropy_identities";
  rep.property = "norm duality identities: Euler, polar, inversion, finite differences, Hoelder";
  rep.seed = seed;
  const int samples = params.value("samples", 1000);
  const double tol_euler = params.value("tolerance_euler", 1e-9);
  const double tol_polar = params.value("tolerance_polar", 1e-9);
  const double tol_inv = params.value("tolerance_inversion", 1e-8);
  const double tol_fd = params.value("tolerance_fd", 1e-5);
  const double tol_holder = params.value("tolerance_holder", 1e-12);
  rep.params = ordered_json{{"samples", samples}};
  rep.tolerance("euler_rel", tol_euler);
  rep.tolerance("polar_identity", tol_polar);
  rep.tolerance("inversion_rel", tol_inv);
  rep.tolerance("fd_rel", tol_fd);
  rep.tolerance("holder_slack", tol_holder);

  const std::vector<Anisotropy> smooth_kinds = {
      Anisotropy::euclidean(), Anisotropy::weighted_l2({4, 0, 1}),
      Anisotropy::weighted_l2({2, 0.8, 1}), Anisotropy::lp(1.5), Anisotropy::lp(3.0)};
  const std::vector<Anisotropy> all_kinds = [&] {
    auto v = smooth_kinds;
    v.push_back(Anisotropy::l1());
    v.push_back(Anisotropy::linf());
    return v;
  }();

  Rng rng(seed);
  double w_euler = 0, w_polar = 0, w_inv = 0, w_fd = 0, w_holder = 0, w_dual = 0, w_tri = 0;
  auto sample = [&]() -> Vec2 {
    while (true) {
      Vec2 v{rng.uniform(-2, 2), rng.uniform(-2, 2)};
      if (norm2(v) > 1e-3) return v;
    }
  };
  for (const auto& a : smooth_kinds) {
    const Anisotropy polar = a.polar();
    for (int k = 0; k < samples; k++) {
      const Vec2 x = sample();
      const double phi = a.eval(x);
      const Vec2 gr = a.grad(x);
      w_euler = std::max(w_euler, std::abs(dot(gr, x) - phi) / phi);
      w_polar = std::max(w_polar, std::abs(polar.eval(gr) - 1.0));
      const Vec2 y = phi * gr;
      const Vec2 inv = polar.eval(y) * polar.grad(y);
      w_inv = std::max(w_inv, norm2(inv - x) / norm2(x));
      const double h = 1e-6;
      const Vec2 fd{(a.eval({x.x + h, x.y}) - a.eval({x.x - h, x.y})) / (2 * h),
                    (a.eval({x.x, x.y + h}) - a.eval({x.x, x.y - h})) / (2 * h)};
      w_fd = std::max(w_fd, norm2(fd - gr) / std::max(1.0, norm2(gr)));
      // 0-homogeneity of the gradient
      const Vec2 gs = a.grad(rng.uniform(0.5, 3.0) * x);
      w_fd = std::max(w_fd, norm2(gs - gr) / std::max(1.0, norm2(gr)));
    }
  }
  for (const auto& a : all_kinds) {
    const Anisotropy polar = a.polar();
    const Anisotropy dual2 = polar.polar();
    for (int k = 0; k < samples; k++) {
      const Vec2 x = sample();
      const Vec2 xi = sample();
      w_holder = std::max(w_holder, dot(x, xi) - a.eval(x) * polar.eval(xi));
      w_dual = std::max(w_dual, std::abs(dual2.eval(x) - a.eval(x)) / a.eval(x));
      const Vec2 y = sample();
      w_tri = std::max(w_tri, a.eval(x + y) - a.eval(x) - a.eval(y));
      if (a.eval({-x.x, -x.y}) != a.eval(x)) w_tri = std::max(w_tri, 1.0);
    }
  }
  rep.metric("worst_euler_rel", w_euler);
  rep.metric("worst_polar_identity", w_polar);
  rep.metric("worst_inversion_rel", w_inv);
  rep.metric("worst_fd_rel", w_fd);
  rep.metric("worst_holder_slack", w_holder);
  rep.metric("worst_polar_duality_rel", w_dual);
  rep.metric("worst_triangle_slack", w_tri);
  const bool ok = w_euler <= tol_euler && w_polar <= tol_polar && w_inv <= tol_inv &&
                  w_fd <= tol_fd && w_holder <= tol_holder && w_dual <= 1e-9 && w_tri <= 1e-12;
  rep.status = ok ? "pass" : "fail";
  return rep;
}

CheckReport check_discrete_calculus(std::uint64_t seed, const json& params,
                                    const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "discrete_calculus";
  rep.property = "gradient/divergence adjointness, exact coarea, perimeter submodularity";
  rep.seed = seed;
  const int instances = params.value("instances", 100);
  const double tol_adj = params.value("tolerance_adjoint", 1e-12);
  const double tol_coarea = params.value("tolerance_coarea", 1e-10);
  const double tol_sub = params.value("tolerance_submodularity", 1e-12);
  rep.params = ordered_json{{"instances", instances}};
  rep.tolerance("adjoint_rel", tol_adj);
  rep.tolerance("coarea_rel", tol_coarea);
  rep.tolerance("submodularity_slack", tol_sub);

  Rng rng(seed);
  const Stencil st = euclid_stencil(8);
  double w_adj = 0, w_coarea = 0, w_sub = 0;
  int violations = 0;

  for (int k = 0; k < instances; k++) {
    // adjointness on 16x16, every third instance with an outside block
    ScalarField u(16, 16, 1.0);
    VectorField p(u.geom());
    if (k % 3 == 2) {
      const int bx = rng.below(10), by = rng.below(10);
      for (int y = by; y < by + 5; y++)
        for (int x = bx; x < bx + 5; x++) u.set_kind(x, y, CellKind::Outside);
    }
    for (int i = 0; i < u.cells(); i++) {
      u[i] = rng.uniform(-1, 1);
      p.dx[i] = rng.uniform(-1, 1);
      p.dy[i] = rng.uniform(-1, 1);
    }
    p.geom = u.geom();
    const VectorField gu = forward_gradient(u);
    const ScalarField dp = divergence(p);
    double lhs = 0, rhs = 0;
    for (int i = 0; i < u.cells(); i++) {
      lhs += gu.dx[i] * p.dx[i] + gu.dy[i] * p.dy[i];
      rhs += u[i] * dp[i];
    }
    w_adj = std::max(w_adj, std::abs(lhs + rhs) / std::max(1.0, std::abs(lhs)));

    // exact coarea on quantized fields
    const int w = 6 + rng.below(7), h = 6 + rng.below(7);
    const ScalarField q = quantized_field(w, h, 1.0, rng.next(), 3 + rng.below(6));
    const double tv = pairwise_tv(q, st);
    std::set<double> vals(q.values().begin(), q.values().end());
    std::vector<double> sorted(vals.begin(), vals.end());
    double stacked = 0.0;
    for (size_t j = 0; j + 1 < sorted.size(); j++) {
      BinarySet e(q.geom());
      for (int i = 0; i < q.cells(); i++) e.bits()[i] = q[i] > sorted[j];
      stacked += (sorted[j + 1] - sorted[j]) * pairwise_perimeter(e, st);
    }
    const double rel = std::abs(tv - stacked) / std::max(1.0, tv);
    if (rel > w_coarea) w_coarea = rel;
    if (rel > tol_coarea) fail_with_artifact(rep, artifact_dir, "coarea_" + std::to_string(k), q);

    // submodularity
    const BinarySet A = random_set(12, 12, 1.0, rng.next());
    const BinarySet B = random_set(12, 12, 1.0, rng.next());
    BinarySet I(A.geom()), U(A.geom());
    for (int i = 0; i < 12 * 12; i++) {
      I.bits()[i] = A.bits()[i] && B.bits()[i];
      U.bits()[i] = A.bits()[i] || B.bits()[i];
    }
    const double slack = pairwise_perimeter(I, st) + pairwise_perimeter(U, st) -
                         pairwise_perimeter(A, st) - pairwise_perimeter(B, st);
    w_sub = std::max(w_sub, slack);
    if (slack > tol_sub) violations++;
  }
  rep.metric("worst_adjoint_rel", w_adj);
  rep.metric("worst_coarea_rel", w_coarea);
  rep.metric("worst_submodularity_slack", w_sub);
  rep.metric("submodularity_violations", violations);
  if (rep.status != "fail")
    rep.status =
        (w_adj <= tol_adj && w_coarea <= tol_coarea && violations == 0) ? "pass" : "fail";
  return rep;
}

CheckReport check_maxflow_reference(std::uint64_t seed, const json& params, const std::string&) {
  CheckReport rep;
  rep.check = "maxflow_reference";
  rep.property = "max-flow equals an independent augmenting-path reference; extreme cuts are consistent";
  rep.seed = seed;
  const int instances = params.value("instances", 50);
  rep.params = ordered_json{{"instances", instances}};
  Rng rng(seed);
  int mismatches = 0, cut_errors = 0;

  for (int k = 0; k < instances + 2; k++) {
    int n;
    std::vector<std::tuple<int, int, std::int64_t>> edges;
    if (k == 0) {
      n = 0;
      edges = {{0 + 0, 1, 0}};  // replaced below: direct source->sink unit edge
      edges.clear();
      n = 1;
      edges.emplace_back(1, 0, 1);  // source -> node
      edges.emplace_back(0, 2, 1);  // node -> sink
    } else if (k == 1) {
      n = 2;  // disconnected
      edges.emplace_back(2, 0, 5);
      edges.emplace_back(1, 3, 7);
    } else {
      n = 2 + rng.below(11);
      for (int a = 0; a < n; a++)
        for (int b = 0; b < n; b++)
          if (a != b && rng.uniform() < 0.35) edges.emplace_back(a, b, rng.below(1000));
      for (int a = 0; a < n; a++) {
        if (rng.uniform() < 0.8) edges.emplace_back(n, a, rng.below(500));
        if (rng.uniform() < 0.8) edges.emplace_back(a, n + 1, rng.below(500));
      }
    }
    MaxflowGraph graph(n);
    for (const auto& [a, b, c] : edges) {
      if (a == n)
        graph.add_terminal(b, c, 0);
      else if (b == n + 1)
        graph.add_terminal(a, 0, c);
      else
        graph.add_edge(a, b, c);
    }
    const std::int64_t got = graph.solve();
    const std::int64_t want = reference_maxflow(n, edges);
    if (got != want) mismatches++;
    // cut consistency: minimal inside maximal, and both cuts pay exactly the flow
    const auto mn = graph.min_cut_source_side();
    const auto mx = graph.max_cut_source_side();
    auto cut_value = [&](const std::vector<std::uint8_t>& side) {
      std::int64_t v = 0;
      for (const auto& [a, b, c] : edges) {
        const bool sa = a == n ? true : (a == n + 1 ? false : side[a] != 0);
        const bool sb = b == n ? true : (b == n + 1 ? false : side[b] != 0);
        if (sa && !sb) v += c;
      }
      return v;
    };
    for (int i = 0; i < n; i++)
      if (mn[i] && !mx[i]) cut_errors++;
    if (cut_value(mn) != want || cut_value(mx) != want) cut_errors++;
  }
  rep.metric("flow_mismatches", mismatches);
  rep.metric("cut_errors", cut_errors);
  rep.status = (mismatches == 0 && cut_errors == 0) ? "pass" : "fail";
  return rep;
}

CheckReport check_curvature_exactness(std::uint64_t seed, const json& params,
                                      const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "curvature_exactness";
  rep.property = "graph-cut minimizers match exhaustive enumeration exactly";
  rep.seed = seed;
  const int instances = params.value("instances", 50);
  rep.params = ordered_json{{"instances", instances}, {"size", 4}};
  Rng rng(seed);
  int energy_mismatches = 0, set_mismatches = 0, certificate_errors = 0;

  const Stencil st4 = euclid_stencil(4), st8 = euclid_stencil(8);
  for (int k = 0; k < instances; k++) {
    CurvatureProblem p;
    p.g = ScalarField(4, 4, 1.0);
    for (int i = 0; i < 16; i++) p.g[i] = rng.uniform(0, 1);
    p.level = rng.uniform(0.2, 0.8);
    p.scale = (k % 2 == 0) ? 1.0 : 4.0;
    p.stencil = (k % 2 == 0) ? st4 : st8;
    const CutResult exact = brute_force_curvature(p);
    const CutResult cut = solve_curvature(p);
    if (exact.energy_int != cut.energy_int) energy_mismatches++;
    if (!(exact.minimal == cut.minimal) || !(exact.maximal == cut.maximal)) {
      set_mismatches++;
      fail_with_artifact(rep, artifact_dir, "curvature_" + std::to_string(k), p.g);
    }
    // energy certificate: both extreme cuts resum to the reported optimum
    if (quantized_energy(p, cut.minimal) != cut.energy_int ||
        quantized_energy(p, cut.maximal) != cut.energy_int)
      certificate_errors++;
  }
  rep.metric("energy_mismatches", energy_mismatches);
  rep.metric("set_mismatches", set_mismatches);
  rep.metric("certificate_errors", certificate_errors);
  if (rep.status != "fail")
    rep.status = (energy_mismatches == 0 && set_mismatches == 0 && certificate_errors == 0)
                     ? "pass"
                     : "fail";
  else
    rep.status = "fail";
  return rep;
}

CheckReport check_stacked_oracle(std::uint64_t seed, const json& params,
                                 const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "stacked_oracle";
  rep.property = "stacked maximal level-set minimizers reconstruct the variational minimizer";
  rep.seed = seed;
  const int instances = params.value("instances", 10);
  const int n_levels = params.value("levels", 256);
  const double extra = params.value("tolerance", 1e-4);
  rep.params = ordered_json{{"instances", instances}, {"levels", n_levels}};
  rep.tolerance("sup_error_beyond_quantization", extra);
  Rng rng(seed);
  double worst_excess = 0.0;

  const Stencil st4 = euclid_stencil(4), st8 = euclid_stencil(8);
  for (int k = 0; k < instances; k++) {
    RofProblem p;
    if (k == 0) {
      // two-pixel shrinkage fixture with a known closed form
      p.g = ScalarField(2, 1, 1.0);
      p.g[0] = 0.0;
      p.g[1] = 0.9;
      p.lambda = 0.15;
      p.stencil = st4;
    } else {
      const int w = 2 + rng.below(3), h = 2 + rng.below(3);
      p.g = smooth_field(w, h, 1.0, rng.next());
      p.lambda = std::vector<double>{0.5, 1.0, 2.0}[k % 3];
      p.stencil = (k % 2 == 0) ? st8 : st4;
    }
    const auto [lo, hi] = p.g.range();
    const double range = hi - lo;
    const ScalarField oracle = stacked_rof_oracle(p.g, p.lambda, p.stencil, n_levels);
    const auto [u, sr] = solve(p, 1e-10, 400000);
    double diff = 0.0;
    for (int i = 0; i < u.cells(); i++) diff = std::max(diff, std::abs(u[i] - oracle[i]));
    const double bound = range / n_levels + extra;
    worst_excess = std::max(worst_excess, diff - range / n_levels);
    if (diff > bound) fail_with_artifact(rep, artifact_dir, "stacked_" + std::to_string(k), p.g);
    if (k == 0) {
      // closed form: u = (m -/+ d/2) with d = max(a - 2 w lambda, 0)
      const double a = 0.9, w = p.stencil.arms[0].weight;
      const double d = std::max(a - 2 * w * p.lambda, 0.0);
      const double want0 = a / 2 - d / 2, want1 = a / 2 + d / 2;
      if (std::abs(u[0] - want0) > 1e-7 || std::abs(u[1] - want1) > 1e-7)
        rep.status = "fail";
      rep.metric("two_pixel_closed_form_err",
                 std::max(std::abs(u[0] - want0), std::abs(u[1] - want1)));
    }
  }
  rep.metric("worst_sup_error_minus_quantization", worst_excess);
  if (rep.status != "fail") rep.status = worst_excess <= extra ? "pass" : "fail";
  return rep;
}

CheckReport check_levelset_equivalence(std::uint64_t seed, const json& params,
                                       const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "levelset_equivalence";
  rep.property =
      "level sets of the variational minimizer solve the prescribed-curvature problem (sandwich form)";
  rep.seed = seed;
  const int instances = params.value("instances", 20);
  const int size = params.value("size", 16);
  const double gap_tol = params.value("gap_tol", 1e-9);
  const double eta = params.value("eta", 10.0 * std::sqrt(gap_tol));
  rep.params = ordered_json{{"instances", instances}, {"size", size}, {"gap_tol", gap_tol}};
  rep.tolerance("eta", eta);

  Rng rng(seed);
  const Stencil st = euclid_stencil(8);
  int upper_violations = 0, lower_violations = 0, solver_failures = 0;

  auto sandwich = [&](const ScalarField& u, const ScalarField& g, double lambda, double t,
                      int& up, int& low) {
    CurvatureProblem cp;
    cp.g = g;
    cp.level = t;
    cp.stencil = st;
    cp.scale = 1.0 / lambda;
    const CutResult cut = solve_curvature(cp);
    for (int i = 0; i < u.cells(); i++) {
      if (u[i] > t + eta && !cut.maximal.bits()[i]) up++;
      if (u[i] < t - eta && cut.minimal.bits()[i]) low++;
    }
  };

  for (int k = 0; k < instances; k++) {
    RofProblem p;
    p.g = smooth_field(size, size, 1.0, rng.next());
    p.lambda = (k % 2 == 0) ? 0.25 : 1.0;
    p.stencil = st;
    const auto [u, sr] = solve(p, std::min(gap_tol * 1e-2, 1e-10), 600000);
    if (!sr.converged || sr.gap_rel > gap_tol) solver_failures++;
    int up = 0, low = 0;
    for (int d = 1; d <= 9; d++) sandwich(u, p.g, p.lambda, d / 10.0, up, low);
    // a level above the data range: both sides empty
    sandwich(u, p.g, p.lambda, 2.0, up, low);
    if (up + low > 0) fail_with_artifact(rep, artifact_dir, "levelset_" + std::to_string(k), p.g);
    upper_violations += up;
    lower_violations += low;
  }
  // crisp two-level instance: exact match with eta = 0
  {
    RofProblem p;
    p.g = step_field(8, 8, 1.0, 0.0, 1.0);
    p.lambda = 0.5;
    p.stencil = st;
    const auto [u, sr] = solve(p, 1e-11, 600000);
    CurvatureProblem cp;
    cp.g = p.g;
    cp.level = 0.5;
    cp.stencil = st;
    cp.scale = 1.0 / p.lambda;
    const CutResult cut = solve_curvature(cp);
    int mism = 0;
    for (int i = 0; i < u.cells(); i++) {
      const bool in = u[i] > 0.5;
      if (in != (cut.maximal.bits()[i] != 0)) mism++;
      if (in != (cut.minimal.bits()[i] != 0)) mism++;
    }
    rep.metric("crisp_step_mismatches", mism);
    if (mism > 0) rep.status = "fail";
  }
  rep.metric("upper_violations", upper_violations);
  rep.metric("lower_violations", lower_violations);
  rep.metric("solver_failures", solver_failures);
  if (rep.status != "fail")
    rep.status =
        (upper_violations == 0 && lower_violations == 0 && solver_failures == 0) ? "pass" : "fail";
  return rep;
}

CheckReport check_comparison_suite(std::uint64_t seed, const json& params,
                                   const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "comparison_contraction";
  rep.property = "ordered data give ordered minimizers; sup-norm contraction; translation bound";
  rep.seed = seed;
  const int pairs = params.value("pairs", 50);
  const double tol_order = params.value("tolerance", 1e-6);
  const double tol_shift = params.value("tolerance_shift", 1e-7);
  const double tol_translate = params.value("tolerance_translation", 1e-4);
  rep.params = ordered_json{{"pairs", pairs}, {"size", 8}};
  rep.tolerance("pointwise_order", tol_order);
  rep.tolerance("contraction", tol_order);
  rep.tolerance("shift_equivariance", tol_shift);
  rep.tolerance("translation_bound", tol_translate);

  Rng rng(seed);
  const Stencil st = euclid_stencil(8);
  double w_order = -1e300, w_contract = -1e300, w_shift = 0, w_translate = -1e300, w_mean = 0;

  for (int k = 0; k < pairs; k++) {
    RofProblem pg;
    pg.g = smooth_field(8, 8, 1.0, rng.next());
    pg.lambda = 1.0;
    pg.stencil = st;
    RofProblem ph = pg;
    const ScalarField bump = smooth_field(8, 8, 1.0, rng.next());
    for (int i = 0; i < 64; i++) ph.g[i] = pg.g[i] + 0.4 * bump[i] * bump[i];
    const auto [ug, rg] = solve(pg, 1e-12, 400000);
    const auto [uh, rh] = solve(ph, 1e-12, 400000);
    double sup_gh = 0;
    for (int i = 0; i < 64; i++) {
      w_order = std::max(w_order, ug[i] - uh[i]);
      sup_gh = std::max(sup_gh, std::abs(ph.g[i] - pg.g[i]));
    }
    double sup_u = 0;
    for (int i = 0; i < 64; i++) sup_u = std::max(sup_u, std::abs(ug[i] - uh[i]));
    w_contract = std::max(w_contract, sup_u - sup_gh);
    double mean = 0;
    for (int i = 0; i < 64; i++) mean += ug[i] - pg.g[i];
    w_mean = std::max(w_mean, std::abs(mean));
    if (w_order > tol_order)
      fail_with_artifact(rep, artifact_dir, "comparison_" + std::to_string(k), pg.g);

    if (k < 5) {
      // shift equivariance
      RofProblem pc = pg;
      const double c = 0.37;
      for (int i = 0; i < 64; i++) pc.g[i] = pg.g[i] + c;
      const auto [uc, rc] = solve(pc, 1e-12, 400000);
      for (int i = 0; i < 64; i++) w_shift = std::max(w_shift, std::abs(uc[i] - (ug[i] + c)));
    }
    if (k < 10) {
      // translation argument: u(.+z) - u <= K_g * polar(z) + tol
      const double kg = max_pair_ratio(pg.g, Anisotropy::euclidean());
      for (auto [zx, zy] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {1, 1}, {2, 1}}) {
        const double bound = kg * std::hypot(double(zx), double(zy));
        for (int y = 0; y + zy < 8; y++)
          for (int x = 0; x + zx < 8; x++)
            w_translate =
                std::max(w_translate, ug.at(x + zx, y + zy) - ug.at(x, y) - bound);
      }
    }
  }

  // ordered Dirichlet traces: stacked solutions ordered exactly
  int dirichlet_violations = 0;
  for (int k = 0; k < 10; k++) {
    const int w = 10, h = 10, ring = 2 * w + 2 * h - 4;
    std::vector<double> tg(ring, 0.0), th(ring, 0.0);
    for (int i = 0; i < ring; i++) {
      tg[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
      th[i] = tg[i] > 0.5 || rng.uniform() < 0.3 ? 1.0 : 0.0;
    }
    tg[0] = 0.0;
    th[1] = 1.0;
    const ScalarField ftg = ring_trace(w, h, 1.0, tg);
    const ScalarField fth = ring_trace(w, h, 1.0, th);
    const ScalarField ug = solve_dirichlet_tv(ftg, st, {0.5});
    const ScalarField uh = solve_dirichlet_tv(fth, st, {0.5});
    for (int i = 0; i < w * h; i++)
      if (ug[i] > uh[i]) dirichlet_violations++;
  }

  rep.metric("worst_order_violation", w_order);
  rep.metric("worst_contraction_excess", w_contract);
  rep.metric("worst_shift_error", w_shift);
  rep.metric("worst_translation_slack", w_translate);
  rep.metric("worst_neumann_mean_residual", w_mean);
  rep.metric("dirichlet_order_violations", dirichlet_violations);
  if (rep.status != "fail")
    rep.status = (w_order <= tol_order && w_contract <= tol_order && w_shift <= tol_shift &&
                  w_translate <= tol_translate && w_mean <= 1e-6 * 64 &&
                  dirichlet_violations == 0)
                     ? "pass"
                     : "fail";
  return rep;
}

CheckReport check_modulus(std::uint64_t seed, const json& params,
                          const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "modulus_preservation";
  rep.property = "minimization preserves the Lipschitz modulus measured in the polar distance";
  rep.seed = seed;
  const double tol_modulus = params.value("tolerance", 1e-2);
  const int base_size = params.value("size", 32);
  const double lambda = params.value("lambda", 0.1);
  const bool report_only = params.value("report_only", false);
  rep.params = ordered_json{{"size", base_size}, {"lambda", lambda}};
  rep.tolerance("modulus_ratio_excess", tol_modulus);

  struct Case {
    const char* aniso_name;
    Anisotropy aniso;
    const char* fixture;
  };
  const std::vector<Case> cases = {
      {"euclidean", Anisotropy::euclidean(), "affine"},
      {"euclidean", Anisotropy::euclidean(), "cone"},
      {"weighted_l2", Anisotropy::weighted_l2({4, 0, 1}), "affine"},
      {"weighted_l2", Anisotropy::weighted_l2({4, 0, 1}), "cone"},
  };
  bool ok = true;
  for (const auto& c : cases) {
    double prev_ratio = 0.0;
    for (const int size : {base_size, 2 * base_size}) {
      const double delta = 1.0 / size;
      ScalarField gfield(size, size, delta);
      if (std::string(c.fixture) == "affine") {
        for (int y = 0; y < size; y++)
          for (int x = 0; x < size; x++) gfield.at(x, y) = 0.8 * x * delta - 0.5 * y * delta;
      } else {
        gfield = cone_field(size, size, delta, c.aniso, 0.6);
      }
      RofProblem p;
      p.g = gfield;
      p.lambda = lambda;
      p.reg = Regularizer::PerCell;
      p.aniso = c.aniso;
      const auto [u, sr] = solve(p, 1e-10, 400000);
      const double kg = max_pair_ratio(gfield, c.aniso);
      const double ku = max_pair_ratio(u, c.aniso);
      const double ratio = ku / kg;
      rep.metric(std::string(c.aniso_name) + "_" + c.fixture + "_ratio_" + std::to_string(size),
                 ratio);
      if (size == base_size) {
        prev_ratio = ratio;
        if (ratio > 1.0 + tol_modulus) {
          ok = false;
          fail_with_artifact(rep, artifact_dir,
                             std::string("modulus_") + c.aniso_name + "_" + c.fixture, gfield);
        }
      } else if (ratio > prev_ratio + 1e-9) {
        ok = false;
      }
      // pairwise form of the same instance, reported for comparison
      if (size == base_size) {
        RofProblem q;
        q.g = gfield;
        q.lambda = lambda;
        q.stencil = crofton_weights(c.aniso, 16, delta);
        const auto [up, srp] = solve(q, 1e-10, 400000);
        rep.metric(std::string(c.aniso_name) + "_" + c.fixture + "_pairwise_ratio",
                   max_pair_ratio(up, c.aniso) / kg);
        rep.metric(std::string(c.aniso_name) + "_" + c.fixture + "_sqrt_modulus_ratio",
                   max_pair_ratio_sqrt(u, c.aniso) / std::max(1e-12, max_pair_ratio_sqrt(gfield, c.aniso)));
      }
    }
  }
  rep.status = report_only ? "report-only" : (ok && rep.status != "fail" ? "pass" : "fail");
  return rep;
}

CheckReport check_jump_inclusion(std::uint64_t seed, const json& params,
                                 const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "jump_inclusion";
  rep.property = "jumps of the minimizer only occur near jumps of the data";
  rep.seed = seed;
  const double theta = params.value("theta", 0.05);
  const int radius = params.value("radius", 1);
  rep.params = ordered_json{{"theta", theta}, {"radius", radius}};
  rep.tolerance("theta", theta);

  const Stencil st = euclid_stencil(8);
  struct Fixture {
    const char* name;
    ScalarField g;
    double lambda;
  };
  const std::vector<Fixture> fixtures = {
      {"constant", ScalarField(16, 16, 1.0, 0.7), 1.0},
      {"step", step_field(16, 16, 1.0, 0.0, 1.0), 0.1},
      {"checkerboard", checkerboard_field(16, 16, 1.0, 4, 0.0, 1.0), 0.1},
  };

  int total_violations = 0;
  for (const auto& fx : fixtures) {
    RofProblem p;
    p.g = fx.g;
    p.lambda = fx.lambda;
    p.stencil = st;
    const auto [u, sr] = solve(p, 1e-10, 400000);
    const auto [lo, hi] = fx.g.range();
    const double osc = hi - lo;

    struct Pair {
      int x1, y1, x2, y2;
    };
    std::vector<Pair> gjumps, ujumps;
    for (int y = 0; y < 16; y++)
      for (int x = 0; x < 16; x++)
        for (const auto& arm : st.arms) {
          const int X = x + arm.dx, Y = y + arm.dy;
          if (X < 0 || Y < 0 || X >= 16 || Y >= 16) continue;
          if (std::abs(fx.g.at(X, Y) - fx.g.at(x, y)) > 1e-12) gjumps.push_back({x, y, X, Y});
          if (osc > 0 && std::abs(u.at(X, Y) - u.at(x, y)) > theta * osc)
            ujumps.push_back({x, y, X, Y});
          if (osc == 0 && std::abs(u.at(X, Y) - u.at(x, y)) > 1e-12)
            ujumps.push_back({x, y, X, Y});
        }
    int violations = 0;
    for (const auto& uj : ujumps) {
      bool near = false;
      for (const auto& gj : gjumps) {
        const int d1 = std::max(std::abs(uj.x1 - gj.x1), std::abs(uj.y1 - gj.y1));
        const int d2 = std::max(std::abs(uj.x2 - gj.x2), std::abs(uj.y2 - gj.y2));
        const int d1s = std::max(std::abs(uj.x1 - gj.x2), std::abs(uj.y1 - gj.y2));
        const int d2s = std::max(std::abs(uj.x2 - gj.x1), std::abs(uj.y2 - gj.y1));
        if (std::max(d1, d2) <= radius || std::max(d1s, d2s) <= radius) {
          near = true;
          break;
        }
      }
      if (!near) violations++;
    }
    rep.metric(std::string(fx.name) + "_u_jump_pairs", double(ujumps.size()));
    rep.metric(std::string(fx.name) + "_violations", violations);
    if (violations > 0) fail_with_artifact(rep, artifact_dir, std::string("jump_") + fx.name, fx.g);
    total_violations += violations;
  }
  if (rep.status != "fail") rep.status = total_violations == 0 ? "pass" : "fail";
  return rep;
}

CheckReport check_dirichlet_solver(std::uint64_t seed, const json& params,
                                   const std::string& artifact_dir) {
  CheckReport rep;
  rep.check = "dirichlet_solver";
  rep.property = "Dirichlet level stacking: exact nesting, trace reproduction, Lipschitz control";
  rep.seed = seed;
  const double lip_bound = params.value("lipschitz_bound", 1.1);
  rep.params = ordered_json::object();
  rep.tolerance("affine_lipschitz_ratio", lip_bound);
  Rng rng(seed);
  const Stencil st = euclid_stencil(8);
  bool ok = true;

  // constant trace -> constant output, exactly
  {
    const int w = 8, h = 8, ring = 2 * w + 2 * h - 4;
    const ScalarField trace = ring_trace(w, h, 1.0, std::vector<double>(ring, 0.37));
    const ScalarField u = solve_dirichlet_tv(trace, st);
    int off = 0;
    for (int i = 0; i < w * h; i++)
      if (u[i] != 0.37) off++;
    rep.metric("constant_trace_mismatches", off);
    if (off > 0) ok = false;
  }

  // half/half trace: monotone profile; single level set equals the seeded cut,
  // and matches brute force on a grid small enough to enumerate
  {
    const int w = 6, h = 6;
    ScalarField trace(w, h, 1.0);
    for (int y = 0; y < h; y++)
      for (int x = 0; x < w; x++)
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
          trace.set_kind(x, y, CellKind::Boundary);
          trace.at(x, y) = x < w / 2 ? 0.0 : 1.0;
        }
    const ScalarField u = solve_dirichlet_tv(trace, st);
    CurvatureProblem cp;
    cp.g = trace;
    cp.level = 0.5;
    cp.stencil = st;
    cp.scale = 0.0;
    cp.seeds.assign(w * h, Seed::Free);
    for (int i = 0; i < w * h; i++)
      if (trace.geom().mask[i] == CellKind::Boundary)
        cp.seeds[i] = trace[i] > 0.5 ? Seed::ForcedIn : Seed::ForcedOut;
    const CutResult exact = brute_force_curvature(cp);
    const CutResult cut = solve_curvature(cp);
    int mism = (exact.maximal == cut.maximal && exact.minimal == cut.minimal) ? 0 : 1;
    for (int i = 0; i < w * h; i++)
      if ((u[i] > 0.5) != (cut.maximal.bits()[i] != 0)) mism++;
    int monotone_bad = 0;
    for (int y = 0; y < h; y++)
      for (int x = 0; x + 1 < w; x++)
        if (u.at(x + 1, y) < u.at(x, y)) monotone_bad++;
    rep.metric("half_trace_mismatches", mism);
    rep.metric("half_trace_monotone_violations", monotone_bad);
    if (mism + monotone_bad > 0) {
      ok = false;
      fail_with_artifact(rep, artifact_dir, "dirichlet_half", trace);
    }
  }

  // affine trace: exact nesting, level sets match the cuts, Lipschitz ratio
  {
    const int n = 12;
    ScalarField trace(n, n, 1.0);
    ScalarField affine(n, n, 1.0);
    for (int y = 0; y < n; y++)
      for (int x = 0; x < n; x++) {
        affine.at(x, y) = double(x);
        if (x == 0 || y == 0 || x == n - 1 || y == n - 1) {
          trace.set_kind(x, y, CellKind::Boundary);
          trace.at(x, y) = double(x);
        }
      }
    const auto levels = default_dirichlet_levels(trace);
    const auto cuts = dirichlet_level_sets(trace, st, levels);
    int nesting_bad = 0;
    for (size_t j = 1; j < cuts.size(); j++)
      for (int i = 0; i < n * n; i++)
        if (cuts[j].bits()[i] && !cuts[j - 1].bits()[i]) nesting_bad++;
    const ScalarField u = solve_dirichlet_tv(trace, st);
    int levelset_mismatch = 0;
    for (size_t j = 0; j < levels.size(); j++)
      for (int i = 0; i < n * n; i++)
        if ((u[i] > levels[j]) != (cuts[j].bits()[i] != 0)) levelset_mismatch++;
    const double ratio =
        max_pair_ratio(u, Anisotropy::euclidean()) / max_pair_ratio(affine, Anisotropy::euclidean());
    rep.metric("affine_nesting_violations", nesting_bad);
    rep.metric("affine_levelset_mismatches", levelset_mismatch);
    rep.metric("affine_lipschitz_ratio", ratio);
    if (nesting_bad + levelset_mismatch > 0 || ratio > lip_bound) {
      ok = false;
      fail_with_artifact(rep, artifact_dir, "dirichlet_affine", trace);
    }
  }

  // random traces: nesting and the level-set sandwich stay exact
  for (int k = 0; k < 5; k++) {
    const int w = 10, h = 10, ring = 2 * w + 2 * h - 4;
    std::vector<double> tv(ring);
    for (int i = 0; i < ring; i++) tv[i] = std::round(rng.uniform(0, 4)) / 4.0;
    const ScalarField trace = ring_trace(w, h, 1.0, tv);
    const auto levels = default_dirichlet_levels(trace);
    if (levels.empty()) continue;
    const auto cuts = dirichlet_level_sets(trace, st, levels);
    const ScalarField u = solve_dirichlet_tv(trace, st);
    for (size_t j = 0; j < levels.size(); j++) {
      for (int i = 0; i < w * h; i++) {
        if (j > 0 && cuts[j].bits()[i] && !cuts[j - 1].bits()[i]) ok = false;
        if ((u[i] > levels[j]) != (cuts[j].bits()[i] != 0)) ok = false;
      }
    }
  }

  if (rep.status != "fail") rep.status = ok ? "pass" : "fail";
  else rep.status = "fail";
  return rep;
}

CheckReport check_crofton_halfspace(std::uint64_t seed, const json& params, const std::string&) {
  CheckReport rep;
  rep.check = "crofton_halfspace";
  rep.property = "pairwise cut energy reproduces the anisotropic perimeter of digitized half-planes";
  rep.seed = seed;
  const int grid = params.value("grid", 256);
  const int normals = params.value("normals", 32);
  const double tol16 = params.value("tolerance", 0.05);
  const double tol8 = params.value("tolerance_order8", 0.09);
  rep.params = ordered_json{{"grid", grid}, {"normals", normals}};
  rep.tolerance("order16_rel_error", tol16);
  rep.tolerance("order8_diag_rel_error", tol8);

  auto measure = [&](const Stencil& st, double ang, int N) {
    const Vec2 nu{std::cos(ang), std::sin(ang)};
    const double cx = (N - 1) / 2.0, cy = (N - 1) / 2.0;
    GridGeometry g(N, N, 1.0);
    BinarySet e(g);
    for (int y = 0; y < N; y++)
      for (int x = 0; x < N; x++) e.bits()[g.idx(x, y)] = (x - cx) * nu.x + (y - cy) * nu.y <= 0;
    const double per = pairwise_perimeter(e, st);
    // chord of the line within the pixel rectangle
    const double lo = -0.5, hi = N - 0.5;
    const Vec2 t{-nu.y, nu.x};
    double tmin = -1e300, tmax = 1e300;
    auto clip = [&](double p0, double d) {
      if (std::abs(d) < 1e-15) return;
      double u1 = (lo - p0) / d, u2 = (hi - p0) / d;
      if (u1 > u2) std::swap(u1, u2);
      tmin = std::max(tmin, u1);
      tmax = std::min(tmax, u2);
    };
    clip(cx, t.x);
    clip(cy, t.y);
    return per / (tmax - tmin);
  };

  bool ok = true;
  for (const auto& [name, a] :
       std::vector<std::pair<std::string, Anisotropy>>{{"euclidean", Anisotropy::euclidean()},
                                                       {"weighted_l2", Anisotropy::weighted_l2({4, 0, 1})}}) {
    const Stencil st = crofton_weights(a, 16, 1.0);
    double worst = 0.0;
    for (int i = 0; i < normals; i++) {
      const double ang = std::numbers::pi * (i + 0.5) / normals;
      const double phi = a.eval({std::cos(ang), std::sin(ang)});
      worst = std::max(worst, std::abs(measure(st, ang, grid) - phi) / phi);
    }
    rep.metric(name + "_order16_worst_rel", worst);
    if (worst > tol16) ok = false;
  }
  {
    const Anisotropy a = Anisotropy::euclidean();
    const Stencil st8 = crofton_weights(a, 8, 1.0);
    const double diag = measure(st8, std::numbers::pi / 4, grid);
    rep.metric("euclidean_order8_diag_rel", std::abs(diag - 1.0));
    if (std::abs(diag - 1.0) > tol8) ok = false;

    const Stencil st4 = crofton_weights(a, 4, 1.0);
    const double axis = measure(st4, 0.0, 64);
    rep.metric("euclidean_order4_axis_error", std::abs(axis - 1.0));
    rep.metric("euclidean_order4_weight_split",
               std::abs(st4.arms[0].weight - st4.arms[1].weight));
    if (std::abs(axis - 1.0) > 1e-12 ||
        std::abs(st4.arms[0].weight - st4.arms[1].weight) > 1e-12)
      ok = false;
  }
  rep.status = ok ? "pass" : "fail";
  return rep;
}

CheckReport report_density_and_separation(std::uint64_t seed, const json& params,
                                          const std::string&) {
  CheckReport rep;
  rep.check = "density_separation";
  rep.property =
      "density ratios at level-set boundaries and separation between level sets (diagnostic)";
  rep.seed = seed;
  const int size = params.value("size", 24);
  rep.params = ordered_json{{"size", size}, {"levels", {0.3, 0.7}}};

  const Stencil st = euclid_stencil(8);

  auto boundary_cells = [&](const BinarySet& e) {
    std::vector<std::pair<int, int>> cells;
    const auto& g = e.geom();
    for (int y = 0; y < g.height; y++)
      for (int x = 0; x < g.width; x++) {
        if (!e.contains(x, y)) continue;
        bool cut = false;
        for (const auto& arm : st.arms) {
          for (int sgn : {-1, 1}) {
            const int X = x + sgn * arm.dx, Y = y + sgn * arm.dy;
            if (g.inside(X, Y) && !e.contains(X, Y)) cut = true;
          }
        }
        if (cut) cells.emplace_back(x, y);
      }
    return cells;
  };
  auto density_stats = [&](const BinarySet& e, int radius, double& dmin, double& dmax) {
    dmin = 1.0;
    dmax = 0.0;
    const auto& g = e.geom();
    for (auto [x, y] : boundary_cells(e)) {
      int inside = 0, total = 0;
      for (int dy = -radius; dy <= radius; dy++)
        for (int dx = -radius; dx <= radius; dx++) {
          if (dx * dx + dy * dy > radius * radius) continue;
          const int X = x + dx, Y = y + dy;
          if (!g.inside(X, Y)) continue;
          total++;
          inside += e.contains(X, Y) ? 1 : 0;
        }
      if (total == 0) continue;
      const double d = double(inside) / total;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
  };

  // half-plane sanity: density near 1/2 by symmetry
  {
    GridGeometry g(32, 32, 1.0);
    BinarySet hp(g);
    for (int y = 0; y < 32; y++)
      for (int x = 0; x < 32; x++) hp.bits()[g.idx(x, y)] = x < 16;
    for (int r : {2, 3, 4}) {
      double dmin, dmax;
      density_stats(hp, r, dmin, dmax);
      rep.metric("halfplane_density_min_r" + std::to_string(r), dmin);
      rep.metric("halfplane_density_max_r" + std::to_string(r), dmax);
    }
  }

  // level sets of a solved instance
  RofProblem p;
  p.g = smooth_field(size, size, 1.0, seed);
  p.lambda = 1.0;
  p.stencil = st;
  const auto [u, sr] = solve(p, 1e-9, 300000);
  std::vector<BinarySet> sets;
  for (double t : {0.3, 0.7}) {
    BinarySet e(u.geom());
    for (int i = 0; i < u.cells(); i++) e.bits()[i] = u[i] > t;
    sets.push_back(e);
    double dmin, dmax;
    density_stats(e, 3, dmin, dmax);
    rep.metric("level_" + fmt(t) + "_density_min_r3", dmin);
    rep.metric("level_" + fmt(t) + "_density_max_r3", dmax);
  }
  const auto b0 = boundary_cells(sets[0]), b1 = boundary_cells(sets[1]);
  double sep = 1e300;
  for (auto [x0, y0] : b0)
    for (auto [x1, y1] : b1)
      sep = std::min(sep, double(std::max(std::abs(x0 - x1), std::abs(y0 - y1))));
  rep.metric("min_boundary_separation_chebyshev", b0.empty() || b1.empty() ? -1.0 : sep);
  rep.status = "report-only";
  return rep;
}

// ---- suite -------------------------------------------------------------------

std::vector<SuiteJob> parse_manifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest: bad JSON: ") + e.what());
  }
  if (!j.is_array()) throw std::invalid_argument("manifest: expected a JSON array");
  std::vector<SuiteJob> jobs;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("check"))
      throw std::invalid_argument("manifest: each entry needs a \"check\"");
    SuiteJob job;
    job.check = item.at("check").get<std::string>();
    job.params = item.value("params", json::object());
    job.seed = item.value("seed", std::uint64_t(0));
    job.tier = item.value("tier", "fast");
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::string manifest_to_json(const std::vector<SuiteJob>& jobs) {
  ordered_json arr = ordered_json::array();
  for (const auto& j : jobs) {
    ordered_json o;
    o["check"] = j.check;
    o["params"] = j.params.empty() ? ordered_json::object() : ordered_json(j.params);
    o["seed"] = j.seed;
    o["tier"] = j.tier;
    arr.push_back(o);
  }
  return arr.dump(2);
}

std::vector<SuiteJob> default_manifest() {
  std::vector<SuiteJob> jobs;
  auto add = [&](const char* check, std::uint64_t seed, const char* tier) {
    jobs.push_back({check, json::object(), seed, tier});
  };
  add("anisotropy_identities", 101, "fast");
  add("discrete_calculus", 102, "fast");
  add("maxflow_reference", 103, "fast");
  add("curvature_exactness", 104, "fast");
  add("stacked_oracle", 105, "fast");
  add("comparison_contraction", 106, "fast");
  add("jump_inclusion", 107, "fast");
  add("dirichlet_solver", 108, "fast");
  add("levelset_equivalence", 201, "slow");
  add("modulus_preservation", 202, "slow");
  add("crofton_halfspace", 203, "slow");
  add("density_separation", 204, "slow");
  return jobs;
}

CheckReport run_check(const SuiteJob& job, const std::string& artifact_dir) {
  using Fn = CheckReport (*)(std::uint64_t, const json&, const std::string&);
  static const std::vector<std::pair<std::string, Fn>> table = {
      {"anisotropy_identities", check_anisotropy_identities},
      {"discrete_calculus", check_discrete_calculus},
      {"maxflow_reference", check_maxflow_reference},
      {"curvature_exactness", check_curvature_exactness},
      {"stacked_oracle", check_stacked_oracle},
      {"comparison_contraction", check_comparison_suite},
      {"levelset_equivalence", check_levelset_equivalence},
      {"modulus_preservation", check_modulus},
      {"jump_inclusion", check_jump_inclusion},
      {"dirichlet_solver", check_dirichlet_solver},
      {"crofton_halfspace", check_crofton_halfspace},
      {"density_separation", report_density_and_separation},
  };
  for (const auto& [name, fn] : table)
    if (name == job.check) return fn(job.seed, job.params, artifact_dir);
  throw std::invalid_argument("unknown check \"" + job.check + "\"");
}

std::vector<CheckReport> run_suite(const std::vector<SuiteJob>& jobs, const std::string& tier,
                                   int parallel_jobs, const std::string& artifact_dir) {
  std::vector<size_t> selected;
  for (size_t i = 0; i < jobs.size(); i++)
    if (tier == "all" || jobs[i].tier == tier) selected.push_back(i);
  std::vector<CheckReport> reports(selected.size());
  if (parallel_jobs <= 1) {
    for (size_t k = 0; k < selected.size(); k++)
      reports[k] = run_check(jobs[selected[k]], artifact_dir);
    return reports;
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t k = next.fetch_add(1);
      if (k >= selected.size()) return;
      reports[k] = run_check(jobs[selected[k]], artifact_dir);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < parallel_jobs; t++) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return reports;
}

std::string reports_to_jsonl(const std::vector<CheckReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += r.to_json_line();
    out += "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<CheckReport>& reports) {
  std::string out = "check,status,seed,metric,value\n";
  for (const auto& r : reports)
    for (const auto& [k, v] : r.metrics)
      out += r.check + "," + r.status + "," + std::to_string(r.seed) + "," + k + "," + fmt(v) + "\n";
  return out;
}

std::string summary_table(const std::vector<CheckReport>& reports) {
  std::string out;
  size_t width = 10;
  for (const auto& r : reports) width = std::max(width, r.check.size());
  for (const auto& r : reports) {
    out += r.check;
    out.append(width + 2 - r.check.size(), ' ');
    out += r.status;
    out += "\n";
  }
  return out;
}

}  // namespace tvlevel::verify
