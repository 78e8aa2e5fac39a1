#include "tvlevel/geom.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "tvlevel/maxflow.hpp"

namespace tvlevel {

namespace {

// Largest value we allow a single quantized capacity to take; leaves room to
// sum many edges without wrapping int64.
constexpr std::int64_t kCapLimit = std::int64_t(1) << 56;

std::int64_t quantize(double v, double quantum, const std::string& what) {
  const double scaled = v * quantum;
  if (!(std::abs(scaled) < double(kCapLimit)))
    throw std::overflow_error("capacity overflow at " + what);
  return std::llround(scaled);
}

Seed seed_at(const CurvatureProblem& p, int i) {
  return p.seeds.empty() ? Seed::Free : p.seeds[i];
}

}  // namespace

void CurvatureProblem::validate() const {
  g.validate();
  stencil.validate();
  if (!std::isfinite(level)) throw std::invalid_argument("curvature: level must be finite");
  if (!std::isfinite(scale)) throw std::invalid_argument("curvature: scale must be finite");
  if (!seeds.empty()) {
    if (seeds.size() != static_cast<size_t>(g.cells()))
      throw std::invalid_argument("curvature: seed count mismatch");
    for (int i = 0; i < g.cells(); i++)
      if (seeds[i] != Seed::Free && g.geom().mask[i] == CellKind::Outside)
        throw std::invalid_argument("curvature: forced seed on an outside cell");
  }
}

std::int64_t quantized_energy(const CurvatureProblem& p, const BinarySet& e, double quantum) {
  const auto& g = p.g.geom();
  std::int64_t total = 0;
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      const int i = g.idx(x, y);
      if (e.contains(x, y))
        total += quantize(p.scale * g.delta * g.delta * (p.level - p.g[i]), quantum,
                          "cell (" + std::to_string(x) + "," + std::to_string(y) + ")");
      for (const auto& arm : p.stencil.arms) {
        const int X = x + arm.dx, Y = y + arm.dy;
        if (!g.inside(X, Y)) continue;
        if (e.contains(x, y) != e.contains(X, Y))
          total += quantize(arm.weight, quantum, "pair");
      }
    }
  return total;
}

double real_energy(const CurvatureProblem& p, const BinarySet& e) {
  const auto& g = p.g.geom();
  double vol = 0.0;
  for (int i = 0; i < g.cells(); i++)
    if (g.mask[i] != CellKind::Outside && e.bits()[i])
      vol += p.scale * g.delta * g.delta * (p.level - p.g[i]);
  return pairwise_perimeter(e, p.stencil) + vol;
}

CutResult solve_curvature(const CurvatureProblem& p, double quantum) {
  p.validate();
  const auto& g = p.g.geom();
  const int n = g.cells();

  MaxflowGraph graph(n);
  // One graph node per non-outside cell; "in E" means source side. Positive
  // volume coefficients discourage membership via sink edges, negative ones
  // encourage it via source edges. Forced bits get an effectively infinite
  // terminal capacity.
  const std::int64_t kForce = std::int64_t(1) << 60;
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      const int i = g.idx(x, y);
      const Seed s = seed_at(p, i);
      if (s == Seed::ForcedIn) {
        graph.add_terminal(i, kForce, 0);
        continue;
      }
      if (s == Seed::ForcedOut) {
        graph.add_terminal(i, 0, kForce);
        continue;
      }
      const std::int64_t v =
          quantize(p.scale * g.delta * g.delta * (p.level - p.g[i]), quantum,
                   "cell (" + std::to_string(x) + "," + std::to_string(y) + ")");
      if (v >= 0)
        graph.add_terminal(i, 0, v);
      else
        graph.add_terminal(i, -v, 0);
    }
  for (int y = 0; y < g.height; y++)
    for (int x = 0; x < g.width; x++) {
      if (!g.inside(x, y)) continue;
      for (const auto& arm : p.stencil.arms) {
        const int X = x + arm.dx, Y = y + arm.dy;
        if (!g.inside(X, Y)) continue;
        graph.add_pairwise(g.idx(x, y), g.idx(X, Y), quantize(arm.weight, quantum, "pair"));
      }
    }

  graph.solve();

  CutResult r;
  r.stats.flow_value = graph.flow_value();
  r.stats.nodes = static_cast<std::size_t>(n);
  r.stats.edges = graph.edge_count();
  r.stats.phases = graph.phase_count();
  r.stats.quantum = quantum;

  const auto mincut = graph.min_cut_source_side();
  const auto maxcut = graph.max_cut_source_side();
  r.minimal = BinarySet(g);
  r.maximal = BinarySet(g);
  for (int i = 0; i < n; i++) {
    if (g.mask[i] == CellKind::Outside) continue;
    r.minimal.bits()[i] = mincut[i];
    r.maximal.bits()[i] = maxcut[i];
  }

  // Forced-in volume terms were left out of the graph; account for them in
  // the reported energies so they match an independent resum.
  r.energy_int = quantized_energy(p, r.minimal, quantum);
  r.energy = real_energy(p, r.minimal);
  return r;
}

std::vector<double> default_dirichlet_levels(const ScalarField& trace) {
  const auto& g = trace.geom();
  std::set<double> values;
  for (int i = 0; i < g.cells(); i++)
    if (g.mask[i] == CellKind::Boundary) values.insert(trace[i]);
  if (values.empty()) throw std::invalid_argument("dirichlet: empty boundary");
  std::vector<double> levels;
  for (auto it = values.begin(); std::next(it) != values.end(); ++it)
    levels.push_back((*it + *std::next(it)) / 2.0);
  return levels;
}

std::vector<BinarySet> dirichlet_level_sets(const ScalarField& trace, const Stencil& stencil,
                                            const std::vector<double>& levels) {
  const auto& g = trace.geom();
  bool has_boundary = false;
  for (auto k : g.mask) has_boundary |= (k == CellKind::Boundary);
  if (!has_boundary) throw std::invalid_argument("dirichlet: empty boundary");
  for (size_t j = 1; j < levels.size(); j++)
    if (!(levels[j] > levels[j - 1]))
      throw std::invalid_argument("dirichlet: levels must be strictly increasing");

  std::vector<BinarySet> cuts;
  cuts.reserve(levels.size());
  for (double t : levels) {
    CurvatureProblem p;
    p.g = trace;
    p.level = t;
    p.stencil = stencil;
    p.scale = 0.0;  // pure perimeter; the trace acts through the seeds only
    p.seeds.assign(g.cells(), Seed::Free);
    for (int i = 0; i < g.cells(); i++)
      if (g.mask[i] == CellKind::Boundary)
        p.seeds[i] = trace[i] > t ? Seed::ForcedIn : Seed::ForcedOut;
    cuts.push_back(solve_curvature(p).maximal);
  }
  return cuts;
}

ScalarField solve_dirichlet_tv(const ScalarField& trace, const Stencil& stencil,
                               std::vector<double> levels) {
  trace.validate();
  const auto& g = trace.geom();

  std::set<double> distinct;
  for (int i = 0; i < g.cells(); i++)
    if (g.mask[i] == CellKind::Boundary) distinct.insert(trace[i]);
  if (distinct.empty()) throw std::invalid_argument("dirichlet: empty boundary");
  const double lo = *distinct.begin(), hi = *distinct.rbegin();

  // Each level t_j separates a value bin below from one above; u is stacked
  // from the bin representatives so that one level gives a binary {lo, hi}
  // output and the default levels reproduce the trace values exactly.
  std::vector<double> reps;
  if (levels.empty()) {
    levels = default_dirichlet_levels(trace);
    reps.assign(distinct.begin(), distinct.end());
  } else {
    reps.push_back(lo);
    for (size_t j = 0; j + 1 < levels.size(); j++)
      reps.push_back((levels[j] + levels[j + 1]) / 2.0);
    reps.push_back(hi);
  }

  const auto cuts = dirichlet_level_sets(trace, stencil, levels);

  // maximal minimizers of nested trace constraints nest; stacking is then a
  // plain sum of representative increments
  for (size_t j = 1; j < cuts.size(); j++)
    for (int i = 0; i < g.cells(); i++)
      if (cuts[j].bits()[i] && !cuts[j - 1].bits()[i])
        throw std::logic_error("dirichlet: level nesting violated");

  ScalarField u(g, std::vector<double>(g.cells(), lo));
  for (int i = 0; i < g.cells(); i++) {
    if (g.mask[i] == CellKind::Outside) {
      u[i] = 0.0;
      continue;
    }
    for (size_t j = 0; j < cuts.size(); j++)
      if (cuts[j].bits()[i]) u[i] += reps[j + 1] - reps[j];
  }
  // boundary cells keep their trace exactly
  for (int i = 0; i < g.cells(); i++)
    if (g.mask[i] == CellKind::Boundary) u[i] = trace[i];
  return u;
}

}  // namespace tvlevel
