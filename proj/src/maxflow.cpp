#include "tvlevel/maxflow.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace tvlevel {

MaxflowGraph::MaxflowGraph(int n_nodes) : n_(n_nodes), source_(n_nodes), sink_(n_nodes + 1) {
  if (n_nodes < 0) throw std::invalid_argument("maxflow: negative node count");
  head_.assign(n_ + 2, -1);
}

void MaxflowGraph::add_edge(int u, int v, std::int64_t cap) {
  if (cap < 0) throw std::invalid_argument("maxflow: negative capacity");
  if (solved_) throw std::logic_error("maxflow: graph already solved");
  auto push = [&](int a, int b, std::int64_t c) {
    next_.push_back(head_[a]);
    head_[a] = static_cast<int>(to_.size());
    to_.push_back(b);
    cap_.push_back(c);
  };
  push(u, v, cap);
  push(v, u, 0);
}

void MaxflowGraph::add_pairwise(int u, int v, std::int64_t cap) {
  if (cap < 0) throw std::invalid_argument("maxflow: negative capacity");
  if (solved_) throw std::logic_error("maxflow: graph already solved");
  auto push = [&](int a, int b, std::int64_t c) {
    next_.push_back(head_[a]);
    head_[a] = static_cast<int>(to_.size());
    to_.push_back(b);
    cap_.push_back(c);
  };
  push(u, v, cap);
  push(v, u, cap);
}

void MaxflowGraph::add_terminal(int v, std::int64_t from_source, std::int64_t to_sink) {
  if (from_source > 0) add_edge(source_, v, from_source);
  if (to_sink > 0) add_edge(v, sink_, to_sink);
}

bool MaxflowGraph::bfs_levels() {
  level_.assign(n_ + 2, -1);
  std::deque<int> queue{source_};
  level_[source_] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int e = head_[v]; e != -1; e = next_[e]) {
      if (cap_[e] <= 0 || level_[to_[e]] >= 0) continue;
      level_[to_[e]] = level_[v] + 1;
      queue.push_back(to_[e]);
    }
  }
  return level_[sink_] >= 0;
}

// Iterative blocking flow (explicit path stack; grids can be large).
std::int64_t MaxflowGraph::blocking_flow() {
  std::int64_t total = 0;
  std::vector<int> epath;
  int v = source_;
  while (true) {
    if (v == sink_) {
      std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
      for (int e : epath) bottleneck = std::min(bottleneck, cap_[e]);
      for (int e : epath) {
        cap_[e] -= bottleneck;
        cap_[e ^ 1] += bottleneck;
      }
      total += bottleneck;
      size_t keep = 0;
      while (keep < epath.size() && cap_[epath[keep]] > 0) keep++;
      epath.resize(keep);
      v = epath.empty() ? source_ : to_[epath.back()];
      continue;
    }
    int e = iter_[v];
    while (e != -1 && !(cap_[e] > 0 && level_[to_[e]] == level_[v] + 1)) e = next_[e];
    iter_[v] = e;
    if (e != -1) {
      epath.push_back(e);
      v = to_[e];
    } else {
      level_[v] = -1;
      if (v == source_) break;
      epath.pop_back();
      v = epath.empty() ? source_ : to_[epath.back()];
    }
  }
  return total;
}

std::int64_t MaxflowGraph::solve() {
  if (solved_) throw std::logic_error("maxflow: graph already solved");
  solved_ = true;
  while (bfs_levels()) {
    phases_++;
    iter_ = head_;
    flow_value_ += blocking_flow();
  }
  return flow_value_;
}

void MaxflowGraph::reach(int start, bool forward, std::vector<std::uint8_t>& mark) const {
  std::deque<int> queue{start};
  mark[start] = 1;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int e = head_[v]; e != -1; e = next_[e]) {
      // forward: residual arc v -> to[e]; backward: residual arc to[e] -> v,
      // whose capacity sits on the paired edge e^1.
      const std::int64_t res = forward ? cap_[e] : cap_[e ^ 1];
      if (res <= 0 || mark[to_[e]]) continue;
      mark[to_[e]] = 1;
      queue.push_back(to_[e]);
    }
  }
}

std::vector<std::uint8_t> MaxflowGraph::min_cut_source_side() const {
  if (!solved_) throw std::logic_error("maxflow: solve first");
  std::vector<std::uint8_t> mark(n_ + 2, 0);
  reach(source_, true, mark);
  mark.resize(n_);
  return mark;
}

std::vector<std::uint8_t> MaxflowGraph::max_cut_source_side() const {
  if (!solved_) throw std::logic_error("maxflow: solve first");
  std::vector<std::uint8_t> mark(n_ + 2, 0);
  reach(sink_, false, mark);
  std::vector<std::uint8_t> side(n_, 0);
  for (int i = 0; i < n_; i++) side[i] = mark[i] ? 0 : 1;
  return side;
}

}  // namespace tvlevel
