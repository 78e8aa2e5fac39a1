#pragma once

#include <cstdint>
#include <vector>

namespace tvlevel {

/// Exact integer max-flow / min-cut on a graph with an implicit source and
/// sink (Dinic's algorithm). Capacities are int64; callers quantize reals.
class MaxflowGraph {
 public:
  explicit MaxflowGraph(int n_nodes);

  /// Undirected pairwise term: capacity cap in both directions.
  void add_pairwise(int u, int v, std::int64_t cap);
  /// Directed edge.
  void add_edge(int u, int v, std::int64_t cap);
  /// Terminal capacities (source->v, v->sink). Accumulates across calls.
  void add_terminal(int v, std::int64_t from_source, std::int64_t to_sink);

  /// Runs max-flow; returns the flow value. Callable once.
  std::int64_t solve();

  /// Minimal min-cut: nodes reachable from the source in the residual graph.
  std::vector<std::uint8_t> min_cut_source_side() const;
  /// Maximal min-cut: complement of the nodes that still reach the sink.
  std::vector<std::uint8_t> max_cut_source_side() const;

  std::int64_t flow_value() const { return flow_value_; }
  std::size_t edge_count() const { return to_.size() / 2; }
  int phase_count() const { return phases_; }

 private:
  struct Ref {
    int head = -1;
  };

  bool bfs_levels();
  std::int64_t blocking_flow();
  void reach(int start, bool forward, std::vector<std::uint8_t>& mark) const;

  int n_;
  int source_, sink_;
  std::vector<int> head_;       // adjacency list heads per node
  std::vector<int> next_;       // next edge index
  std::vector<int> to_;         // edge target
  std::vector<std::int64_t> cap_;
  std::vector<int> level_;
  std::vector<int> iter_;
  std::int64_t flow_value_ = 0;
  int phases_ = 0;
  bool solved_ = false;
};

}  // namespace tvlevel
