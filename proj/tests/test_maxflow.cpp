#include <doctest.h>

#include "tvlevel/maxflow.hpp"
#include "tvlevel/verify.hpp"

using namespace tvlevel;

TEST_CASE("unit edge and disconnected graphs") {
  {
    MaxflowGraph g(1);
    g.add_terminal(0, 1, 1);
    CHECK(g.solve() == 1);
  }
  {
    MaxflowGraph g(2);
    g.add_terminal(0, 5, 0);
    g.add_terminal(1, 0, 7);
    CHECK(g.solve() == 0);
    const auto mn = g.min_cut_source_side();
    CHECK(mn[0] == 1);  // source side keeps the reachable node
    CHECK(mn[1] == 0);
  }
}

TEST_CASE("matches the independent augmenting-path reference") {
  verify::Rng rng(321);
  for (int k = 0; k < 50; k++) {
    const int n = 2 + rng.below(10);
    std::vector<std::tuple<int, int, std::int64_t>> edges;
    for (int a = 0; a < n; a++)
      for (int b = 0; b < n; b++)
        if (a != b && rng.uniform() < 0.35) edges.emplace_back(a, b, rng.below(1000));
    for (int a = 0; a < n; a++) {
      edges.emplace_back(n, a, rng.below(400));
      edges.emplace_back(a, n + 1, rng.below(400));
    }
    MaxflowGraph g(n);
    for (const auto& [a, b, c] : edges) {
      if (a == n)
        g.add_terminal(b, c, 0);
      else if (b == n + 1)
        g.add_terminal(a, 0, c);
      else
        g.add_edge(a, b, c);
    }
    CHECK(g.solve() == verify::reference_maxflow(n, edges));
    const auto mn = g.min_cut_source_side();
    const auto mx = g.max_cut_source_side();
    for (int i = 0; i < n; i++) {
      if (mn[i]) CHECK(mx[i]);  // minimal cut inside maximal cut
    }
  }
}

TEST_CASE("api misuse") {
  MaxflowGraph g(2);
  CHECK_THROWS_AS(g.add_edge(0, 1, -3), std::invalid_argument);
  g.add_terminal(0, 2, 0);
  g.add_terminal(1, 0, 2);
  g.add_pairwise(0, 1, 1);
  g.solve();
  CHECK_THROWS_AS((void)g.solve(), std::logic_error);
  CHECK_THROWS_AS(g.add_edge(0, 1, 1), std::logic_error);
}
