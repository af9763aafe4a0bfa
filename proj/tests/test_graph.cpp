#include "dlasftc/graph.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

using namespace dlasftc;

namespace {

Digraph directed_cycle(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back((i + 1) % n, i);
  return Digraph(n, edges);
}

}  // namespace

TEST_CASE("digraph construction validates its input") {
  CHECK_THROWS_AS(Digraph(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(3, {{0, 0}}), std::invalid_argument);   // self-edge
  CHECK_THROWS_AS(Digraph(3, {{0, 3}}), std::invalid_argument);   // out of range
  const Digraph g(3, {{1, 0}, {2, 1}, {0, 2}, {1, 0}});           // duplicate collapses
  CHECK_EQ(g.edges().size(), 3);
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 1));
  CHECK_EQ(g.in_degree(1), 1);
  CHECK_EQ(g.out_degree(1), 1);
}

TEST_CASE("neighbor lists agree with the edge set both ways") {
  const Digraph g = random_strongly_connected(12, 0.3, 99);
  std::set<std::pair<int, int>> edges(g.edges().begin(), g.edges().end());
  for (int i = 0; i < g.node_count(); ++i) {
    for (int j : g.in_neighbors(i)) CHECK(edges.count({i, j}) == 1);
    for (int j : g.out_neighbors(i)) CHECK(edges.count({j, i}) == 1);
    CHECK_EQ(g.in_degree(i), static_cast<int>(g.in_neighbors(i).size()));
    CHECK_EQ(g.out_degree(i), static_cast<int>(g.out_neighbors(i).size()));
  }
  for (const auto& [receiver, sender] : g.edges()) {
    CHECK(g.has_edge(receiver, sender));
  }
}

TEST_CASE("two-node generation yields the directed 2-cycle") {
  for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
    const Digraph g = random_strongly_connected(2, 0.0, seed);
    REQUIRE_EQ(g.node_count(), 2);
    REQUIRE_EQ(g.edges().size(), 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
  }
}

TEST_CASE("generator rejects invalid parameters") {
  CHECK_THROWS_AS(random_strongly_connected(1, 0.5, 7), std::invalid_argument);
  CHECK_THROWS_AS(random_strongly_connected(5, -0.1, 7), std::invalid_argument);
  CHECK_THROWS_AS(random_strongly_connected(5, 1.5, 7), std::invalid_argument);
}

TEST_CASE("generated digraphs are strongly connected") {
  // Includes the paper-style instance N=20, density 0.2.
  const Digraph paper_style = random_strongly_connected(20, 0.2, 7);
  CHECK(is_strongly_connected(paper_style));
  CHECK(test_oracle::strongly_connected_bruteforce(paper_style));

  for (int n : {2, 3, 5, 11, 30}) {
    for (double density : {0.0, 0.1, 0.4, 0.9}) {
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Digraph g = random_strongly_connected(n, density, seed);
        CHECK(is_strongly_connected(g));
        CHECK(test_oracle::strongly_connected_bruteforce(g));
      }
    }
  }
}

TEST_CASE("generation is deterministic per seed") {
  const Digraph a = random_strongly_connected(15, 0.35, 123);
  const Digraph b = random_strongly_connected(15, 0.35, 123);
  const Digraph c = random_strongly_connected(15, 0.35, 124);
  CHECK(a.edges() == b.edges());
  CHECK(a.edges() != c.edges());
}

TEST_CASE("strong connectivity matches the brute-force oracle") {
  const Digraph cycle = directed_cycle(3);
  CHECK(is_strongly_connected(cycle));

  // Path 0 -> 1 -> 2 without return edges.
  const Digraph path(3, {{1, 0}, {2, 1}});
  CHECK_FALSE(is_strongly_connected(path));

  // Random edge subsets, connected or not.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 8);
    std::vector<std::pair<int, int>> edges;
    for (int r = 0; r < n; ++r)
      for (int s = 0; s < n; ++s)
        if (r != s && (rng() % 3) == 0) edges.emplace_back(r, s);
    const Digraph g(n, edges);
    CHECK_EQ(is_strongly_connected(g), test_oracle::strongly_connected_bruteforce(g));
  }
}

TEST_CASE("default weights on the bidirectional pair") {
  const Digraph g(2, {{0, 1}, {1, 0}});
  const WeightMatrix w = default_weights(g);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK_EQ(w(i, j), doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("default weights on the directed 3-cycle") {
  const WeightMatrix w = default_weights(directed_cycle(3));
  for (int j = 0; j < 3; ++j) {
    CHECK_EQ(w(j, j), doctest::Approx(0.5).epsilon(1e-15));
    CHECK_EQ(w((j + 1) % 3, j), doctest::Approx(0.5).epsilon(1e-15));
    CHECK_EQ(w((j + 2) % 3, j), 0.0);
  }
}

TEST_CASE("default weights on the out-star") {
  // Node 0 sends to nodes 1..4; each sends back to node 0.
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= 4; ++i) {
    edges.emplace_back(i, 0);
    edges.emplace_back(0, i);
  }
  const Digraph g(5, edges);
  const WeightMatrix w = default_weights(g);
  double column_sum = 0.0;
  for (int i = 0; i < 5; ++i) {
    CHECK_EQ(w(i, 0), doctest::Approx(0.2).epsilon(1e-15));
    column_sum += w(i, 0);
  }
  CHECK_EQ(column_sum, doctest::Approx(1.0).epsilon(1e-15));
  for (int j = 1; j < 5; ++j) {
    CHECK_EQ(w(j, j), doctest::Approx(0.5).epsilon(1e-15));
    CHECK_EQ(w(0, j), doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("default weights require strong connectivity") {
  const Digraph path(3, {{1, 0}, {2, 1}});
  CHECK_THROWS_AS(default_weights(path), std::invalid_argument);
}

TEST_CASE("weight matrices are column stochastic and conform to the graph") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Digraph g = random_strongly_connected(4 + seed % 20, 0.25, seed);
    const WeightMatrix w = default_weights(g);
    const int n = g.node_count();
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      int positive = 0;
      for (int i = 0; i < n; ++i) {
        sum += w(i, j);
        if (w(i, j) > 0.0) {
          ++positive;
          CHECK((i == j || g.has_edge(i, j)));
        }
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      CHECK_EQ(positive, g.out_degree(j) + 1);
      CHECK_EQ(w(j, j), doctest::Approx(1.0 / (1.0 + g.out_degree(j))).epsilon(1e-15));
    }
  }
}

TEST_CASE("small weight matrices are primitive") {
  // Some power up to N^2 must be entrywise positive.
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const Digraph g = random_strongly_connected(n, 0.2, seed + 100);
    const Eigen::MatrixXd p = default_weights(g).matrix();
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    bool positive = false;
    for (int m = 1; m <= n * n && !positive; ++m) {
      power = power * p;
      positive = (power.array() > 0.0).all();
    }
    CHECK(positive);
  }
}

TEST_CASE("diameter upper bound") {
  CHECK_EQ(diameter_upper_bound({20}), 19);
  CHECK_EQ(diameter_upper_bound({2}), 1);
  CHECK_THROWS_AS(diameter_upper_bound({1}), std::invalid_argument);

  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 3 + static_cast<int>(seed * 3);
    const Digraph g = random_strongly_connected(n, 0.15, seed);
    CHECK(test_oracle::diameter_bfs(g) <= diameter_upper_bound({n}));
    CHECK(test_oracle::diameter_bfs(g) <= diameter_upper_bound({n + 5}));
  }
}

TEST_CASE("edge list serialization round trips and is 1-indexed") {
  const Digraph g(2, {{0, 1}, {1, 0}});
  CHECK_EQ(g.to_edge_list(), "2\n1 2\n2 1\n");

  const Digraph big = random_strongly_connected(17, 0.3, 2024);
  const Digraph back = Digraph::from_edge_list(big.to_edge_list());
  CHECK_EQ(back.node_count(), big.node_count());
  CHECK(back.edges() == big.edges());

  std::istringstream empty("");
  CHECK_THROWS_AS(Digraph::from_edge_list(empty), std::invalid_argument);
}

TEST_CASE("topology hash separates different graphs") {
  const Digraph a = random_strongly_connected(10, 0.3, 1);
  const Digraph b = random_strongly_connected(10, 0.3, 2);
  CHECK_EQ(topology_hash(a), topology_hash(a));
  CHECK(topology_hash(a) != topology_hash(b));
}
