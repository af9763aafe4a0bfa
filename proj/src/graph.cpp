#include "dlasftc/graph.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dlasftc {

Digraph::Digraph(int node_count, std::vector<std::pair<int, int>> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
  if (node_count_ < 1) {
    throw std::invalid_argument("Digraph: node_count must be >= 1");
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  in_neighbors_.assign(node_count_, {});
  out_neighbors_.assign(node_count_, {});
  for (const auto& [receiver, sender] : edges_) {
    if (receiver < 0 || receiver >= node_count_ || sender < 0 || sender >= node_count_) {
      throw std::invalid_argument("Digraph: edge endpoint out of range");
    }
    if (receiver == sender) {
      throw std::invalid_argument("Digraph: self-edges are not allowed");
    }
    in_neighbors_[receiver].push_back(sender);
    out_neighbors_[sender].push_back(receiver);
  }
  for (auto& nbrs : in_neighbors_) std::sort(nbrs.begin(), nbrs.end());
  for (auto& nbrs : out_neighbors_) std::sort(nbrs.begin(), nbrs.end());
}

bool Digraph::has_edge(int receiver, int sender) const {
  const auto& nbrs = in_neighbors_.at(receiver);
  return std::binary_search(nbrs.begin(), nbrs.end(), sender);
}

std::string Digraph::to_edge_list() const {
  std::ostringstream out;
  out << node_count_ << '\n';
  for (const auto& [receiver, sender] : edges_) {
    out << receiver + 1 << ' ' << sender + 1 << '\n';
  }
  return out.str();
}

Digraph Digraph::from_edge_list(std::istream& in) {
  int n = 0;
  if (!(in >> n)) {
    throw std::invalid_argument("Digraph::from_edge_list: missing node count");
  }
  std::vector<std::pair<int, int>> edges;
  int receiver = 0;
  int sender = 0;
  while (in >> receiver >> sender) {
    edges.emplace_back(receiver - 1, sender - 1);
  }
  return Digraph(n, std::move(edges));
}

Digraph Digraph::from_edge_list(const std::string& text) {
  std::istringstream in(text);
  return from_edge_list(in);
}

Digraph random_strongly_connected(int node_count, double edge_density,
                                  std::uint64_t seed) {
  if (node_count < 2) {
    throw std::invalid_argument("random_strongly_connected: node_count must be >= 2");
  }
  if (edge_density < 0.0 || edge_density > 1.0) {
    throw std::invalid_argument("random_strongly_connected: edge_density must be in [0, 1]");
  }
  std::mt19937_64 rng(seed);

  // Hamiltonian directed cycle over a random permutation guarantees strong
  // connectivity regardless of the extra edges.
  std::vector<int> order(node_count);
  for (int i = 0; i < node_count; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < node_count; ++i) {
    const int sender = order[i];
    const int receiver = order[(i + 1) % node_count];
    edges.emplace_back(receiver, sender);
  }

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int receiver = 0; receiver < node_count; ++receiver) {
    for (int sender = 0; sender < node_count; ++sender) {
      if (receiver == sender) continue;
      if (coin(rng) < edge_density) {
        edges.emplace_back(receiver, sender);
      }
    }
  }
  return Digraph(node_count, std::move(edges));
}

namespace {

// Iterative DFS reach count, following either edge direction.
int reachable_count(const Digraph& g, int start, bool reversed) {
  std::vector<char> seen(g.node_count(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    const auto& next = reversed ? g.in_neighbors(v) : g.out_neighbors(v);
    for (int w : next) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
  if (g.node_count() == 1) return true;
  return reachable_count(g, 0, false) == g.node_count() &&
         reachable_count(g, 0, true) == g.node_count();
}

std::uint64_t topology_hash(const Digraph& g) {
  // FNV-1a over the node count and the sorted edge list.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffull;
      h *= 0x100000001b3ull;
    }
  };
  mix(static_cast<std::uint64_t>(g.node_count()));
  for (const auto& [receiver, sender] : g.edges()) {
    mix(static_cast<std::uint64_t>(receiver));
    mix(static_cast<std::uint64_t>(sender));
  }
  return h;
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols() || p_.rows() < 1) {
    throw std::invalid_argument("WeightMatrix: matrix must be square and nonempty");
  }
  const int n = static_cast<int>(p_.rows());
  for (int j = 0; j < n; ++j) {
    double col_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (p_(i, j) < 0.0) {
        throw std::invalid_argument("WeightMatrix: negative entry");
      }
      col_sum += p_(i, j);
    }
    if (std::abs(col_sum - 1.0) > 1e-12) {
      throw std::invalid_argument("WeightMatrix: column sums must equal 1");
    }
    if (!(p_(j, j) > 0.0)) {
      throw std::invalid_argument("WeightMatrix: diagonal entries must be positive");
    }
  }
}

WeightMatrix default_weights(const Digraph& g) {
  if (!is_strongly_connected(g)) {
    throw std::invalid_argument("default_weights: graph must be strongly connected");
  }
  const int n = g.node_count();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const double w = 1.0 / (1.0 + g.out_degree(j));
    p(j, j) = w;
    for (int i : g.out_neighbors(j)) {
      p(i, j) = w;
    }
  }
  return WeightMatrix(std::move(p));
}

int diameter_upper_bound(const NetworkBound& nb) {
  if (nb.n_prime < 2) {
    throw std::invalid_argument("diameter_upper_bound: n_prime must be >= 2");
  }
  return nb.n_prime - 1;
}

}  // namespace dlasftc
