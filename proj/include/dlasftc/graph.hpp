#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace dlasftc {

// Directed communication topology. An edge (receiver, sender) means the
// receiver can read the sender's messages; self-edges are excluded and
// every node implicitly listens to itself.
class Digraph {
 public:
  // Edges are 0-indexed (receiver, sender) pairs. Throws std::invalid_argument
  // on self-edges, out-of-range endpoints, or node_count < 1.
  Digraph(int node_count, std::vector<std::pair<int, int>> edges);

  int node_count() const { return node_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool has_edge(int receiver, int sender) const;

  const std::vector<int>& in_neighbors(int i) const { return in_neighbors_.at(i); }
  const std::vector<int>& out_neighbors(int i) const { return out_neighbors_.at(i); }
  int in_degree(int i) const { return static_cast<int>(in_neighbors_.at(i).size()); }
  int out_degree(int i) const { return static_cast<int>(out_neighbors_.at(i).size()); }

  // Plain text edge list: first line N, then one "receiver sender" pair per
  // line, whitespace separated, 1-indexed.
  std::string to_edge_list() const;
  static Digraph from_edge_list(std::istream& in);
  static Digraph from_edge_list(const std::string& text);

 private:
  int node_count_ = 0;
  std::vector<std::pair<int, int>> edges_;  // sorted (receiver, sender)
  std::vector<std::vector<int>> in_neighbors_;
  std::vector<std::vector<int>> out_neighbors_;
};

// Directed Hamiltonian cycle over a random node permutation, plus every other
// ordered pair independently with probability edge_density. Strongly connected
// by construction and deterministic per seed.
Digraph random_strongly_connected(int node_count, double edge_density,
                                  std::uint64_t seed);

// True iff every node reaches every other node along directed edges.
bool is_strongly_connected(const Digraph& g);

// Stable fingerprint of the topology (node count + sorted edge list), used in
// run metadata so experiments can be matched to the exact graph they ran on.
std::uint64_t topology_hash(const Digraph& g);

// Column-stochastic weight matrix conforming to a digraph: entry (i, j) is
// the weight node i applies to messages from node j.
class WeightMatrix {
 public:
  // Throws std::invalid_argument unless the matrix is nonnegative with unit
  // column sums (1e-12) and a strictly positive diagonal.
  explicit WeightMatrix(Eigen::MatrixXd p);

  int size() const { return static_cast<int>(p_.rows()); }
  const Eigen::MatrixXd& matrix() const { return p_; }
  double operator()(int i, int j) const { return p_(i, j); }

 private:
  Eigen::MatrixXd p_;
};

// p_ij = 1 / (1 + out_degree(j)) for i in out_neighbors(j) or i == j, zero
// otherwise. Requires a strongly connected graph (that plus the positive
// diagonal makes the matrix primitive).
WeightMatrix default_weights(const Digraph& g);

// Known upper bound on the network size, n' >= N.
struct NetworkBound {
  int n_prime = 0;
};

// n' - 1: an upper bound on the diameter of any strongly connected digraph
// with at most n' nodes.
int diameter_upper_bound(const NetworkBound& nb);

}  // namespace dlasftc
