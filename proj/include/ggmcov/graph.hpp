#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "ggmcov/errors.hpp"

namespace ggmcov {

/// Decomposable undirected graph given as a perfect clique sequence, plus
/// everything derived from it: separators S_k = H_{k-1} ∩ C_k, the mapping
/// q(k) = min{ j : S_k ⊆ C_j }, and the inverse-image sets Q_j = { k : q(k) = j }.
///
/// Node ids are 1-based (1..N). Clique and separator members are kept in
/// canonical ascending order; matrix blocks are always indexed in that order.
/// Clique indices k in the public accessors are 1-based (C_1..C_K).
struct DecomposableGraph {
  int n_nodes = 0;
  std::vector<std::vector<int>> cliques;     // [k-1] = C_k, sorted
  std::vector<std::vector<int>> histories;   // [k-1] = H_k = C_1 ∪ ... ∪ C_k
  std::vector<std::vector<int>> separators;  // [k-1] = S_k for k >= 2; [0] empty
  std::vector<int> q_map;                    // [k-1] = q(k) for k >= 2; [0] = 0
  std::vector<std::vector<int>> q_sets;      // [j-1] = Q_j, ascending

  int num_cliques() const { return static_cast<int>(cliques.size()); }
  const std::vector<int>& clique(int k) const { return cliques.at(k - 1); }
  const std::vector<int>& history(int k) const { return histories.at(k - 1); }
  const std::vector<int>& separator(int k) const { return separators.at(k - 1); }
  int q(int k) const { return q_map.at(k - 1); }
  const std::vector<int>& q_set(int j) const { return q_sets.at(j - 1); }
};

namespace detail {

inline std::vector<int> sorted_unique(const std::vector<int>& v) {
  std::vector<int> out = v;
  std::sort(out.begin(), out.end());
  return out;
}

inline bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
  // a, b sorted ascending
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline std::vector<int> intersect(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Positions of each element of `u` within `v` (both sorted ascending,
/// u ⊆ v). Throws IndexMismatch when u is not contained in v.
inline std::vector<int> positions_in(const std::vector<int>& u,
                                     const std::vector<int>& v) {
  std::vector<int> pos;
  pos.reserve(u.size());
  for (int id : u) {
    auto it = std::lower_bound(v.begin(), v.end(), id);
    require(it != v.end() && *it == id, Errc::IndexMismatch,
            "element " + std::to_string(id) + " not contained in target set");
    pos.push_back(static_cast<int>(it - v.begin()));
  }
  return pos;
}

/// Zero-fill embedding: places a |U|x|U| matrix into a |V|x|V| zero matrix at
/// the positions of U's elements within V (both index sets sorted ascending).
inline Eigen::MatrixXd zero_fill(const Eigen::MatrixXd& m,
                                 const std::vector<int>& u,
                                 const std::vector<int>& v) {
  require(m.rows() == m.cols() &&
              m.rows() == static_cast<Eigen::Index>(u.size()),
          Errc::IndexMismatch, "zero_fill: matrix dimension must equal |U|");
  const std::vector<int> pos = positions_in(u, v);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.size(), v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < u.size(); ++j)
      out(pos[i], pos[j]) = m(i, j);
  return out;
}

/// Extracts the principal submatrix of `m` at (0-based) positions `pos`.
inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m,
                                 const std::vector<int>& pos) {
  Eigen::MatrixXd out(pos.size(), pos.size());
  for (std::size_t i = 0; i < pos.size(); ++i)
    for (std::size_t j = 0; j < pos.size(); ++j)
      out(i, j) = m(pos[i], pos[j]);
  return out;
}

/// Validates a clique sequence as a perfect sequence and derives separators,
/// histories, q and Q. The clique order is the input contract; no reordering
/// is attempted. Empty separators (disconnected graphs) are rejected: the
/// precision/determinant factorizations need a Σ_{S_k} term for every k >= 2.
inline DecomposableGraph validate_perfect_sequence(
    const std::vector<std::vector<int>>& cliques, int n_nodes) {
  require(!cliques.empty(), Errc::BadShape, "clique sequence must be non-empty");
  require(n_nodes >= 1, Errc::BadShape, "n_nodes must be >= 1");

  DecomposableGraph g;
  g.n_nodes = n_nodes;
  g.cliques.reserve(cliques.size());
  std::vector<bool> covered(static_cast<std::size_t>(n_nodes) + 1, false);
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    require(!cliques[i].empty(), Errc::BadShape,
            "clique " + std::to_string(i + 1) + " is empty");
    std::vector<int> c = detail::sorted_unique(cliques[i]);
    require(c.size() == cliques[i].size(), Errc::NodeCoverage,
            "clique " + std::to_string(i + 1) + " has duplicate members");
    require(c.front() >= 1 && c.back() <= n_nodes, Errc::NodeCoverage,
            "clique " + std::to_string(i + 1) +
                " references a node outside 1.." + std::to_string(n_nodes));
    for (int id : c) covered[static_cast<std::size_t>(id)] = true;
    g.cliques.push_back(std::move(c));
  }
  for (int id = 1; id <= n_nodes; ++id)
    require(covered[static_cast<std::size_t>(id)], Errc::NodeCoverage,
            "node " + std::to_string(id) + " is in no clique");

  const int K = g.num_cliques();
  g.separators.assign(K, {});
  g.q_map.assign(K, 0);
  g.q_sets.assign(K, {});
  g.histories.reserve(K);
  g.histories.push_back(g.cliques[0]);  // H_1

  for (int k = 2; k <= K; ++k) {
    const std::vector<int>& history = g.histories.back();
    std::vector<int> sep = detail::intersect(history, g.clique(k));
    require(!sep.empty(), Errc::EmptySeparator,
            "separator S_" + std::to_string(k) +
                " is empty (disconnected clique sequence)");
    int q = 0;
    for (int j = 1; j < k; ++j) {
      if (detail::is_subset(sep, g.clique(j))) {
        q = j;
        break;
      }
    }
    require(q != 0, Errc::NotDecomposable,
            "running-intersection property violated at clique k=" +
                std::to_string(k));
    g.separators[k - 1] = std::move(sep);
    g.q_map[k - 1] = q;
    g.q_sets[q - 1].push_back(k);

    std::vector<int> merged;
    std::set_union(history.begin(), history.end(), g.clique(k).begin(),
                   g.clique(k).end(), std::back_inserter(merged));
    g.histories.push_back(std::move(merged));
  }
  return g;
}

/// Chain of K cliques of size M, consecutive cliques overlapping in exactly
/// s nodes. N = K*M - (K-1)*s and q(k) = k-1.
inline DecomposableGraph chain_graph(int n_cliques, int clique_size,
                                     int separator_size) {
  require(n_cliques >= 1, Errc::BadShape, "chain: K must be >= 1");
  require(clique_size >= 1, Errc::BadShape, "chain: M must be >= 1");
  if (n_cliques > 1)
    require(separator_size > 0 && separator_size < clique_size, Errc::BadShape,
            "chain: need 0 < s < M, got s=" + std::to_string(separator_size) +
                ", M=" + std::to_string(clique_size));

  const int step = clique_size - separator_size;
  std::vector<std::vector<int>> cliques;
  cliques.reserve(n_cliques);
  for (int k = 0; k < n_cliques; ++k) {
    std::vector<int> c(clique_size);
    for (int i = 0; i < clique_size; ++i) c[i] = k * step + i + 1;
    cliques.push_back(std::move(c));
  }
  const int n_nodes =
      n_cliques == 1 ? clique_size : n_cliques * clique_size - (n_cliques - 1) * separator_size;
  return validate_perfect_sequence(cliques, n_nodes);
}

/// Binary tree of cliques filled level by level (clique k attaches to clique
/// floor(k/2)). Each child takes s distinct attachment nodes from its parent:
/// the root offers all of its M nodes, every other clique offers its M-s
/// fresh nodes. The remaining M-s members of a child are fresh node ids.
inline DecomposableGraph binary_tree_graph(int n_cliques, int clique_size,
                                           int separator_size) {
  require(n_cliques >= 1, Errc::BadShape, "tree: K must be >= 1");
  require(clique_size >= 1, Errc::BadShape, "tree: M must be >= 1");
  if (n_cliques > 1)
    require(separator_size > 0 && separator_size < clique_size, Errc::BadShape,
            "tree: need 0 < s < M, got s=" + std::to_string(separator_size) +
                ", M=" + std::to_string(clique_size));

  std::vector<std::vector<int>> cliques;
  cliques.reserve(n_cliques);
  // attachment pools: nodes of each clique still available to its children
  std::vector<std::vector<int>> pool(n_cliques);

  std::vector<int> root(clique_size);
  for (int i = 0; i < clique_size; ++i) root[i] = i + 1;
  pool[0] = root;
  cliques.push_back(std::move(root));
  int next_id = clique_size + 1;

  for (int k = 2; k <= n_cliques; ++k) {
    const int parent = k / 2;
    auto& avail = pool[parent - 1];
    require(static_cast<int>(avail.size()) >= separator_size, Errc::BadShape,
            "tree: clique " + std::to_string(parent) +
                " has insufficient distinct attachment nodes for its children");
    std::vector<int> c(avail.begin(), avail.begin() + separator_size);
    avail.erase(avail.begin(), avail.begin() + separator_size);
    std::vector<int> fresh;
    for (int i = 0; i < clique_size - separator_size; ++i) fresh.push_back(next_id++);
    pool[k - 1] = fresh;
    c.insert(c.end(), fresh.begin(), fresh.end());
    std::sort(c.begin(), c.end());
    cliques.push_back(std::move(c));
  }
  return validate_perfect_sequence(cliques, next_id - 1);
}

}  // namespace ggmcov
