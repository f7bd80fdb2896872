#pragma once

// Markov-branching trees: recursive sampling from a splitting kernel, the
// natural node measure, leaf labeling, reduced marginals spanned by labeled
// leaves, and the bivariate size/type chain followed by a tagged leaf or a
// measure-tagged vertex. Trees are stored in an arena with contiguous child
// ranges (nodes appear in breadth-first order).

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "mbfrag/kernels.hpp"
#include "mbfrag/parallel.hpp"
#include "mbfrag/partitions.hpp"
#include "mbfrag/stats.hpp"

namespace mbfrag {

struct NodeCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MBTree {
  struct Node {
    std::int64_t size = 0;
    std::int32_t type = 0;
    std::int32_t parent = -1;
    std::int32_t first_child = -1;
    std::int32_t n_children = 0;
    std::int32_t depth = 0;
  };
  std::vector<Node> nodes;
  // leaf labels: label[v] in 1..n for labeled leaves, 0 otherwise
  std::vector<std::int32_t> label;

  std::int32_t height() const {
    std::int32_t h = 0;
    for (const auto& nd : nodes) h = std::max(h, nd.depth);
    return h;
  }
  std::int64_t missing_mass(std::int32_t v) const {
    std::int64_t s = 0;
    for (std::int32_t c = 0; c < nodes[v].n_children; ++c)
      s += nodes[nodes[v].first_child + c].size;
    return nodes[v].size - s;
  }
  std::int32_t node_of_label(std::int32_t lab) const {
    for (std::size_t v = 0; v < label.size(); ++v)
      if (label[v] == lab) return static_cast<std::int32_t>(v);
    throw std::out_of_range("MBTree: unknown leaf label");
  }
};

struct SampleOptions {
  std::int64_t max_nodes = 100'000'000;
  bool label_leaves = false;  // Fisher-Yates labeling of childless nodes
};

// Builds the tree generation by generation: a node of (size, type) draws its
// children from the kernel, recursion stops at empty draws.
inline MBTree sample_mb_tree(const SplittingKernel& kernel, std::int64_t n, std::int32_t type,
                             Rng& rng, const SampleOptions& opt = {}) {
  if (n < 1) throw std::invalid_argument("sample_mb_tree: n must be >= 1");
  MBTree t;
  t.nodes.push_back({n, type, -1, -1, 0, 0});
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    DiscreteTypedPartition children = kernel.sample(t.nodes[v].size, t.nodes[v].type, rng);
    if (children.parts.empty()) continue;
    if (static_cast<std::int64_t>(t.nodes.size() + children.parts.size()) > opt.max_nodes)
      throw NodeCapExceeded("sample_mb_tree: node cap exceeded");
    t.nodes[v].first_child = static_cast<std::int32_t>(t.nodes.size());
    t.nodes[v].n_children = static_cast<std::int32_t>(children.parts.size());
    for (const Part& p : children.parts)
      t.nodes.push_back({p.size, p.type, static_cast<std::int32_t>(v), -1, 0,
                         static_cast<std::int32_t>(t.nodes[v].depth + 1)});
  }
  if (opt.label_leaves) {
    std::vector<std::int32_t> leaves;
    for (std::size_t v = 0; v < t.nodes.size(); ++v)
      if (t.nodes[v].n_children == 0) leaves.push_back(static_cast<std::int32_t>(v));
    rng.shuffle(leaves);
    t.label.assign(t.nodes.size(), 0);
    for (std::size_t i = 0; i < leaves.size(); ++i)
      t.label[leaves[i]] = static_cast<std::int32_t>(i + 1);
  }
  return t;
}

struct WeightedNode {
  std::int32_t node = 0;
  double mass = 0;
};

// The natural probability measure: a node of size k whose children sum to
// k - d carries mass d/n.
inline std::vector<WeightedNode> leaf_mass_measure(const MBTree& t, std::int64_t n) {
  std::vector<WeightedNode> out;
  double total = 0;
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    std::int64_t d = t.missing_mass(static_cast<std::int32_t>(v));
    if (d > 0) {
      double mass = static_cast<double>(d) / static_cast<double>(n);
      out.push_back({static_cast<std::int32_t>(v), mass});
      total += mass;
    }
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::runtime_error("leaf_mass_measure: masses do not sum to 1");
  return out;
}

// Smallest subtree containing the root and the leaves labeled by B. Shape is
// preserved (no path contraction); node sizes, types and the B-labels are
// kept. Graph distances in the output equal those in the input.
inline MBTree reduced_marginal(const MBTree& t, const std::vector<std::int32_t>& B) {
  if (t.label.empty()) throw std::invalid_argument("reduced_marginal: tree has no leaf labels");
  std::vector<char> keep(t.nodes.size(), 0);
  for (std::int32_t lab : B) {
    std::int32_t v = t.node_of_label(lab);
    while (v != -1 && !keep[v]) {
      keep[v] = 1;
      v = t.nodes[v].parent;
    }
  }
  std::vector<std::int32_t> remap(t.nodes.size(), -1);
  MBTree out;
  out.label.clear();
  // nodes are in BFS order, so parents precede children
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    if (!keep[v]) continue;
    MBTree::Node nd = t.nodes[v];
    std::int32_t parent = nd.parent == -1 ? -1 : remap[nd.parent];
    remap[v] = static_cast<std::int32_t>(out.nodes.size());
    out.nodes.push_back({nd.size, nd.type, parent, -1, 0, nd.depth});
    bool in_B = false;
    for (std::int32_t lab : B) in_B = in_B || t.label[v] == lab;
    out.label.push_back(in_B ? t.label[v] : 0);
  }
  for (std::size_t v = 0; v < out.nodes.size(); ++v) {
    std::int32_t p = out.nodes[v].parent;
    if (p == -1) continue;
    if (out.nodes[p].first_child == -1) out.nodes[p].first_child = static_cast<std::int32_t>(v);
    out.nodes[p].n_children++;
  }
  return out;
}

// Plain-text dump: one node per line, "parent size type", parent -1 at root.
inline void dump_tree(const MBTree& t, std::ostream& os) {
  for (const auto& nd : t.nodes)
    os << nd.parent << ' ' << nd.size << ' ' << nd.type << '\n';
}

// --- tagged chains -----------------------------------------------------------

// One-step transition probability of the size/type chain of the block holding
// a tagged leaf: p_{m,j}(l,k) = sum_q q_m^{(j)}(lam) * (l/m) * mult_{(l,k)}(lam)
// for m >= 2, and the chain is absorbed at size 1.
inline double tagged_transition_prob(const SplittingKernel& kernel, std::int64_t m,
                                     std::int32_t j, std::int64_t l, std::int32_t k) {
  if (m < 1) throw std::invalid_argument("tagged_transition_prob: m must be >= 1");
  if (m == 1) return (l == 1 && k == j) ? 1.0 : 0.0;
  auto sup = kernel.support(m, j);
  if (!sup) throw std::invalid_argument("tagged_transition_prob: kernel support not enumerable");
  double p = 0;
  for (const auto& e : *sup) {
    std::int64_t mult = 0;
    for (const Part& part : e.partition.parts)
      if (part.size == l && part.type == k) ++mult;
    p += e.prob * (static_cast<double>(l) / static_cast<double>(m)) * static_cast<double>(mult);
  }
  return p;
}

// Full one-step row as a map (l,k) -> probability.
inline std::map<std::pair<std::int64_t, std::int32_t>, double> tagged_transition_row(
    const SplittingKernel& kernel, std::int64_t m, std::int32_t j) {
  std::map<std::pair<std::int64_t, std::int32_t>, double> row;
  if (m == 1) {
    row[{1, j}] = 1.0;
    return row;
  }
  auto sup = kernel.support(m, j);
  if (!sup) throw std::invalid_argument("tagged_transition_row: kernel support not enumerable");
  for (const auto& e : *sup)
    for (const Part& part : e.partition.parts)
      row[{part.size, part.type}] +=
          e.prob * static_cast<double>(part.size) / static_cast<double>(m);
  return row;
}

struct TaggedChainState {
  std::int64_t size = 0;
  std::int32_t type = 0;
};

struct TaggedChainPath {
  std::vector<TaggedChainState> states;  // states[0] = (n, i), last has size 1
  std::int64_t absorption_step = 0;      // D_1
};

// Samples the tagged-leaf chain directly from the kernel by size-biased part
// selection; O(absorption time) per path, no tree is built. Requires a
// conservative, death-coupled kernel.
inline TaggedChainPath sample_tagged_chain(const SplittingKernel& kernel, std::int64_t n,
                                           std::int32_t type, Rng& rng,
                                           std::int64_t step_cap = 100'000'000) {
  TaggedChainPath path;
  TaggedChainState s{n, type};
  path.states.push_back(s);
  while (s.size > 1) {
    if (path.absorption_step >= step_cap)
      throw std::runtime_error("sample_tagged_chain: step cap exceeded");
    DiscreteTypedPartition lam = kernel.sample(s.size, s.type, rng);
    if (!lam.conservative())
      throw std::runtime_error("sample_tagged_chain: kernel draw is not conservative");
    std::int64_t u = static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(s.size)));
    std::int64_t acc = 0;
    for (const Part& part : lam.parts) {
      acc += part.size;
      if (u < acc) {
        s = {part.size, part.type};
        break;
      }
    }
    path.states.push_back(s);
    path.absorption_step++;
  }
  return path;
}

// Generations until two exchangeable tagged leaves are separated: the leaf
// pair descends jointly, staying together with probability (s-1)/(m-1) given
// the first leaf's size-biased part of size s. Conservative, death-coupled
// kernels only.
inline std::int64_t sample_pair_split_time(const SplittingKernel& kernel, std::int64_t n,
                                           std::int32_t type, Rng& rng,
                                           std::int64_t step_cap = 100'000'000) {
  if (n < 2) throw std::invalid_argument("sample_pair_split_time: n must be >= 2");
  std::int64_t m = n;
  std::int32_t j = type;
  std::int64_t steps = 0;
  for (;;) {
    if (steps >= step_cap) throw std::runtime_error("sample_pair_split_time: step cap exceeded");
    DiscreteTypedPartition lam = kernel.sample(m, j, rng);
    if (!lam.conservative())
      throw std::runtime_error("sample_pair_split_time: kernel draw is not conservative");
    std::int64_t u = static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(m)));
    std::int64_t acc = 0;
    const Part* sel = &lam.parts.back();
    for (const Part& part : lam.parts) {
      acc += part.size;
      if (u < acc) {
        sel = &part;
        break;
      }
    }
    ++steps;
    std::int64_t u2 =
        static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(m - 1)));
    if (u2 >= sel->size - 1) return steps;  // separated at this generation
    m = sel->size;
    j = sel->type;
  }
}

struct MuTaggedWalk {
  std::int64_t depth = 0;                // graph distance from the root
  std::vector<std::int32_t> type_path;   // types of the visited vertices
};

// Walk toward a vertex drawn from the natural node measure: at (m, j) draw a
// children partition, stop here with probability (m - sum) / m, otherwise
// descend into a child chosen proportionally to its size.
inline MuTaggedWalk sample_mu_tagged_walk(const SplittingKernel& kernel, std::int64_t n,
                                          std::int32_t type, Rng& rng,
                                          std::int64_t step_cap = 100'000'000) {
  MuTaggedWalk walk;
  std::int64_t m = n;
  std::int32_t j = type;
  for (;;) {
    walk.type_path.push_back(j);
    if (walk.depth >= step_cap) throw std::runtime_error("sample_mu_tagged_walk: step cap exceeded");
    DiscreteTypedPartition lam = kernel.sample(m, j, rng);
    std::int64_t child_sum = lam.sum_sizes();
    std::int64_t u = static_cast<std::int64_t>(rng.uniform_below(static_cast<std::uint64_t>(m)));
    if (u >= child_sum) return walk;  // absorbed at this vertex
    std::int64_t acc = 0;
    for (const Part& part : lam.parts) {
      acc += part.size;
      if (u < acc) {
        m = part.size;
        j = part.type;
        break;
      }
    }
    walk.depth++;
  }
}

// --- splitting-measure functionals --------------------------------------------

enum class FunctionalMode { kCritical, kMixing };

struct FunctionalEstimate {
  double mean = 0;
  double se = 0;
};

// Monte Carlo estimate of n^gamma * E[(1 - s1 1{i1=i}) f(lam/n)] (critical) or
// n^gamma * E[(1 - s1) f(lam/n)] (mixing, types ignored by the indicator).
template <class F>
FunctionalEstimate split_functional_estimate(const SplittingKernel& kernel, std::int64_t n,
                                             std::int32_t type, F&& f, FunctionalMode mode,
                                             double gamma, std::int64_t samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("split_functional_estimate: samples must be >= 1");
  std::vector<double> values(static_cast<std::size_t>(samples));
  const double scale = std::pow(static_cast<double>(n), gamma);
  for (std::int64_t r = 0; r < samples; ++r) {
    DiscreteTypedPartition lam = kernel.sample(n, type, rng);
    MassPartition s = mass_partition_from_discrete(lam);
    double weight;
    if (mode == FunctionalMode::kCritical)
      weight = 1.0 - (s.i1() == type ? s.s1() : 0.0);
    else
      weight = 1.0 - s.s1();
    values[static_cast<std::size_t>(r)] = scale * weight * f(s);
  }
  MeanSE ms = mean_and_se(values);
  return {ms.mean, ms.se};
}

}  // namespace mbfrag
