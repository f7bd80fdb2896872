#pragma once

// Growing random trees built by gluing bricks from a finite alphabet onto a
// uniform edge of the current tree. The brick set (planted descendant
// subtrees of the initial tree and the alphabet trees, up to isomorphism)
// provides the type space; branchpoints created by gluing are colored red
// and red-descendant counts provide the sizes, which turns the reduced tree
// into a Markov-branching tree. Also here: Polya urns with random
// increments and their simplex limits, the index of the last brick glued
// next to the root, the associated limit weights (closed form when all
// alphabet trees have the same number of edges, Monte Carlo otherwise), and
// the mixture components of the limiting splitting measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbfrag/kernels.hpp"
#include "mbfrag/mb_tree.hpp"
#include "mbfrag/partitions.hpp"
#include "mbfrag/rng.hpp"
#include <nlohmann/json.hpp>

namespace mbfrag {

struct RootedTree {
  // parent[0] == -1 (root); in input trees parents precede children
  std::vector<std::int32_t> parent;

  std::int32_t n_vertices() const { return static_cast<std::int32_t>(parent.size()); }
  std::int64_t n_edges() const { return static_cast<std::int64_t>(parent.size()) - 1; }

  std::vector<std::vector<std::int32_t>> children() const {
    std::vector<std::vector<std::int32_t>> ch(parent.size());
    for (std::size_t v = 1; v < parent.size(); ++v)
      ch[parent[v]].push_back(static_cast<std::int32_t>(v));
    return ch;
  }
};

inline RootedTree rooted_tree_from_json(const nlohmann::json& j) {
  RootedTree t;
  t.parent = j.get<std::vector<std::int32_t>>();
  if (t.parent.empty() || t.parent[0] != -1)
    throw std::invalid_argument("tree JSON: parent array must start with -1 at the root");
  for (std::size_t v = 1; v < t.parent.size(); ++v)
    if (t.parent[v] < 0 || t.parent[v] >= static_cast<std::int32_t>(v))
      throw std::invalid_argument("tree JSON: parents must precede children");
  return t;
}

// AHU-style canonical encoding of unordered rooted trees.
inline std::string ahu_code(const std::vector<std::vector<std::int32_t>>& children,
                            std::int32_t v) {
  std::vector<std::string> sub;
  for (std::int32_t c : children[v]) sub.push_back(ahu_code(children, c));
  std::sort(sub.begin(), sub.end());
  std::string out = "(";
  for (const auto& s : sub) out += s;
  out += ")";
  return out;
}

inline std::string ahu_code(const RootedTree& t) { return ahu_code(t.children(), 0); }

struct GrowthSpec {
  RootedTree initial;  // planted: root has degree 1
  std::vector<std::pair<RootedTree, double>> alphabet;

  double mean_edges() const {
    double e = 0;
    for (const auto& [tree, q] : alphabet) e += q * static_cast<double>(tree.n_edges());
    return e;
  }
};

inline GrowthSpec growth_spec_from_json(const nlohmann::json& j) {
  GrowthSpec spec;
  spec.initial = rooted_tree_from_json(j.at("initial"));
  for (const auto& entry : j.at("alphabet")) {
    RootedTree t = rooted_tree_from_json(entry.at("tree"));
    double q = entry.at("p").get<double>();
    spec.alphabet.emplace_back(std::move(t), q);
  }
  return spec;
}

inline void validate_growth_spec(const GrowthSpec& spec) {
  std::int32_t deg = 0;
  for (std::size_t v = 1; v < spec.initial.parent.size(); ++v)
    if (spec.initial.parent[v] == 0) ++deg;
  if (deg != 1) throw std::invalid_argument("growth spec: initial tree root must have degree 1");
  double qs = 0;
  for (const auto& [tree, q] : spec.alphabet) {
    if (q < 0) throw std::invalid_argument("growth spec: negative alphabet probability");
    qs += q;
  }
  if (std::abs(qs - 1.0) > 1e-12)
    throw std::invalid_argument("growth spec: alphabet probabilities must sum to 1");
  if (!(spec.mean_edges() > 0)) throw std::invalid_argument("growth spec: E[N] must be positive");
}

struct Brick {
  RootedTree shape;  // planted: vertex 0 is the root, vertex 1 is the ancestor
  std::string code;
  std::int64_t n_edges = 0;
  std::int32_t ancestor_outdeg = 0;               // p_j
  std::vector<Part> child_parts;                  // ancestor's subtrees: (edges, type), ranked
  std::vector<std::int32_t> vertex_type;          // type of every non-root vertex of `shape`
};

struct AlphabetDecomp {
  RootedTree shape;
  std::int64_t n_edges = 0;
  double q = 0;
  std::vector<Part> root_parts;           // root's subtrees: (edges, type), ranked
  std::vector<std::int32_t> vertex_type;  // type of every non-root vertex of `shape`
};

struct BrickSet {
  std::vector<Brick> bricks;  // bricks[j-1] carries type j; bricks[0] is the initial tree
  std::vector<AlphabetDecomp> alphabet;
  std::map<std::string, std::int32_t> type_of_code;  // 1-based
  double mean_edges = 0;

  std::int32_t kappa() const { return static_cast<std::int32_t>(bricks.size()); }
  double gamma() const { return 1.0 / (mean_edges + 1.0); }
  bool equal_alphabet_edges() const {
    for (const auto& ad : alphabet)
      if (ad.n_edges != alphabet.front().n_edges) return false;
    return true;
  }
  // law of N + 1 (brick edge count plus one), the urn increment
  void increment_law(std::vector<double>& values, std::vector<double>& probs) const {
    values.clear();
    probs.clear();
    for (const auto& ad : alphabet) {
      values.push_back(static_cast<double>(ad.n_edges + 1));
      probs.push_back(ad.q);
    }
  }
};

namespace detail {

// planted copy of the subtree rooted at v: vertex 0 new root, vertex 1 = v
inline RootedTree planted_subtree(const std::vector<std::vector<std::int32_t>>& children,
                                  std::int32_t v) {
  RootedTree out;
  out.parent.push_back(-1);
  std::vector<std::pair<std::int32_t, std::int32_t>> queue{{v, 0}};
  for (std::size_t h = 0; h < queue.size(); ++h) {
    auto [u, np] = queue[h];
    out.parent.push_back(np);
    std::int32_t nv = static_cast<std::int32_t>(out.parent.size()) - 1;
    for (std::int32_t c : children[u]) queue.push_back({c, nv});
  }
  return out;
}

inline std::int64_t subtree_vertex_count(const std::vector<std::vector<std::int32_t>>& children,
                                         std::int32_t v) {
  std::int64_t cnt = 0;
  std::vector<std::int32_t> stack{v};
  while (!stack.empty()) {
    std::int32_t u = stack.back();
    stack.pop_back();
    ++cnt;
    for (std::int32_t c : children[u]) stack.push_back(c);
  }
  return cnt;
}

}  // namespace detail

inline BrickSet build_brick_set(const GrowthSpec& spec) {
  validate_growth_spec(spec);
  BrickSet bs;
  bs.mean_edges = spec.mean_edges();

  auto ch0 = spec.initial.children();
  std::string code0 = ahu_code(ch0, ch0[0][0]);

  std::map<std::string, RootedTree> found;
  auto scan = [&](const RootedTree& t) {
    auto ch = t.children();
    for (std::int32_t v = 1; v < t.n_vertices(); ++v) {
      std::string code = ahu_code(ch, v);
      if (!found.count(code)) found[code] = detail::planted_subtree(ch, v);
    }
  };
  scan(spec.initial);
  for (const auto& [tree, q] : spec.alphabet) scan(tree);

  std::vector<std::string> order;
  order.push_back(code0);
  for (const auto& [code, shape] : found)
    if (code != code0) order.push_back(code);
  for (std::size_t i = 0; i < order.size(); ++i)
    bs.type_of_code[order[i]] = static_cast<std::int32_t>(i) + 1;

  auto type_all_vertices = [&](const RootedTree& t) {
    auto ch = t.children();
    std::vector<std::int32_t> types(t.n_vertices(), 0);
    for (std::int32_t v = 1; v < t.n_vertices(); ++v)
      types[v] = bs.type_of_code.at(ahu_code(ch, v));
    return types;
  };

  for (const std::string& code : order) {
    Brick b;
    b.shape = found.at(code);
    b.code = code;
    b.n_edges = b.shape.n_edges();
    auto ch = b.shape.children();
    std::int32_t anc = ch[0][0];
    b.ancestor_outdeg = static_cast<std::int32_t>(ch[anc].size());
    std::vector<Part> parts;
    for (std::int32_t c : ch[anc])
      parts.push_back({detail::subtree_vertex_count(ch, c), bs.type_of_code.at(ahu_code(ch, c))});
    std::stable_sort(parts.begin(), parts.end(), part_before);
    b.child_parts = std::move(parts);
    b.vertex_type = type_all_vertices(b.shape);
    bs.bricks.push_back(std::move(b));
  }

  for (const auto& [tree, q] : spec.alphabet) {
    AlphabetDecomp ad;
    ad.shape = tree;
    ad.n_edges = tree.n_edges();
    ad.q = q;
    auto ch = tree.children();
    std::vector<Part> parts;
    for (std::int32_t c : ch[0])
      parts.push_back({detail::subtree_vertex_count(ch, c), bs.type_of_code.at(ahu_code(ch, c))});
    std::stable_sort(parts.begin(), parts.end(), part_before);
    ad.root_parts = std::move(parts);
    ad.vertex_type = type_all_vertices(tree);
    bs.alphabet.push_back(std::move(ad));
  }
  return bs;
}

// --- the gluing chain ---------------------------------------------------------

struct GrowthState {
  std::vector<std::int32_t> parent;
  std::vector<std::int32_t> type;
  std::vector<char> red;
  std::int32_t ancestor = 1;  // the unique child of the root
  std::int64_t steps = 0;
  std::int64_t last_root_glue = 0;  // J_n; 0 when no brick was glued next to the root
  std::int32_t start_type = 1;

  std::int64_t n_edges() const { return static_cast<std::int64_t>(parent.size()) - 1; }
  std::int64_t red_count() const {
    std::int64_t c = 0;
    for (char r : red) c += r;
    return c;
  }
};

inline GrowthState growth_start(const BrickSet& bs, std::int32_t start_type) {
  if (start_type < 1 || start_type > bs.kappa())
    throw std::out_of_range("growth_start: type out of range");
  const Brick& b = bs.bricks[start_type - 1];
  GrowthState st;
  st.parent = b.shape.parent;
  st.red.assign(st.parent.size(), 0);
  st.type = b.vertex_type;
  st.ancestor = 1;  // planted_subtree puts the ancestor right after the root
  st.start_type = start_type;
  return st;
}

inline void grow_step(const BrickSet& bs, GrowthState& st, Rng& rng) {
  std::int32_t u = 1 + static_cast<std::int32_t>(rng.uniform_below(st.parent.size() - 1));
  std::size_t x = 0;
  if (bs.alphabet.size() > 1) {
    double uq = rng.uniform();
    double acc = 0;
    for (std::size_t i = 0; i < bs.alphabet.size(); ++i) {
      acc += bs.alphabet[i].q;
      if (uq < acc) {
        x = i;
        break;
      }
      x = i;
    }
  }
  const AlphabetDecomp& ad = bs.alphabet[x];
  // subdivide the edge above u with a red branchpoint carrying u's type
  std::int32_t w_vertex = static_cast<std::int32_t>(st.parent.size());
  st.parent.push_back(st.parent[u]);
  st.type.push_back(st.type[u]);
  st.red.push_back(1);
  bool on_root_edge = (u == st.ancestor);
  st.parent[u] = w_vertex;
  if (on_root_edge) {
    st.ancestor = w_vertex;
    st.last_root_glue = st.steps + 1;
  }
  // graft the brick, identifying its root with the branchpoint
  const RootedTree& tree = ad.shape;
  static thread_local std::vector<std::int32_t> remap;
  remap.assign(static_cast<std::size_t>(tree.n_vertices()), 0);
  remap[0] = w_vertex;
  for (std::int32_t v = 1; v < tree.n_vertices(); ++v) {
    remap[v] = static_cast<std::int32_t>(st.parent.size());
    st.parent.push_back(remap[tree.parent[v]]);
    st.type.push_back(ad.vertex_type[v]);
    st.red.push_back(0);
  }
  st.steps++;
}

inline GrowthState grow(const BrickSet& bs, std::int32_t start_type, std::int64_t steps,
                        Rng& rng) {
  GrowthState st = growth_start(bs, start_type);
  std::int64_t max_brick = 1;
  for (const auto& ad : bs.alphabet) max_brick = std::max<std::int64_t>(max_brick, ad.shape.n_vertices());
  std::size_t cap = st.parent.size() + static_cast<std::size_t>(steps * max_brick);
  st.parent.reserve(cap);
  st.type.reserve(cap);
  st.red.reserve(cap);
  for (std::int64_t k = 0; k < steps; ++k) grow_step(bs, st, rng);
  return st;
}

inline std::int64_t root_brick_index(const GrowthState& st) { return st.last_root_glue; }

namespace detail {

// children of every vertex in compressed layout: children of v are
// order[offset[v] .. offset[v+1])
struct CsrChildren {
  std::vector<std::int32_t> offset;
  std::vector<std::int32_t> child;

  explicit CsrChildren(const std::vector<std::int32_t>& parent) {
    const std::size_t n = parent.size();
    offset.assign(n + 1, 0);
    for (std::size_t v = 1; v < n; ++v) offset[static_cast<std::size_t>(parent[v]) + 1]++;
    for (std::size_t v = 1; v <= n; ++v) offset[v] += offset[v - 1];
    child.resize(n - 1);
    std::vector<std::int32_t> cursor(offset.begin(), offset.end() - 1);
    for (std::size_t v = 1; v < n; ++v)
      child[static_cast<std::size_t>(cursor[parent[v]]++)] = static_cast<std::int32_t>(v);
  }
};

// vertices in an order where parents precede children (parent indices are not
// monotone in a growth state, so index order does not work)
inline std::vector<std::int32_t> top_down_order(const CsrChildren& ch, std::int32_t root,
                                                std::size_t n) {
  std::vector<std::int32_t> order;
  order.reserve(n);
  order.push_back(root);
  for (std::size_t h = 0; h < order.size(); ++h) {
    std::int32_t v = order[h];
    for (std::int32_t e = ch.offset[v]; e < ch.offset[v + 1]; ++e) order.push_back(ch.child[e]);
  }
  return order;
}

}  // namespace detail

// Red-descendant counts (size of every vertex; red vertices count themselves).
inline std::vector<std::int64_t> red_sizes(const GrowthState& st) {
  const std::size_t n = st.parent.size();
  detail::CsrChildren ch(st.parent);
  std::vector<std::int32_t> order = detail::top_down_order(ch, 0, n);
  std::vector<std::int64_t> size(n, 0);
  for (std::size_t h = n; h-- > 0;) {
    std::int32_t v = order[h];
    size[v] += st.red[v] ? 1 : 0;
    if (v != 0) size[st.parent[v]] += size[v];
  }
  return size;
}

// Reduced tree: drop the root, its adjacent edge and every vertex of size 0.
// The result is a Markov-branching tree rooted at the ancestor, whose node
// sizes are red-descendant counts.
inline MBTree reduce_growth_tree(const BrickSet& bs, const GrowthState& st) {
  (void)bs;
  if (st.steps < 1) throw std::invalid_argument("reduce_growth_tree: need at least one red vertex");
  std::vector<std::int64_t> size = red_sizes(st);
  detail::CsrChildren ch(st.parent);

  MBTree t;
  t.nodes.push_back({size[st.ancestor], st.type[st.ancestor], -1, -1, 0, 0});
  std::vector<std::int32_t> origin{st.ancestor};
  std::vector<std::int32_t> kept_children;
  for (std::size_t h = 0; h < t.nodes.size(); ++h) {
    std::int32_t v = origin[h];
    kept_children.clear();
    for (std::int32_t e = ch.offset[v]; e < ch.offset[v + 1]; ++e)
      if (size[ch.child[e]] > 0) kept_children.push_back(ch.child[e]);
    std::sort(kept_children.begin(), kept_children.end(), [&](std::int32_t a, std::int32_t b) {
      if (size[a] != size[b]) return size[a] > size[b];
      if (st.type[a] != st.type[b]) return st.type[a] > st.type[b];
      return a < b;
    });
    if (kept_children.empty()) continue;
    t.nodes[h].first_child = static_cast<std::int32_t>(t.nodes.size());
    t.nodes[h].n_children = static_cast<std::int32_t>(kept_children.size());
    for (std::int32_t c : kept_children) {
      t.nodes.push_back({size[c], st.type[c], static_cast<std::int32_t>(h), -1, 0,
                         static_cast<std::int32_t>(t.nodes[h].depth + 1)});
      origin.push_back(c);
    }
  }
  return t;
}

// --- urn models -----------------------------------------------------------------

struct IncrementLaw {
  std::vector<double> values;
  std::vector<double> probs;  // empty probs with one value means deterministic

  double sample(Rng& rng) const {
    if (values.size() == 1) return values[0];
    double u = rng.uniform();
    double acc = 0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      acc += probs[i];
      if (u < acc) return values[i];
    }
    return values.back();
  }
  double mean() const {
    if (values.size() == 1) return values[0];
    double m = 0;
    for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probs[i];
    return m;
  }
};

inline IncrementLaw constant_increment(double beta) { return {{beta}, {1.0}}; }

inline IncrementLaw growth_increment_law(const BrickSet& bs) {
  IncrementLaw law;
  bs.increment_law(law.values, law.probs);
  return law;
}

// Runs the reinforced urn for `steps` draws and returns the normalized weight
// vector, a finite-horizon approximation of the simplex limit.
inline std::vector<double> urn_limit_sample(std::vector<double> weights,
                                            const IncrementLaw& increments, std::int64_t steps,
                                            Rng& rng) {
  for (double w : weights)
    if (!(w > 0)) throw std::invalid_argument("urn_limit_sample: weights must be positive");
  double total = 0;
  for (double w : weights) total += w;
  for (std::int64_t s = 0; s < steps; ++s) {
    double u = rng.uniform() * total;
    double acc = 0;
    std::size_t color = weights.size() - 1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) {
        color = i;
        break;
      }
    }
    double inc = increments.sample(rng);
    weights[color] += inc;
    total += inc;
  }
  for (double& w : weights) w /= total;
  return weights;
}

// --- index of the last brick glued next to the root -------------------------------

// Simulates J_n directly: the root edge is selected at step k+1 with
// probability 1/(edge count after k steps), independently of the tree shape.
inline std::int64_t sample_root_glue_index(const BrickSet& bs, std::int32_t type, std::int64_t n,
                                           Rng& rng) {
  IncrementLaw law = growth_increment_law(bs);
  double edges = static_cast<double>(bs.bricks[type - 1].n_edges);
  std::int64_t j = 0;
  for (std::int64_t k = 1; k <= n; ++k) {
    if (rng.uniform() * edges < 1.0) j = k;
    edges += law.sample(rng);
  }
  return j;
}

// --- limit weights ell_k -----------------------------------------------------------

enum class EllMode { kClosedForm, kMonteCarlo };

struct EllParams {
  std::int64_t mc_horizon = 100000;  // walk length n for the Monte Carlo mode
  std::int64_t mc_paths = 100000;
};

// Closed form, valid when all alphabet trees have the same edge count n_A:
//   ell_0 = Gamma(n_i/(n_A+1)) / Gamma((n_i-1)/(n_A+1)) if p_i >= 1, else 0
//   ell_k = Gamma(n_i/(n_A+1)+k-1) / ((n_A+1) Gamma((n_i-1)/(n_A+1)+k)), k >= 1
inline std::vector<double> ell_weights_closed_form(const BrickSet& bs, std::int32_t type,
                                                   std::int64_t k_max) {
  if (!bs.equal_alphabet_edges())
    throw std::invalid_argument("ell_weights: closed form needs equal alphabet edge counts");
  const double na = static_cast<double>(bs.alphabet.front().n_edges);
  const double ni = static_cast<double>(bs.bricks[type - 1].n_edges);
  const double d = na + 1.0;
  std::vector<double> ell(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (bs.bricks[type - 1].ancestor_outdeg >= 1)
    ell[0] = std::exp(std::lgamma(ni / d) - std::lgamma((ni - 1.0) / d));
  for (std::int64_t k = 1; k <= k_max; ++k)
    ell[static_cast<std::size_t>(k)] =
        std::exp(std::lgamma(ni / d + static_cast<double>(k) - 1.0) -
                 std::lgamma((ni - 1.0) / d + static_cast<double>(k))) /
        d;
  return ell;
}

// Monte Carlo: evaluates n^{1/(E[N]+1)} E[ (n_i+S_{k-1})^{-1} prod_{j=k}^{n-1}
// (1 - 1/(n_i+S_j)) ] at a large fixed n by direct expectation over walk
// paths. Factors equal to zero (the walk at weight 1) are tracked separately
// since the whole product vanishes whenever one of them is included.
inline std::vector<double> ell_weights_monte_carlo(const BrickSet& bs, std::int32_t type,
                                                   std::int64_t k_max, const EllParams& params,
                                                   Rng& rng) {
  const double ni = static_cast<double>(bs.bricks[type - 1].n_edges);
  const bool has_zero = bs.bricks[type - 1].ancestor_outdeg >= 1;
  IncrementLaw law = growth_increment_law(bs);
  const std::int64_t n = params.mc_horizon;
  std::vector<double> acc(static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<double> prefix_log(static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<std::int64_t> prefix_zeros(static_cast<std::size_t>(k_max) + 1, 0);
  std::vector<double> inv_weight(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (std::int64_t path = 0; path < params.mc_paths; ++path) {
    double s = 0;  // S_j, j = 0 at start
    double log_total = 0;
    std::int64_t zeros = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      if (j <= k_max) {
        prefix_log[static_cast<std::size_t>(j)] = log_total;
        prefix_zeros[static_cast<std::size_t>(j)] = zeros;
        inv_weight[static_cast<std::size_t>(j)] = 1.0 / (ni + s);
      }
      if (ni + s <= 1.0)
        ++zeros;  // factor (1 - 1/(n_i + S_j)) vanishes
      else
        log_total += std::log1p(-1.0 / (ni + s));
      s += law.sample(rng);
    }
    if (has_zero && zeros == 0) acc[0] += std::exp(log_total);
    for (std::int64_t k = 1; k <= k_max && k <= n; ++k) {
      if (zeros - prefix_zeros[static_cast<std::size_t>(k)] > 0) continue;
      acc[static_cast<std::size_t>(k)] +=
          inv_weight[static_cast<std::size_t>(k - 1)] *
          std::exp(log_total - prefix_log[static_cast<std::size_t>(k)]);
    }
  }
  const double scale = std::pow(static_cast<double>(n), bs.gamma()) /
                       static_cast<double>(params.mc_paths);
  for (double& a : acc) a *= scale;
  return acc;
}

inline std::vector<double> ell_weights(const BrickSet& bs, std::int32_t type, std::int64_t k_max,
                                       EllMode mode, Rng& rng, const EllParams& params = {}) {
  if (type < 1 || type > bs.kappa()) throw std::out_of_range("ell_weights: type out of range");
  if (mode == EllMode::kClosedForm) return ell_weights_closed_form(bs, type, k_max);
  return ell_weights_monte_carlo(bs, type, k_max, params, rng);
}

// Exact P(J_n = k) for equal alphabet edge counts (deterministic walk), used
// as an oracle against the simulated chain.
inline double exact_root_glue_pmf_equal_edges(const BrickSet& bs, std::int32_t type,
                                              std::int64_t k, std::int64_t n) {
  if (!bs.equal_alphabet_edges())
    throw std::invalid_argument("exact_root_glue_pmf_equal_edges: unequal edge counts");
  const double ni = static_cast<double>(bs.bricks[type - 1].n_edges);
  const double d = static_cast<double>(bs.alphabet.front().n_edges) + 1.0;
  auto lg = [](double x) { return std::lgamma(x); };
  if (k == 0) {
    if (bs.bricks[type - 1].ancestor_outdeg < 1) return 0.0;
    return std::exp(lg((ni - 1.0) / d + n) - lg(ni / d + n) + lg(ni / d) - lg((ni - 1.0) / d));
  }
  if (k > n) return 0.0;
  return std::exp(lg((ni - 1.0) / d + n) - lg(ni / d + n) + lg(ni / d + static_cast<double>(k)) -
                  lg((ni - 1.0) / d + static_cast<double>(k))) /
         (ni + d * (static_cast<double>(k) - 1.0));
}

// --- splitting-measure mixture components ------------------------------------------

struct GrowthComponent {
  std::vector<double> fractions;   // urn limit, unranked
  std::vector<std::int32_t> types;  // matching types
};

// k-th mixture component of the limiting splitting measure for type i. k = 0
// uses the initial brick's own decomposition (requires p_i >= 1); k >= 1
// draws the walk value S_{k-1}, a random alphabet brick, and runs the urn
// with weights (S_{k-1} + n_i, brick decomposition).
inline GrowthComponent growth_dislocation_component(const BrickSet& bs, std::int32_t type,
                                                    std::int64_t k, Rng& rng,
                                                    std::int64_t urn_steps = 10000) {
  if (type < 1 || type > bs.kappa())
    throw std::out_of_range("growth_dislocation_component: type out of range");
  const Brick& brick = bs.bricks[type - 1];
  GrowthComponent comp;
  if (k < 0) throw std::invalid_argument("growth_dislocation_component: k must be >= 0");
  IncrementLaw law = growth_increment_law(bs);
  if (k == 0) {
    if (brick.ancestor_outdeg < 1)
      throw std::invalid_argument("growth_dislocation_component: k = 0 needs p_i >= 1");
    std::vector<double> weights;
    for (const Part& p : brick.child_parts) {
      weights.push_back(static_cast<double>(p.size));
      comp.types.push_back(p.type);
    }
    comp.fractions = urn_limit_sample(std::move(weights), law, urn_steps, rng);
    return comp;
  }
  double s = 0;
  for (std::int64_t j = 0; j < k - 1; ++j) s += law.sample(rng);
  // alphabet brick
  double u = rng.uniform();
  double acc = 0;
  std::size_t x = bs.alphabet.size() - 1;
  for (std::size_t i = 0; i < bs.alphabet.size(); ++i) {
    acc += bs.alphabet[i].q;
    if (u < acc) {
      x = i;
      break;
    }
  }
  const AlphabetDecomp& ad = bs.alphabet[x];
  std::vector<double> weights{s + static_cast<double>(brick.n_edges)};
  comp.types.push_back(type);
  for (const Part& p : ad.root_parts) {
    weights.push_back(static_cast<double>(p.size));
    comp.types.push_back(p.type);
  }
  comp.fractions = urn_limit_sample(std::move(weights), law, urn_steps, rng);
  return comp;
}

inline MassPartition growth_dislocation_sample(const BrickSet& bs, std::int32_t type,
                                               std::int64_t k, Rng& rng,
                                               std::int64_t urn_steps = 10000) {
  GrowthComponent comp = growth_dislocation_component(bs, type, k, rng, urn_steps);
  std::vector<MassAtom> atoms;
  for (std::size_t i = 0; i < comp.fractions.size(); ++i)
    atoms.push_back({comp.fractions[i], comp.types[i]});
  return rank_mass_partition(std::move(atoms));
}

// --- the growth tree as a splitting kernel ------------------------------------------

// Empirical realization of the splitting law of the reduced growth tree:
// sampling runs the gluing chain from the type's brick for n steps and reads
// off the ancestor's children partition. Sampling only.
class GrowthKernel : public SplittingKernel {
 public:
  explicit GrowthKernel(BrickSet bs) : bs_(std::move(bs)) {}
  std::int32_t kappa() const override { return bs_.kappa(); }
  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    GrowthState st = grow(bs_, type, n, rng);
    MBTree t = reduce_growth_tree(bs_, st);
    std::vector<Part> parts;
    for (std::int32_t c = 0; c < t.nodes[0].n_children; ++c) {
      const auto& nd = t.nodes[t.nodes[0].first_child + c];
      parts.push_back({nd.size, nd.type});
    }
    return make_partition(std::move(parts), n);
  }
  const BrickSet& brick_set() const { return bs_; }

 private:
  BrickSet bs_;
};

}  // namespace mbfrag
