#pragma once

// Continuum side: finite-support dislocation measures, the Markov additive
// process (negative log-mass with type) of the tagged fragment, its Lamperti
// time change, absorption times, exact simulation of k-leaf marginals of the
// fragmentation tree, and the (1-s1)-biased sampler of the Brownian
// dislocation measure. Also the discrete bridge: the Markov-branching kernel
// whose rescaled splitting law reproduces a finite dislocation measure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbfrag/kernels.hpp"
#include "mbfrag/partitions.hpp"
#include "mbfrag/rng.hpp"
#include <nlohmann/json.hpp>

namespace mbfrag {

struct DislocationAtom {
  double weight = 0;  // rate
  MassPartition s;    // conservative mass partition
};

struct DislocationSpec {
  std::int32_t kappa = 1;
  double gamma = 0.5;
  std::vector<std::vector<DislocationAtom>> atoms;  // per type

  double total_rate(std::int32_t type) const {
    double w = 0;
    for (const auto& a : atoms[type - 1]) w += a.weight;
    return w;
  }
};

inline void validate_dislocation_spec(const DislocationSpec& d) {
  if (d.kappa < 1) throw std::invalid_argument("dislocation spec: kappa must be >= 1");
  if (!(d.gamma > 0)) throw std::invalid_argument("dislocation spec: gamma must be > 0");
  if (static_cast<std::int32_t>(d.atoms.size()) != d.kappa)
    throw std::invalid_argument("dislocation spec: need one atom list per type");
  for (std::int32_t i = 1; i <= d.kappa; ++i) {
    bool real_split = false;
    for (const auto& a : d.atoms[i - 1]) {
      if (!(a.weight > 0)) throw std::invalid_argument("dislocation spec: weights must be > 0");
      if (!a.s.conservative(1e-9))
        throw std::invalid_argument("dislocation spec: atoms must conserve mass");
      if (!validate_mass_partition(a.s, d.kappa))
        throw std::invalid_argument("dislocation spec: invalid mass partition atom");
      if (a.s.atoms.size() == 1 && a.s.atoms[0].type == i && a.s.atoms[0].mass >= 1.0 - 1e-12)
        throw std::invalid_argument("dislocation spec: atom (1, own type) is not allowed");
      if (a.s.s1() < 1.0 - 1e-12) real_split = true;
    }
    if (!real_split)
      throw std::invalid_argument("dislocation spec: type " + std::to_string(i) +
                                  " never produces a genuine split (s1 < 1)");
  }
}

inline DislocationSpec dislocation_spec_from_json(const nlohmann::json& j) {
  DislocationSpec d;
  d.kappa = j.at("kappa").get<std::int32_t>();
  d.gamma = j.at("gamma").get<double>();
  for (const auto& type_atoms : j.at("atoms")) {
    std::vector<DislocationAtom> list;
    for (const auto& entry : type_atoms) {
      DislocationAtom a;
      a.weight = entry.at("w").get<double>();
      a.s = mass_partition_from_json(entry.at("s"));
      list.push_back(std::move(a));
    }
    d.atoms.push_back(std::move(list));
  }
  validate_dislocation_spec(d);
  return d;
}

// --- Markov additive process parameters -----------------------------------------

struct JumpAtom {
  double x = 0;  // jump of the additive part, -log(mass factor)
  double prob = 0;
};

struct MAPParams {
  std::int32_t kappa = 1;
  std::vector<double> total_rate;                         // per type
  std::vector<std::vector<double>> lambda;                // type-change rates, lambda[i][j]
  std::vector<std::vector<std::vector<JumpAtom>>> jumps;  // jump law per (from, to)

  // Laplace exponent of the additive part while the type stays i:
  // psi_i(q) = sum_atoms w * sum_n (s_n - s_n^{1+q}) 1{type_n = i}
  std::function<double(std::int32_t, double)> psi;
};

inline MAPParams map_params(const DislocationSpec& d) {
  validate_dislocation_spec(d);
  MAPParams mp;
  mp.kappa = d.kappa;
  mp.total_rate.resize(d.kappa);
  mp.lambda.assign(d.kappa, std::vector<double>(d.kappa, 0.0));
  mp.jumps.assign(d.kappa,
                  std::vector<std::vector<JumpAtom>>(static_cast<std::size_t>(d.kappa)));
  for (std::int32_t i = 1; i <= d.kappa; ++i) {
    mp.total_rate[i - 1] = d.total_rate(i);
    for (const auto& atom : d.atoms[i - 1])
      for (const auto& part : atom.s.atoms) {
        if (part.mass <= 0) continue;
        double rate = atom.weight * part.mass;  // size-biased part selection
        std::int32_t j = part.type;
        mp.lambda[i - 1][j - 1] += rate;
        mp.jumps[i - 1][j - 1].push_back({-std::log(part.mass), rate});
      }
    for (std::int32_t j = 1; j <= d.kappa; ++j) {
      double tot = mp.lambda[i - 1][j - 1];
      for (auto& jm : mp.jumps[i - 1][j - 1]) jm.prob = tot > 0 ? jm.prob / tot : 0.0;
    }
  }
  std::vector<std::vector<DislocationAtom>> atoms = d.atoms;
  mp.psi = [atoms](std::int32_t i, double q) {
    double v = 0;
    for (const auto& atom : atoms[i - 1])
      for (const auto& part : atom.s.atoms)
        if (part.type == i && part.mass > 0)
          v += atom.weight * (part.mass - std::pow(part.mass, 1.0 + q));
    return v;
  };
  return mp;
}

// lambda_{i,j} * E[e^{-q X}] under B_{i,j}; equals
// sum_atoms w * sum_n s_n^{1+q} 1{type_n = j} by construction.
inline double map_laplace_lhs(const MAPParams& mp, std::int32_t i, std::int32_t j, double q) {
  double v = 0;
  for (const auto& jm : mp.jumps[i - 1][j - 1])
    v += mp.lambda[i - 1][j - 1] * jm.prob * std::exp(-q * jm.x);
  return v;
}

inline double map_laplace_rhs(const DislocationSpec& d, std::int32_t i, std::int32_t j,
                              double q) {
  double v = 0;
  for (const auto& atom : d.atoms[i - 1])
    for (const auto& part : atom.s.atoms)
      if (part.type == j && part.mass > 0) v += atom.weight * std::pow(part.mass, 1.0 + q);
  return v;
}

// --- path simulation --------------------------------------------------------------

struct MAPStep {
  double time = 0;    // event time
  double xi = 0;      // value of the additive part right after the event
  std::int32_t type = 0;  // type right after the event
};

// Compound-Poisson simulation of (xi, K): in type i wait Exp(total rate),
// pick an atom by weight, a part by mass, add -log(mass) and switch type.
inline std::vector<MAPStep> simulate_map_path(const DislocationSpec& d, std::int32_t start_type,
                                              double horizon, Rng& rng) {
  std::vector<MAPStep> path;
  path.push_back({0.0, 0.0, start_type});
  double t = 0, xi = 0;
  std::int32_t type = start_type;
  for (;;) {
    double rate = d.total_rate(type);
    t += rng.exponential(rate);
    if (t > horizon) break;
    const auto& atoms = d.atoms[type - 1];
    std::vector<double> w(atoms.size());
    for (std::size_t a = 0; a < atoms.size(); ++a) w[a] = atoms[a].weight;
    const MassPartition& s = atoms[rng.discrete(w, rate)].s;
    double u = rng.uniform() * s.sum_masses();
    double acc = 0;
    const MassAtom* chosen = &s.atoms.back();
    for (const auto& part : s.atoms) {
      acc += part.mass;
      if (u < acc) {
        chosen = &part;
        break;
      }
    }
    xi += -std::log(chosen->mass);
    type = chosen->type;
    path.push_back({t, xi, type});
  }
  return path;
}

struct LampertiPath {
  std::vector<double> times;       // self-similar time of each event
  std::vector<double> mass;        // X right after the event
  std::vector<std::int32_t> type;  // J right after the event
  double absorption_time = 0;      // integral of exp(-gamma xi) over the path
  double tail_bound = 0;           // bound on the truncated remainder
};

// Expected remaining absorption time from mass 1 per starting type, from the
// linear system E[D_j] = 1/w_j + sum_k A_{jk} E[D_k] with
// A_{jk} = (1/w_j) sum_atoms w sum_n s_n^{1+gamma} 1{type_n = k}.
inline std::vector<double> expected_absorption_time(const DislocationSpec& d) {
  const std::int32_t k = d.kappa;
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  std::vector<double> c(k);
  for (std::int32_t i = 0; i < k; ++i) {
    double w = d.total_rate(i + 1);
    c[i] = 1.0 / w;
    for (std::int32_t j = 0; j < k; ++j) m[i][j] = (i == j) ? 1.0 : 0.0;
    for (const auto& atom : d.atoms[i])
      for (const auto& part : atom.s.atoms)
        if (part.mass > 0)
          m[i][part.type - 1] -= atom.weight * std::pow(part.mass, 1.0 + d.gamma) / w;
  }
  // Gaussian elimination
  for (std::int32_t col = 0; col < k; ++col) {
    std::int32_t best = col;
    for (std::int32_t r = col; r < k; ++r)
      if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
    if (std::abs(m[best][col]) < 1e-14)
      throw std::runtime_error("expected_absorption_time: singular system");
    std::swap(m[best], m[col]);
    std::swap(c[best], c[col]);
    for (std::int32_t r = 0; r < k; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (std::int32_t c2 = col; c2 < k; ++c2) m[r][c2] -= f * m[col][c2];
      c[r] -= f * c[col];
    }
  }
  for (std::int32_t i = 0; i < k; ++i) c[i] /= m[i][i];
  return c;
}

// Exact piecewise time change of a homogeneous path: each constancy interval
// of xi contributes its length times exp(-gamma xi). The absorption time is
// the total integral; beyond the simulated horizon the remainder is bounded
// and reported.
inline LampertiPath lamperti_transform(const std::vector<MAPStep>& path, double gamma,
                                       const DislocationSpec* spec = nullptr) {
  if (path.empty()) throw std::invalid_argument("lamperti_transform: empty path");
  LampertiPath lp;
  double clock = 0;
  for (std::size_t e = 0; e + 1 < path.size(); ++e) {
    double seg = (path[e + 1].time - path[e].time) * std::exp(-gamma * path[e].xi);
    clock += seg;
    lp.times.push_back(clock);
    lp.mass.push_back(std::exp(-path[e + 1].xi));
    lp.type.push_back(path[e + 1].type);
  }
  lp.absorption_time = clock;
  if (spec) {
    double factor = std::exp(-gamma * path.back().xi);
    std::vector<double> exp_tail = expected_absorption_time(*spec);
    double worst = 0;
    for (double v : exp_tail) worst = std::max(worst, v);
    lp.tail_bound = factor * worst;
  }
  return lp;
}

struct AbsorptionSample {
  double time = 0;
  double tail_bound = 0;
  std::int64_t events = 0;
};

// Death time of the tagged fragment started at mass 1, type i: accumulate
// x^gamma Exp(1)/w_type over events; stop once exp(-gamma xi) < eps and bound
// the remainder. The geometric bound of the adaptive-horizon rule applies
// when every jump shrinks the mass; with renaming atoms the linear-system
// bound is used instead.
inline AbsorptionSample simulate_absorption_time(const DislocationSpec& d,
                                                 std::int32_t start_type, Rng& rng,
                                                 double eps = 1e-6,
                                                 std::int64_t max_events = 100'000'000) {
  AbsorptionSample out;
  double x = 1.0;
  std::int32_t type = start_type;
  double min_rate = d.total_rate(1);
  double max_part = 0;  // largest mass factor over all atom parts
  for (std::int32_t i = 1; i <= d.kappa; ++i) {
    min_rate = std::min(min_rate, d.total_rate(i));
    for (const auto& atom : d.atoms[i - 1])
      for (const auto& part : atom.s.atoms) max_part = std::max(max_part, part.mass);
  }
  while (std::pow(x, d.gamma) >= eps) {
    if (++out.events > max_events)
      throw std::runtime_error("simulate_absorption_time: event cap exceeded");
    double rate = std::pow(x, -d.gamma) * d.total_rate(type);
    out.time += rng.exponential(rate);
    const auto& atoms = d.atoms[type - 1];
    std::vector<double> w(atoms.size());
    for (std::size_t a = 0; a < atoms.size(); ++a) w[a] = atoms[a].weight;
    const MassPartition& s = atoms[rng.discrete(w)].s;
    double u = rng.uniform() * s.sum_masses();
    double acc = 0;
    for (const auto& part : s.atoms) {
      acc += part.mass;
      if (u < acc) {
        x *= part.mass;
        type = part.type;
        break;
      }
    }
  }
  double factor = std::pow(x, d.gamma);
  if (max_part < 1.0 - 1e-12) {
    out.tail_bound = factor / (min_rate * (1.0 - std::pow(max_part, d.gamma)));
  } else {
    std::vector<double> exp_tail = expected_absorption_time(d);
    double worst = 0;
    for (double v : exp_tail) worst = std::max(worst, v);
    out.tail_bound = factor * worst;
  }
  return out;
}

// --- Brownian dislocation measure ---------------------------------------------------

// Raw density of the Brownian measure in the s1 coordinate on [1/2, 1).
inline double brownian_raw_density(double x) {
  if (x < 0.5 || x >= 1.0) return 0.0;
  return std::sqrt(2.0 / (M_PI * x * x * x * (1.0 - x) * (1.0 - x) * (1.0 - x)));
}

// Total mass of (1 - s1) against the raw measure: 2 sqrt(2/pi).
inline double brownian_bias_mass() { return 2.0 * std::sqrt(2.0 / M_PI); }

// Sample from the normalized (1-s1)-biased measure; the biased density is
// x^{-3/2} (1-x)^{-1/2} / 2 on [1/2, 1), with explicit inverse CDF
// x = 1 / (1 + (1-u)^2).
inline MassPartition brownian_split_sample(Rng& rng) {
  double u = rng.uniform();
  double x = 1.0 / (1.0 + (1.0 - u) * (1.0 - u));
  std::vector<MassAtom> atoms{{x, 1}};
  if (x < 1.0) atoms.push_back({1.0 - x, 1});
  return rank_mass_partition(std::move(atoms));
}

// --- marginal trees ------------------------------------------------------------------

struct MarginalTree {
  struct Node {
    double height = 0;
    std::int32_t type = 0;        // block type at creation
    std::int32_t parent = -1;
    std::vector<std::int32_t> children;
    std::int32_t leaf_label = 0;  // 1..k at leaves, 0 at internal nodes
  };
  std::vector<Node> nodes;

  double depth_of_leaf(std::int32_t label) const {
    for (const auto& nd : nodes)
      if (nd.leaf_label == label) return nd.height;
    throw std::out_of_range("MarginalTree: unknown leaf label");
  }
};

// Exact recursive simulation of the k-leaf marginal of the fragmentation
// tree: a block holding tagged leaves S with mass x and type j waits
// Exp(x^{-gamma} w_j), splits via a paintbox restricted to S; invisible
// events (all of S in one part) update mass and type in place; a lone leaf
// keeps hopping until its remaining death time is below the eps resolution.
inline MarginalTree simulate_marginal_tree(const DislocationSpec& d, std::int32_t start_type,
                                           std::int32_t k, Rng& rng, double eps = 1e-6,
                                           std::int64_t max_events = 10'000'000) {
  if (k < 1) throw std::invalid_argument("simulate_marginal_tree: k must be >= 1");
  MarginalTree tree;
  struct Block {
    std::vector<std::int32_t> leaves;
    double mass = 1;
    std::int32_t type = 1;
    double birth = 0;
    std::int32_t parent_node = -1;
  };
  std::vector<Block> queue;
  Block root;
  for (std::int32_t i = 1; i <= k; ++i) root.leaves.push_back(i);
  root.type = start_type;
  queue.push_back(root);
  std::int64_t events = 0;
  while (!queue.empty()) {
    Block blk = queue.back();
    queue.pop_back();
    double t = blk.birth;
    double x = blk.mass;
    std::int32_t type = blk.type;
    for (;;) {
      if (blk.leaves.size() == 1 && std::pow(x, d.gamma) < eps) {
        // the leaf's residual death time is below resolution; record the leaf
        MarginalTree::Node leaf;
        leaf.height = t;
        leaf.type = type;
        leaf.parent = blk.parent_node;
        leaf.leaf_label = blk.leaves[0];
        if (blk.parent_node >= 0)
          tree.nodes[blk.parent_node].children.push_back(
              static_cast<std::int32_t>(tree.nodes.size()));
        tree.nodes.push_back(leaf);
        break;
      }
      if (++events > max_events)
        throw std::runtime_error("simulate_marginal_tree: event cap exceeded");
      double rate = std::pow(x, -d.gamma) * d.total_rate(type);
      t += rng.exponential(rate);
      const auto& atoms = d.atoms[type - 1];
      std::vector<double> w(atoms.size());
      for (std::size_t a = 0; a < atoms.size(); ++a) w[a] = atoms[a].weight;
      const MassPartition& s = atoms[rng.discrete(w)].s;
      // paintbox restriction: each tagged leaf picks a part by mass
      std::map<std::size_t, std::vector<std::int32_t>> groups;
      for (std::int32_t leaf : blk.leaves) {
        double u = rng.uniform() * s.sum_masses();
        double acc = 0;
        std::size_t part = s.atoms.size() - 1;
        for (std::size_t m = 0; m < s.atoms.size(); ++m) {
          acc += s.atoms[m].mass;
          if (u < acc) {
            part = m;
            break;
          }
        }
        groups[part].push_back(leaf);
      }
      if (groups.size() == 1) {
        std::size_t part = groups.begin()->first;
        x *= s.atoms[part].mass;
        type = s.atoms[part].type;
        continue;  // invisible event
      }
      // visible split: record a node at height t and recurse on the groups
      MarginalTree::Node node;
      node.height = t;
      node.type = type;
      node.parent = blk.parent_node;
      if (blk.parent_node >= 0)
        tree.nodes[blk.parent_node].children.push_back(
            static_cast<std::int32_t>(tree.nodes.size()));
      std::int32_t node_id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.push_back(node);
      for (const auto& [part, leaves] : groups) {
        Block child;
        child.leaves = leaves;
        child.mass = x * s.atoms[part].mass;
        child.type = s.atoms[part].type;
        child.birth = t;
        child.parent_node = node_id;
        queue.push_back(child);
      }
      break;
    }
  }
  return tree;
}

// Split height of the block of leaves B: the height of the highest node whose
// subtree still contains all of B.
inline double split_height(const MarginalTree& t, const std::vector<std::int32_t>& labels) {
  // walk up from each leaf, intersect ancestor chains
  std::vector<std::vector<std::int32_t>> chains;
  for (std::int32_t lab : labels) {
    std::int32_t v = -1;
    for (std::size_t i = 0; i < t.nodes.size(); ++i)
      if (t.nodes[i].leaf_label == lab) v = static_cast<std::int32_t>(i);
    if (v < 0) throw std::out_of_range("split_height: unknown label");
    std::vector<std::int32_t> chain;
    while (v >= 0) {
      chain.push_back(v);
      v = t.nodes[v].parent;
    }
    chains.push_back(chain);
  }
  double best = 0;
  for (std::int32_t cand : chains[0]) {
    bool in_all = true;
    for (const auto& chain : chains)
      if (std::find(chain.begin(), chain.end(), cand) == chain.end()) in_all = false;
    if (in_all && t.nodes[cand].leaf_label == 0) {
      best = std::max(best, t.nodes[cand].height);
    }
  }
  return best;
}

// --- discrete bridges ----------------------------------------------------------------

// Markov-branching kernel whose rescaled splitting law matches a finite
// dislocation measure: at size m and type i, each atom fires with probability
// m^{-gamma} w (its parts rounded to integers summing to m by largest
// remainders); otherwise the individual keeps size and type. Sizes at or
// below 1 die.
class DislocationMBKernel : public SplittingKernel {
 public:
  explicit DislocationMBKernel(DislocationSpec d) : d_(std::move(d)) {
    validate_dislocation_spec(d_);
  }

  std::int32_t kappa() const override { return d_.kappa; }

  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    if (n <= 1) return DiscreteTypedPartition{{}, n, false};
    const auto& atoms = d_.atoms[type - 1];
    double scale = std::pow(static_cast<double>(n), -d_.gamma);
    double u = rng.uniform();
    double acc = 0;
    for (const auto& atom : atoms) {
      acc += std::min(1.0, scale * atom.weight);
      if (u < acc) return rounded_partition(atom.s, n);
      if (acc >= 1.0) break;
    }
    return make_partition({{n, type}}, n);  // no split this generation
  }

  std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const override {
    if (n <= 1) return KernelSupport{{DiscreteTypedPartition{{}, n, false}, 1.0}};
    KernelSupport out;
    const auto& atoms = d_.atoms[type - 1];
    double scale = std::pow(static_cast<double>(n), -d_.gamma);
    double stay = 1.0;
    std::vector<WeightedPartition> entries;
    for (const auto& atom : atoms) {
      double p = std::min(1.0, scale * atom.weight);
      p = std::min(p, stay);
      stay -= p;
      if (p > 0) entries.push_back({rounded_partition(atom.s, n), p});
    }
    if (stay > 0) entries.push_back({make_partition({{n, type}}, n), stay});
    return detail::merge_support(std::move(entries));
  }

  std::optional<std::int64_t> conservative_from() const override { return 2; }
  const DislocationSpec& spec() const { return d_; }

  static DiscreteTypedPartition rounded_partition(const MassPartition& s, std::int64_t n) {
    // largest-remainder rounding to integers summing to n
    std::vector<std::int64_t> units(s.atoms.size());
    std::vector<std::pair<double, std::size_t>> rema;
    std::int64_t used = 0;
    double msum = s.sum_masses();
    for (std::size_t i = 0; i < s.atoms.size(); ++i) {
      double share = static_cast<double>(n) * s.atoms[i].mass / msum;
      units[i] = static_cast<std::int64_t>(std::floor(share));
      used += units[i];
      rema.push_back({share - std::floor(share), i});
    }
    std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::int64_t k = 0; k < n - used; ++k) units[rema[static_cast<std::size_t>(k)].second]++;
    std::vector<Part> parts;
    for (std::size_t i = 0; i < s.atoms.size(); ++i)
      if (units[i] > 0) parts.push_back({units[i], s.atoms[i].type});
    return make_partition(std::move(parts), n);
  }

 private:
  DislocationSpec d_;
};

// Mixing-regime kernel: per-type monotype split measures firing at rate
// m^{-gamma} w (children keep the parent's type) plus renaming moves at rate
// m^{-beta} c_{ij}; types with an empty split list only rename.
class MixingRegimeKernel : public SplittingKernel {
 public:
  struct SplitAtom {
    double weight = 0;
    std::vector<double> fractions;  // masses summing to 1
  };

  MixingRegimeKernel(std::int32_t kappa, double gamma, double beta,
                     std::vector<std::vector<SplitAtom>> splits,
                     std::vector<std::vector<double>> rename_rates)
      : kappa_(kappa), gamma_(gamma), beta_(beta), splits_(std::move(splits)),
        rename_(std::move(rename_rates)) {
    if (beta_ < 0 || beta_ >= gamma_)
      throw std::invalid_argument("MixingRegimeKernel: need 0 <= beta < gamma");
  }

  std::int32_t kappa() const override { return kappa_; }

  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    if (n <= 1) return DiscreteTypedPartition{{}, n, false};
    double split_scale = std::pow(static_cast<double>(n), -gamma_);
    double rename_scale = std::pow(static_cast<double>(n), -beta_);
    double u = rng.uniform();
    double acc = 0;
    for (const auto& atom : splits_[type - 1]) {
      acc += std::min(1.0, split_scale * atom.weight);
      if (u < acc) {
        MassPartition s;
        for (double f : atom.fractions) s.atoms.push_back({f, type});
        s.s0 = 0;
        return DislocationMBKernel::rounded_partition(s, n);
      }
    }
    for (std::int32_t j = 1; j <= kappa_; ++j) {
      if (j == type) continue;
      acc += std::min(1.0, rename_scale * rename_[type - 1][j - 1]);
      if (u < acc) return make_partition({{n, j}}, n);
    }
    return make_partition({{n, type}}, n);
  }

  std::optional<std::int64_t> conservative_from() const override { return 2; }

 private:
  std::int32_t kappa_;
  double gamma_, beta_;
  std::vector<std::vector<SplitAtom>> splits_;
  std::vector<std::vector<double>> rename_;
};

}  // namespace mbfrag
