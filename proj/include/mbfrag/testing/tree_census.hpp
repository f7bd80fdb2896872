#pragma once

// Test-support oracle: exhaustive enumeration of unordered multi-type trees
// with a prescribed number of type-1 vertices, with exact rational
// probabilities. Independent of the counting-table dynamic program: trees are
// generated shape by shape and probabilities multiply offspring weights with
// arrangement counts. Only usable on specs whose conditioned tree sets are
// finite (every non-type-1 offspring vector is empty or contains a type-1
// child), which the constructor verifies.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mbfrag/gw.hpp"
#include "mbfrag/partitions.hpp"

namespace mbfrag::testing {

using Rational = boost::multiprecision::cpp_rational;

struct RationalAtom {
  std::vector<std::int64_t> z;
  Rational p;
};

struct RationalGWSpec {
  std::int32_t kappa = 1;
  std::vector<std::vector<RationalAtom>> offspring;

  GWSpec to_double() const {
    GWSpec spec;
    spec.kappa = kappa;
    for (const auto& law : offspring) {
      std::vector<OffspringAtom> atoms;
      for (const auto& a : law) atoms.push_back({a.z, static_cast<double>(a.p)});
      spec.offspring.push_back(std::move(atoms));
    }
    return spec;
  }
};

struct CensusShape {
  std::string code;               // canonical encoding including types
  Rational prob;                  // exact probability of this unordered tree
  DiscreteTypedPartition root_children;  // ranked (subtree type-1 count, root type)
};

class TreeCensus {
 public:
  explicit TreeCensus(RationalGWSpec spec) : spec_(std::move(spec)) {
    for (std::int32_t j = 2; j <= spec_.kappa; ++j)
      for (const auto& atom : spec_.offspring[j - 1]) {
        std::int64_t total = 0;
        for (std::int64_t c : atom.z) total += c;
        if (total > 0 && atom.z[0] == 0)
          throw std::invalid_argument(
              "TreeCensus: non-type-1 vertices must be childless or bear a type-1 child");
      }
  }

  // all unordered trees with root type `type` and exactly m type-1 vertices
  const std::vector<CensusShape>& shapes(std::int32_t type, std::int64_t m) {
    auto key = std::make_pair(type, m);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    std::vector<CensusShape> result;
    const std::int64_t below = m - (type == 1 ? 1 : 0);
    if (below >= 0) {
      for (const auto& atom : spec_.offspring[type - 1]) {
        std::vector<Assembly> states = {{std::string(), Rational(atom.p), {}, below}};
        for (std::int32_t t = 1; t <= spec_.kappa; ++t) {
          if (atom.z[t - 1] == 0) continue;
          std::vector<Assembly> grown;
          for (const auto& st : states) extend(st, t, atom.z[t - 1], grown);
          states.swap(grown);
        }
        for (auto& st : states) {
          if (st.budget != 0 || st.prob == 0) continue;
          CensusShape shape;
          shape.code = "[" + std::to_string(type) + st.children_code + "]";
          shape.prob = st.prob;
          shape.root_children = make_partition(st.parts, m, /*allow_zero=*/true);
          result.push_back(std::move(shape));
        }
      }
    }
    // merge identical shapes arising from different child orderings of the
    // canonical code (identical codes must accumulate)
    std::map<std::string, CensusShape> merged;
    for (auto& s : result) {
      auto [pos, fresh] = merged.emplace(s.code, s);
      if (!fresh) pos->second.prob += s.prob;
    }
    std::vector<CensusShape> out;
    for (auto& [code, s] : merged) out.push_back(std::move(s));
    auto [ins, ok] = memo_.emplace(key, std::move(out));
    (void)ok;
    return ins->second;
  }

  Rational total_probability(std::int32_t type, std::int64_t m) {
    Rational t = 0;
    for (const auto& s : shapes(type, m)) t += s.prob;
    return t;
  }

  // conditional law of the ranked root-children partition given m type-1
  // vertices, exactly
  std::map<DiscreteTypedPartition, Rational> kernel_census(std::int32_t type, std::int64_t m) {
    std::map<DiscreteTypedPartition, Rational> law;
    Rational total = 0;
    for (const auto& s : shapes(type, m)) {
      law[s.root_children] += s.prob;
      total += s.prob;
    }
    if (total == 0) throw std::invalid_argument("kernel_census: zero-probability conditioning");
    for (auto& [p, w] : law) w /= total;
    return law;
  }

 private:
  struct Assembly {
    std::string children_code;   // concatenated sorted child codes, built per type
    Rational prob;
    std::vector<Part> parts;     // (type-1 count, type) of each child
    std::int64_t budget = 0;     // type-1 vertices still to distribute
  };

  // extend an assembly with `count` children of type t: choose a multiset of
  // shapes; the arrangement factor is count! / prod multiplicity!
  void extend(const Assembly& base, std::int32_t t, std::int64_t count,
              std::vector<Assembly>& out) {
    // flatten candidate shapes: (m, shape index) for m = 0..budget
    struct Cand {
      std::int64_t m;
      const CensusShape* shape;
    };
    std::vector<Cand> cands;
    for (std::int64_t m = 0; m <= base.budget; ++m)
      for (const auto& s : shapes(t, m)) cands.push_back({m, &s});

    std::vector<std::size_t> picks;
    std::function<void(std::int64_t, std::size_t, std::int64_t, Rational)> rec =
        [&](std::int64_t left, std::size_t min_idx, std::int64_t budget, Rational prob) {
          if (prob == 0) return;
          if (left == 0) {
            Rational arr = 1;
            for (std::int64_t i = 2; i <= count; ++i) arr *= i;
            std::size_t run = 1;
            for (std::size_t i = 1; i <= picks.size(); ++i) {
              if (i < picks.size() && picks[i] == picks[i - 1]) {
                ++run;
              } else {
                for (std::size_t r = 2; r <= run; ++r) arr /= static_cast<std::int64_t>(r);
                run = 1;
              }
            }
            Assembly next = base;
            next.prob = base.prob * prob * arr;
            next.budget = budget;
            std::vector<std::string> codes;
            for (std::size_t idx : picks) {
              next.parts.push_back({cands[idx].m, t});
              codes.push_back(cands[idx].shape->code);
            }
            std::sort(codes.begin(), codes.end());
            for (const auto& c : codes) next.children_code += c;
            out.push_back(std::move(next));
            return;
          }
          for (std::size_t idx = min_idx; idx < cands.size(); ++idx) {
            if (cands[idx].m > budget) continue;
            picks.push_back(idx);
            rec(left - 1, idx, budget - cands[idx].m, prob * cands[idx].shape->prob);
            picks.pop_back();
          }
        };
    rec(count, 0, base.budget, Rational(1));
  }

  RationalGWSpec spec_;
  std::map<std::pair<std::int32_t, std::int64_t>, std::vector<CensusShape>> memo_;
};

}  // namespace mbfrag::testing
