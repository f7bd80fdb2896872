#pragma once

// Typed partition data types shared by the discrete and continuum sides:
// integer partitions with types attached to parts, mass partitions on the
// simplex, set partitions produced by paintbox sampling, and the rank map
// that puts unordered (mass, type) collections into canonical order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbfrag/rng.hpp"
#include <nlohmann/json.hpp>

namespace mbfrag {

inline constexpr double kMassTol = 1e-12;

struct Part {
  std::int64_t size = 0;
  std::int32_t type = 0;
  friend bool operator==(const Part&, const Part&) = default;
};

// Canonical order for parts: size strictly decreasing, ties broken by
// type nonincreasing.
inline bool part_before(const Part& a, const Part& b) {
  if (a.size != b.size) return a.size > b.size;
  return a.type > b.type;
}

struct DiscreteTypedPartition {
  std::vector<Part> parts;
  std::int64_t total = 0;   // the integer n being partitioned
  bool allow_zero = false;  // zero-size parts allowed (with a real type)

  std::int64_t sum_sizes() const {
    std::int64_t s = 0;
    for (const Part& p : parts) s += p.size;
    return s;
  }
  std::size_t length() const { return parts.size(); }
  bool conservative() const { return sum_sizes() == total; }

  friend bool operator==(const DiscreteTypedPartition&, const DiscreteTypedPartition&) = default;
  friend bool operator<(const DiscreteTypedPartition& a, const DiscreteTypedPartition& b) {
    auto key = [](const Part& p) { return std::pair<std::int64_t, std::int32_t>(-p.size, -p.type); };
    return std::lexicographical_compare(
        a.parts.begin(), a.parts.end(), b.parts.begin(), b.parts.end(),
        [&](const Part& x, const Part& y) { return key(x) < key(y); });
  }
};

inline bool validate_partition(const DiscreteTypedPartition& p, std::int32_t kappa = 0) {
  std::int64_t sum = 0;
  for (std::size_t m = 0; m < p.parts.size(); ++m) {
    const Part& part = p.parts[m];
    if (part.size < 0) return false;
    if (part.size == 0 && !p.allow_zero) return false;
    if (part.type < 1) return false;
    if (kappa > 0 && part.type > kappa) return false;
    sum += part.size;
    if (m > 0) {
      const Part& prev = p.parts[m - 1];
      bool ok = part.size < prev.size || (part.size == prev.size && part.type <= prev.type);
      if (!ok) return false;
    }
  }
  return sum <= p.total;
}

inline DiscreteTypedPartition make_partition(std::vector<Part> parts, std::int64_t total,
                                             bool allow_zero = false) {
  std::stable_sort(parts.begin(), parts.end(), part_before);
  return DiscreteTypedPartition{std::move(parts), total, allow_zero};
}

struct MassAtom {
  double mass = 0;
  std::int32_t type = 0;
};

// A ranked mass partition: atoms sorted by (mass decreasing, type
// nonincreasing), masses summing to at most 1; s0 is the missing mass.
struct MassPartition {
  std::vector<MassAtom> atoms;
  double s0 = 1.0;

  double sum_masses() const {
    double s = 0;
    for (const auto& a : atoms) s += a.mass;
    return s;
  }
  bool conservative(double tol = kMassTol) const { return std::abs(sum_masses() - 1.0) <= tol; }
  double s1() const { return atoms.empty() ? 0.0 : atoms.front().mass; }
  std::int32_t i1() const { return atoms.empty() ? 0 : atoms.front().type; }
};

// Rank map: sort an unordered list of (mass, type) atoms into the canonical
// nonincreasing order, dropping empty atoms. Stable, so equal (mass, type)
// atoms keep their relative input order.
inline MassPartition rank_mass_partition(std::vector<MassAtom> atoms) {
  double sum = 0;
  for (const auto& a : atoms) {
    if (a.mass < 0) throw std::invalid_argument("rank_mass_partition: negative mass");
    sum += a.mass;
  }
  if (sum > 1.0 + kMassTol) throw std::invalid_argument("rank_mass_partition: masses sum to > 1");
  std::erase_if(atoms, [](const MassAtom& a) { return a.mass == 0.0; });
  std::stable_sort(atoms.begin(), atoms.end(), [](const MassAtom& a, const MassAtom& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.type > b.type;
  });
  MassPartition out;
  out.atoms = std::move(atoms);
  out.s0 = 1.0 - sum;
  return out;
}

inline bool validate_mass_partition(const MassPartition& s, std::int32_t kappa = 0) {
  double sum = 0;
  for (std::size_t m = 0; m < s.atoms.size(); ++m) {
    const auto& a = s.atoms[m];
    if (a.mass < 0 || a.mass > 1) return false;
    if ((a.mass == 0) != (a.type == 0)) return false;
    if (kappa > 0 && a.type > kappa) return false;
    if (m > 0) {
      const auto& prev = s.atoms[m - 1];
      bool ok = a.mass < prev.mass || (a.mass == prev.mass && a.type <= prev.type);
      if (!ok) return false;
    }
    sum += a.mass;
  }
  if (sum > 1.0 + kMassTol) return false;
  return std::abs(s.s0 - (1.0 - sum)) <= 1e-9;
}

// Rescale a discrete partition by 1/n, keeping types.
inline MassPartition mass_partition_from_discrete(const DiscreteTypedPartition& p) {
  std::vector<MassAtom> atoms;
  atoms.reserve(p.parts.size());
  for (const Part& part : p.parts) {
    if (part.size > 0)
      atoms.push_back({static_cast<double>(part.size) / static_cast<double>(p.total), part.type});
  }
  return rank_mass_partition(std::move(atoms));
}

struct TypedSetPartition {
  std::vector<std::vector<std::int32_t>> blocks;  // ordered by least element
  std::vector<std::int32_t> types;                // type of each block
};

// Paintbox sampling: assign each of 1..k independently to a mass interval,
// indices sharing an interval form a block carrying the interval's type.
inline TypedSetPartition paintbox_sample(const MassPartition& s, std::int32_t k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("paintbox_sample: k must be >= 1");
  if (!s.conservative(1e-9))
    throw std::invalid_argument("paintbox_sample: mass partition must be conservative");
  std::vector<std::vector<std::int32_t>> by_interval(s.atoms.size());
  for (std::int32_t j = 1; j <= k; ++j) {
    double u = rng.uniform() * s.sum_masses();
    double acc = 0;
    std::size_t m = s.atoms.size() - 1;
    for (std::size_t idx = 0; idx < s.atoms.size(); ++idx) {
      acc += s.atoms[idx].mass;
      if (u < acc) {
        m = idx;
        break;
      }
    }
    by_interval[m].push_back(j);
  }
  std::vector<std::size_t> order;
  for (std::size_t m = 0; m < by_interval.size(); ++m)
    if (!by_interval[m].empty()) order.push_back(m);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return by_interval[a][0] < by_interval[b][0]; });
  TypedSetPartition out;
  for (std::size_t m : order) {
    out.blocks.push_back(by_interval[m]);
    out.types.push_back(s.atoms[m].type);
  }
  return out;
}

// --- JSON serialization -----------------------------------------------------
// A mass partition is written as an array of [mass, type] pairs.

inline nlohmann::json to_json(const MassPartition& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : s.atoms) arr.push_back({a.mass, a.type});
  return arr;
}

inline MassPartition mass_partition_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("mass partition JSON: expected array");
  std::vector<MassAtom> atoms;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("mass partition JSON: entries must be [mass, type]");
    atoms.push_back({e[0].get<double>(), e[1].get<std::int32_t>()});
  }
  return rank_mass_partition(std::move(atoms));
}

}  // namespace mbfrag
