#pragma once

// Splitting kernels: the law q_n^(i) of the (size, type) children partition
// of a size-n, type-i individual. Kernels are sampled; when the support is
// finite and cheap to enumerate they also expose it with exact probabilities.
// Wrappers implement the standard couplings: size-1 individuals die without
// reproducing, and non-conservative draws are padded with (1,1) parts.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mbfrag/partitions.hpp"
#include "mbfrag/rng.hpp"

namespace mbfrag {

struct WeightedPartition {
  DiscreteTypedPartition partition;
  double prob = 0;
};

using KernelSupport = std::vector<WeightedPartition>;

class SplittingKernel {
 public:
  virtual ~SplittingKernel() = default;
  virtual std::int32_t kappa() const = 0;
  virtual DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const = 0;
  // Exact support with probabilities, when enumerable at (n, type).
  virtual std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const {
    (void)n;
    (void)type;
    return std::nullopt;
  }
  // Smallest N such that the kernel is conservative for all n >= N (if known).
  virtual std::optional<std::int64_t> conservative_from() const { return std::nullopt; }
};

using KernelPtr = std::shared_ptr<const SplittingKernel>;

namespace detail {
inline KernelSupport merge_support(std::vector<WeightedPartition> entries) {
  std::map<DiscreteTypedPartition, double> acc;
  for (auto& e : entries) acc[e.partition] += e.prob;
  KernelSupport out;
  out.reserve(acc.size());
  for (auto& [p, w] : acc) out.push_back({p, w});
  return out;
}
}  // namespace detail

// Kernel defined by an explicit table of supports; sizes not present in the
// table are an error. Used for hand-built kernels in experiments and tests.
class TableKernel : public SplittingKernel {
 public:
  TableKernel(std::int32_t kappa, std::map<std::pair<std::int64_t, std::int32_t>, KernelSupport> table)
      : kappa_(kappa), table_(std::move(table)) {}

  std::int32_t kappa() const override { return kappa_; }

  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    const KernelSupport& sup = row(n, type);
    std::vector<double> w;
    w.reserve(sup.size());
    for (const auto& e : sup) w.push_back(e.prob);
    return sup[rng.discrete(w)].partition;
  }

  std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const override {
    return row(n, type);
  }

 private:
  const KernelSupport& row(std::int64_t n, std::int32_t type) const {
    auto it = table_.find({n, type});
    if (it == table_.end()) throw std::out_of_range("TableKernel: no entry for (n, type)");
    return it->second;
  }
  std::int32_t kappa_;
  std::map<std::pair<std::int64_t, std::int32_t>, KernelSupport> table_;
};

// q_n = delta on ((ceil(n/2),1),(floor(n/2),1)), q_1 = empty. Deterministic
// test kernel; on powers of two the tagged fragment halves every step.
class HalvingKernel : public SplittingKernel {
 public:
  std::int32_t kappa() const override { return 1; }
  DiscreteTypedPartition sample(std::int64_t n, std::int32_t, Rng&) const override {
    return partition_at(n);
  }
  std::optional<KernelSupport> support(std::int64_t n, std::int32_t) const override {
    return KernelSupport{{partition_at(n), 1.0}};
  }
  std::optional<std::int64_t> conservative_from() const override { return 2; }

 private:
  static DiscreteTypedPartition partition_at(std::int64_t n) {
    if (n <= 1) return DiscreteTypedPartition{{}, n, false};
    return make_partition({{(n + 1) / 2, 1}, {n / 2, 1}}, n);
  }
};

// Coupling: size-1 individuals die without reproducing; all other sizes keep
// the base law.
class DeathCoupledKernel : public SplittingKernel {
 public:
  explicit DeathCoupledKernel(KernelPtr base) : base_(std::move(base)) {}
  std::int32_t kappa() const override { return base_->kappa(); }
  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    if (n <= 1) return DiscreteTypedPartition{{}, n, false};
    return base_->sample(n, type, rng);
  }
  std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const override {
    if (n <= 1) return KernelSupport{{DiscreteTypedPartition{{}, n, false}, 1.0}};
    return base_->support(n, type);
  }
  std::optional<std::int64_t> conservative_from() const override {
    return base_->conservative_from();
  }

 private:
  KernelPtr base_;
};

inline DiscreteTypedPartition pad_to_conservative(const DiscreteTypedPartition& p) {
  std::int64_t missing = p.total - p.sum_sizes();
  if (missing <= 0) return DiscreteTypedPartition{p.parts, p.total, false};
  std::vector<Part> parts = p.parts;
  for (std::int64_t k = 0; k < missing; ++k) parts.push_back({1, 1});
  return make_partition(std::move(parts), p.total);
}

// Coupling: every draw is padded with (1,1) parts up to exact sum n.
class ConservationKernel : public SplittingKernel {
 public:
  explicit ConservationKernel(KernelPtr base) : base_(std::move(base)) {}
  std::int32_t kappa() const override { return base_->kappa(); }
  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    return pad_to_conservative(base_->sample(n, type, rng));
  }
  std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const override {
    auto sup = base_->support(n, type);
    if (!sup) return std::nullopt;
    std::vector<WeightedPartition> entries;
    entries.reserve(sup->size());
    for (const auto& e : *sup) entries.push_back({pad_to_conservative(e.partition), e.prob});
    return detail::merge_support(std::move(entries));
  }
  std::optional<std::int64_t> conservative_from() const override { return 2; }

 private:
  KernelPtr base_;
};

inline DiscreteTypedPartition drop_zero_parts(const DiscreteTypedPartition& p) {
  std::vector<Part> parts;
  parts.reserve(p.parts.size());
  for (const Part& part : p.parts)
    if (part.size > 0) parts.push_back(part);
  return DiscreteTypedPartition{std::move(parts), p.total, false};
}

// Removes zero-size parts from every draw (the pruned-tree kernel).
class ZeroPrunedKernel : public SplittingKernel {
 public:
  explicit ZeroPrunedKernel(KernelPtr base) : base_(std::move(base)) {}
  std::int32_t kappa() const override { return base_->kappa(); }
  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    return drop_zero_parts(base_->sample(n, type, rng));
  }
  std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const override {
    auto sup = base_->support(n, type);
    if (!sup) return std::nullopt;
    std::vector<WeightedPartition> entries;
    entries.reserve(sup->size());
    for (const auto& e : *sup) entries.push_back({drop_zero_parts(e.partition), e.prob});
    return detail::merge_support(std::move(entries));
  }

 private:
  KernelPtr base_;
};

// Finiteness assumption check for kernels with enumerable supports: from
// every (n, i), either the empty offspring or a strict size split has
// positive probability, or a chain of pure type changes (n, i) -> (n, j)
// reaches a type where it does. Also verifies that each enumerated support
// sums to 1. Kernels without enumerable supports cannot be certified this
// way; tree sampling then relies on the node cap.
inline bool check_splitting_assumption(const SplittingKernel& kernel, std::int64_t n_max,
                                       double prob_tol = 1e-9) {
  for (std::int64_t n = 1; n <= n_max; ++n) {
    std::vector<char> direct(static_cast<std::size_t>(kernel.kappa()) + 1, 0);
    std::vector<std::vector<char>> renames(
        static_cast<std::size_t>(kernel.kappa()) + 1,
        std::vector<char>(static_cast<std::size_t>(kernel.kappa()) + 1, 0));
    for (std::int32_t i = 1; i <= kernel.kappa(); ++i) {
      auto sup = kernel.support(n, i);
      if (!sup) return false;
      double total = 0;
      for (const auto& e : *sup) {
        total += e.prob;
        if (e.prob <= 0) continue;
        if (e.partition.parts.empty() || e.partition.parts[0].size < n) {
          direct[i] = 1;
        } else if (e.partition.parts[0].size == n &&
                   e.partition.sum_sizes() == n) {
          // the whole size moves to one child (possibly with zero-size
          // siblings): a pure type change
          renames[i][e.partition.parts[0].type] = 1;
        }
      }
      if (std::abs(total - 1.0) > prob_tol) return false;
    }
    // reachability through pure type changes
    for (std::int32_t pass = 0; pass < kernel.kappa(); ++pass)
      for (std::int32_t i = 1; i <= kernel.kappa(); ++i)
        for (std::int32_t j = 1; j <= kernel.kappa(); ++j)
          if (renames[i][j] && direct[j]) direct[i] = 1;
    for (std::int32_t i = 1; i <= kernel.kappa(); ++i)
      if (!direct[i]) return false;
  }
  return true;
}

inline KernelPtr death_coupling_kernel(KernelPtr base) {
  return std::make_shared<DeathCoupledKernel>(std::move(base));
}
inline KernelPtr conservation_kernel(KernelPtr base) {
  return std::make_shared<ConservationKernel>(std::move(base));
}
inline KernelPtr zero_pruned_kernel(KernelPtr base) {
  return std::make_shared<ZeroPrunedKernel>(std::move(base));
}

}  // namespace mbfrag
