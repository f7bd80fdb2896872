#pragma once

// Multi-type critical Galton-Watson machinery: mean-matrix Perron data and
// second-moment constants, exact counting tables for the number of type-1
// vertices, the induced splitting kernel of the tree conditioned on that
// count, size-biased (spine) offspring laws, offspring laws conditioned on
// avoiding type 1, and the subcriticality check for those.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mbfrag/kernels.hpp"
#include "mbfrag/mb_tree.hpp"
#include "mbfrag/partitions.hpp"
#include "mbfrag/rng.hpp"
#include <nlohmann/json.hpp>

namespace mbfrag {

struct OffspringAtom {
  std::vector<std::int64_t> z;  // children counts per type, length kappa
  double p = 0;
};

struct GWSpec {
  std::int32_t kappa = 1;
  // offspring[i] is the offspring law of type i+1
  std::vector<std::vector<OffspringAtom>> offspring;
};

inline GWSpec gw_spec_from_json(const nlohmann::json& j) {
  GWSpec spec;
  if (!j.contains("kappa")) throw std::invalid_argument("GW spec JSON: missing field 'kappa'");
  spec.kappa = j.at("kappa").get<std::int32_t>();
  if (!j.contains("offspring") || !j.at("offspring").is_array())
    throw std::invalid_argument("GW spec JSON: missing array field 'offspring'");
  const auto& off = j.at("offspring");
  if (static_cast<std::int32_t>(off.size()) != spec.kappa)
    throw std::invalid_argument("GW spec JSON: 'offspring' must have kappa entries");
  for (std::size_t i = 0; i < off.size(); ++i) {
    std::vector<OffspringAtom> atoms;
    for (std::size_t e = 0; e < off[i].size(); ++e) {
      const auto& entry = off[i][e];
      if (!entry.contains("z") || !entry.contains("p"))
        throw std::invalid_argument("GW spec JSON: offspring[" + std::to_string(i) + "][" +
                                    std::to_string(e) + "] needs fields 'z' and 'p'");
      OffspringAtom a;
      a.z = entry.at("z").get<std::vector<std::int64_t>>();
      a.p = entry.at("p").get<double>();
      if (static_cast<std::int32_t>(a.z.size()) != spec.kappa)
        throw std::invalid_argument("GW spec JSON: offspring[" + std::to_string(i) + "][" +
                                    std::to_string(e) + "].z must have kappa entries");
      if (a.p < 0)
        throw std::invalid_argument("GW spec JSON: offspring[" + std::to_string(i) + "][" +
                                    std::to_string(e) + "].p is negative");
      atoms.push_back(std::move(a));
    }
    spec.offspring.push_back(std::move(atoms));
  }
  return spec;
}

namespace detail {

inline std::vector<std::vector<double>> mean_matrix(const GWSpec& spec) {
  std::vector<std::vector<double>> M(spec.kappa, std::vector<double>(spec.kappa, 0.0));
  for (std::int32_t i = 0; i < spec.kappa; ++i)
    for (const auto& a : spec.offspring[i])
      for (std::int32_t j = 0; j < spec.kappa; ++j)
        M[i][j] += a.p * static_cast<double>(a.z[j]);
  return M;
}

inline bool irreducible(const std::vector<std::vector<double>>& M) {
  const std::size_t k = M.size();
  std::vector<std::vector<char>> reach(k, std::vector<char>(k, 0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) reach[i][j] = M[i][j] > 0;
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (reach[i][m] && reach[m][j]) reach[i][j] = 1;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      if (i != j && !reach[i][j]) return false;
  return true;
}

// Dominant eigenvalue and eigenvector of a nonnegative matrix via damped
// power iteration (iterating (M+I)/2 keeps the Perron pair and kills
// oscillation from negative or complex eigenvalues of the same modulus).
struct PowerResult {
  double value = 0;
  std::vector<double> vec;
  bool converged = false;
};

inline PowerResult power_iteration(const std::vector<std::vector<double>>& M, double tol = 1e-13,
                                   int max_iter = 500000) {
  const std::size_t k = M.size();
  PowerResult r;
  r.vec.assign(k, 1.0);
  std::vector<double> next(k);
  for (int it = 0; it < max_iter; ++it) {
    double norm = 0;
    for (std::size_t i = 0; i < k; ++i) {
      double s = r.vec[i];
      for (std::size_t j = 0; j < k; ++j) s += M[i][j] * r.vec[j];
      next[i] = 0.5 * s;
      norm = std::max(norm, std::abs(next[i]));
    }
    if (norm == 0) {
      r.value = 0;
      r.converged = true;
      return r;
    }
    double diff = 0;
    for (std::size_t i = 0; i < k; ++i) {
      next[i] /= norm;
      diff = std::max(diff, std::abs(next[i] - r.vec[i]));
    }
    r.vec = next;
    if (diff < tol) {
      // Rayleigh quotient of the undamped matrix
      double num = 0, den = 0;
      for (std::size_t i = 0; i < k; ++i) {
        double mi = 0;
        for (std::size_t j = 0; j < k; ++j) mi += M[i][j] * r.vec[j];
        num += r.vec[i] * mi;
        den += r.vec[i] * r.vec[i];
      }
      r.value = num / den;
      r.converged = true;
      return r;
    }
  }
  return r;
}

inline std::vector<std::vector<double>> transpose(const std::vector<std::vector<double>>& M) {
  std::vector<std::vector<double>> T(M.size(), std::vector<double>(M.size()));
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j) T[j][i] = M[i][j];
  return T;
}

// Null-space fallback for (M - I) v = 0 by Gaussian elimination; used when
// power iteration stalls on a near-degenerate spectrum.
inline std::optional<std::vector<double>> unit_eigenvector_direct(
    const std::vector<std::vector<double>>& M) {
  const std::size_t k = M.size();
  std::vector<std::vector<double>> a(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) a[i][j] = M[i][j] - (i == j ? 1.0 : 0.0);
  std::vector<std::size_t> piv_col;
  std::size_t row = 0;
  std::vector<std::size_t> col_of_row;
  for (std::size_t col = 0; col < k && row < k; ++col) {
    std::size_t best = row;
    for (std::size_t r2 = row; r2 < k; ++r2)
      if (std::abs(a[r2][col]) > std::abs(a[best][col])) best = r2;
    if (std::abs(a[best][col]) < 1e-10) continue;
    std::swap(a[best], a[row]);
    for (std::size_t r2 = 0; r2 < k; ++r2) {
      if (r2 == row) continue;
      double f = a[r2][col] / a[row][col];
      for (std::size_t c2 = col; c2 < k; ++c2) a[r2][c2] -= f * a[row][c2];
    }
    col_of_row.push_back(col);
    piv_col.push_back(col);
    ++row;
  }
  if (row == k) return std::nullopt;  // no null space: eigenvalue 1 absent
  std::size_t free_col = 0;
  std::vector<char> is_piv(k, 0);
  for (std::size_t c : piv_col) is_piv[c] = 1;
  for (std::size_t c = 0; c < k; ++c)
    if (!is_piv[c]) {
      free_col = c;
      break;
    }
  std::vector<double> v(k, 0.0);
  v[free_col] = 1.0;
  for (std::size_t r2 = 0; r2 < row; ++r2) {
    std::size_t c = col_of_row[r2];
    v[c] = -a[r2][free_col] / a[r2][c];
  }
  double mn = 0;
  for (double x : v) mn = std::min(mn, x);
  if (mn < 0)
    for (double& x : v) x = -x;
  return v;
}

inline std::vector<double> dominant_vector(const std::vector<std::vector<double>>& M,
                                           const char* what) {
  PowerResult pr = power_iteration(M);
  if (pr.converged && std::abs(pr.value - 1.0) < 1e-6) return pr.vec;
  auto direct = unit_eigenvector_direct(M);
  if (direct) return *direct;
  if (pr.converged) return pr.vec;
  throw std::runtime_error(std::string("perron_data: eigenvector iteration failed for ") + what);
}

}  // namespace detail

inline void validate_gw_spec(const GWSpec& spec) {
  if (spec.kappa < 1) throw std::invalid_argument("GW spec: kappa must be >= 1");
  if (static_cast<std::int32_t>(spec.offspring.size()) != spec.kappa)
    throw std::invalid_argument("GW spec: offspring list must have kappa entries");
  bool nonsingular = false;
  for (std::int32_t i = 0; i < spec.kappa; ++i) {
    double sum = 0;
    for (const auto& a : spec.offspring[i]) {
      if (static_cast<std::int32_t>(a.z.size()) != spec.kappa)
        throw std::invalid_argument("GW spec: offspring vector length mismatch for type " +
                                    std::to_string(i + 1));
      std::int64_t tot = 0;
      for (std::int64_t c : a.z) {
        if (c < 0) throw std::invalid_argument("GW spec: negative child count");
        tot += c;
      }
      if (tot >= 2) nonsingular = true;
      sum += a.p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("GW spec: offspring probabilities of type " +
                                  std::to_string(i + 1) + " sum to " + std::to_string(sum));
  }
  if (!nonsingular)
    throw std::invalid_argument("GW spec: singular (no type can have two or more children)");
  auto M = detail::mean_matrix(spec);
  if (spec.kappa > 1 && !detail::irreducible(M))
    throw std::invalid_argument("GW spec: mean matrix is not irreducible");
  detail::PowerResult pr = detail::power_iteration(M);
  double rho = pr.converged ? pr.value : 0.0;
  if (!pr.converged) {
    // degenerate spectra still have a well-defined Perron root; accept if a
    // unit eigenvector exists
    if (detail::unit_eigenvector_direct(M))
      rho = 1.0;
    else
      throw std::runtime_error("GW spec: spectral radius estimation failed");
  }
  if (std::abs(rho - 1.0) > 1e-8)
    throw std::invalid_argument("GW spec: not critical (spectral radius " + std::to_string(rho) +
                                ")");
}

struct PerronData {
  std::vector<std::vector<double>> M;
  std::vector<double> a;  // left eigenvector, sum a_i = 1
  std::vector<double> b;  // right eigenvector, sum a_i b_i = 1
  std::vector<std::vector<std::vector<double>>> Q;  // Q[i][j][k]
  double sigma2 = 0;
  double sigma1_2 = 0;
  std::vector<std::vector<double>> Qmat;
  std::vector<double> chi;

  double b_of(const std::vector<std::int64_t>& z) const {
    double s = 0;
    for (std::size_t j = 0; j < z.size(); ++j) s += b[j] * static_cast<double>(z[j]);
    return s;
  }
};

inline PerronData perron_data(const GWSpec& spec) {
  validate_gw_spec(spec);
  PerronData pd;
  pd.M = detail::mean_matrix(spec);
  pd.b = detail::dominant_vector(pd.M, "right eigenvector");
  pd.a = detail::dominant_vector(detail::transpose(pd.M), "left eigenvector");
  double asum = 0;
  for (double x : pd.a) asum += x;
  for (double& x : pd.a) x /= asum;
  double ab = 0;
  for (std::int32_t i = 0; i < spec.kappa; ++i) ab += pd.a[i] * pd.b[i];
  for (double& x : pd.b) x /= ab;

  pd.Q.assign(spec.kappa, std::vector<std::vector<double>>(
                              spec.kappa, std::vector<double>(spec.kappa, 0.0)));
  for (std::int32_t i = 0; i < spec.kappa; ++i)
    for (const auto& atom : spec.offspring[i])
      for (std::int32_t j = 0; j < spec.kappa; ++j)
        for (std::int32_t k = 0; k < spec.kappa; ++k)
          pd.Q[i][j][k] += atom.p * static_cast<double>(atom.z[j]) *
                           (static_cast<double>(atom.z[k]) - (j == k ? 1.0 : 0.0));
  pd.sigma2 = 0;
  for (std::int32_t i = 0; i < spec.kappa; ++i)
    for (std::int32_t j = 0; j < spec.kappa; ++j)
      for (std::int32_t k = 0; k < spec.kappa; ++k)
        pd.sigma2 += pd.a[i] * pd.b[j] * pd.b[k] * pd.Q[i][j][k];
  if (!(pd.sigma2 > 0)) throw std::runtime_error("perron_data: sigma^2 must be positive");
  pd.sigma1_2 = pd.sigma2 / (pd.a[0] * pd.b[0] * pd.b[0]);

  pd.Qmat.assign(spec.kappa, std::vector<double>(spec.kappa, 0.0));
  for (std::int32_t i = 0; i < spec.kappa; ++i) {
    double offdiag = 0;
    for (std::int32_t j = 0; j < spec.kappa; ++j) {
      if (i == j) continue;
      pd.Qmat[i][j] = pd.b[j] * pd.M[i][j] / pd.b[i];
      offdiag += pd.Qmat[i][j];
    }
    pd.Qmat[i][i] = -offdiag;
  }
  pd.chi.resize(spec.kappa);
  for (std::int32_t i = 0; i < spec.kappa; ++i) pd.chi[i] = pd.a[i] * pd.b[i];
  return pd;
}

// --- extinction of type 1 ------------------------------------------------------

struct ExtinctData {
  std::vector<double> p;            // p[i] = P(no type-1 vertex | root type i+1); p[0] = 0
  std::vector<std::int32_t> kept;   // 1-based types with p > 0
  // zeta_cross[i]: offspring law of type i+1 conditioned on avoiding type 1
  // (empty for types not in `kept`); z vectors keep the original length.
  std::vector<std::vector<OffspringAtom>> zeta_cross;
};

namespace detail {
inline double prod_pow(const std::vector<double>& p, const std::vector<std::int64_t>& z) {
  double out = 1.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    for (std::int64_t c = 0; c < z[j]; ++c) out *= p[j];
    if (out == 0.0) return 0.0;
  }
  return out;
}
}  // namespace detail

inline ExtinctData extinct_conditioned_offspring(const GWSpec& spec) {
  ExtinctData ex;
  ex.p.assign(spec.kappa, 0.0);
  // monotone fixed-point iteration from 0; converges to the minimal solution
  for (int it = 0; it < 1000000; ++it) {
    double delta = 0;
    for (std::int32_t i = 1; i < spec.kappa; ++i) {
      double v = 0;
      for (const auto& atom : spec.offspring[i]) {
        if (atom.z[0] > 0) continue;
        v += atom.p * detail::prod_pow(ex.p, atom.z);
      }
      delta = std::max(delta, std::abs(v - ex.p[i]));
      ex.p[i] = v;
    }
    if (delta < 1e-15) break;
    if (it == 999999)
      throw std::runtime_error("extinct_conditioned_offspring: fixed point did not converge");
  }
  ex.zeta_cross.assign(spec.kappa, {});
  for (std::int32_t i = 1; i < spec.kappa; ++i) {
    if (ex.p[i] <= 0) continue;
    ex.kept.push_back(i + 1);
    for (const auto& atom : spec.offspring[i]) {
      if (atom.z[0] > 0) continue;
      double w = atom.p * detail::prod_pow(ex.p, atom.z) / ex.p[i];
      if (w > 0) ex.zeta_cross[i].push_back({atom.z, w});
    }
  }
  return ex;
}

struct SubcriticalityResult {
  double spectral_radius = 0;  // max over irreducible blocks
  bool pass = false;
  std::vector<double> block_radii;
};

inline SubcriticalityResult subcriticality_check(const ExtinctData& ex) {
  SubcriticalityResult res;
  if (ex.kept.empty()) {
    res.pass = true;
    return res;
  }
  const std::size_t k = ex.kept.size();
  std::vector<std::vector<double>> M(k, std::vector<double>(k, 0.0));
  std::map<std::int32_t, std::size_t> idx;
  for (std::size_t i = 0; i < k; ++i) idx[ex.kept[i]] = i;
  for (std::size_t i = 0; i < k; ++i)
    for (const auto& atom : ex.zeta_cross[ex.kept[i] - 1])
      for (std::size_t j = 0; j < k; ++j)
        M[i][j] += atom.p * static_cast<double>(atom.z[ex.kept[j] - 1]);

  // irreducible components by mutual reachability
  std::vector<std::vector<char>> reach(k, std::vector<char>(k, 0));
  for (std::size_t i = 0; i < k; ++i) {
    reach[i][i] = 1;
    for (std::size_t j = 0; j < k; ++j)
      if (M[i][j] > 0) reach[i][j] = 1;
  }
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (reach[i][m] && reach[m][j]) reach[i][j] = 1;
  std::vector<std::int32_t> comp(k, -1);
  std::int32_t n_comp = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (comp[i] != -1) continue;
    for (std::size_t j = 0; j < k; ++j)
      if (reach[i][j] && reach[j][i]) comp[j] = n_comp;
    ++n_comp;
  }
  for (std::int32_t c = 0; c < n_comp; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < k; ++i)
      if (comp[i] == c) members.push_back(i);
    std::vector<std::vector<double>> B(members.size(), std::vector<double>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = 0; j < members.size(); ++j) B[i][j] = M[members[i]][members[j]];
    detail::PowerResult pr = detail::power_iteration(B);
    double radius = pr.converged ? std::max(pr.value, 0.0) : 1.0;
    res.block_radii.push_back(radius);
    res.spectral_radius = std::max(res.spectral_radius, radius);
  }
  res.pass = res.spectral_radius < 1.0 - 1e-8;
  return res;
}

// --- counting tables -----------------------------------------------------------

// Exact distribution tables of the number of type-1 vertices: tree laws per
// root type and forest laws per root-type multiset. Columns are filled in
// increasing n; within a column the types other than 1 are coupled through
// zero-count subtrees and solved as a small linear system.
class CountTable {
 public:
  CountTable(const GWSpec& spec, std::int64_t n_max, std::int64_t ceiling = 5000)
      : spec_(spec), n_max_(n_max) {
    if (n_max < 1) throw std::invalid_argument("count_tables: n_max must be >= 1");
    if (n_max > ceiling) throw std::invalid_argument("count_tables: n_max exceeds ceiling");
    build();
  }

  std::int64_t n_max() const { return n_max_; }
  const GWSpec& spec() const { return spec_; }

  // P(number of type-1 vertices = n) for a tree rooted at `type` (1-based).
  double tree_pmf(std::int32_t type, std::int64_t n) const {
    check_type(type);
    if (n < 0 || n > n_max_) throw std::out_of_range("CountTable: n out of range");
    return tree_[type - 1][static_cast<std::size_t>(n)];
  }

  const std::vector<double>& tree_row(std::int32_t type) const {
    check_type(type);
    return tree_[type - 1];
  }

  // Forest law for root multiset z (counts per type, 1-based vector of
  // length kappa). Cached; thread-safe.
  const std::vector<double>& forest_pmf(const std::vector<std::int64_t>& z) const {
    if (static_cast<std::int32_t>(z.size()) != spec_.kappa)
      throw std::invalid_argument("CountTable: forest multiset has wrong length");
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return forest_locked(z);
  }

  double extinction_prob(std::int32_t type) const {
    check_type(type);
    return tree_[type - 1][0];
  }

  // Values of n <= n_max with positive tree probability (lattice report).
  std::vector<std::int64_t> support_of(std::int32_t type) const {
    check_type(type);
    std::vector<std::int64_t> out;
    for (std::int64_t n = 1; n <= n_max_; ++n)
      if (tree_pmf(type, n) > 0) out.push_back(n);
    return out;
  }

 private:
  void check_type(std::int32_t type) const {
    if (type < 1 || type > spec_.kappa) throw std::out_of_range("CountTable: type out of range");
  }

  static void kahan_add(double& sum, double& comp, double term) {
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }

  // convolution entry (a * b)[n]
  static double conv_at(const std::vector<double>& a, const std::vector<double>& b,
                        std::int64_t n) {
    double sum = 0, comp = 0;
    for (std::int64_t m = 0; m <= n; ++m)
      kahan_add(sum, comp, a[static_cast<std::size_t>(m)] * b[static_cast<std::size_t>(n - m)]);
    return sum;
  }

  const std::vector<double>& forest_locked(const std::vector<std::int64_t>& z) const {
    auto it = forest_.find(z);
    if (it != forest_.end()) return it->second;
    std::int64_t total = 0;
    for (std::int64_t c : z) total += c;
    std::vector<double> arr;
    if (total == 0) {
      arr.assign(static_cast<std::size_t>(n_max_) + 1, 0.0);
      arr[0] = 1.0;
    } else {
      std::int32_t piv = 0;
      while (z[piv] == 0) ++piv;
      std::vector<std::int64_t> rest = z;
      rest[piv] -= 1;
      const std::vector<double>& sub = forest_locked(rest);
      arr.resize(static_cast<std::size_t>(n_max_) + 1);
      for (std::int64_t n = 0; n <= n_max_; ++n) arr[static_cast<std::size_t>(n)] = conv_at(tree_[piv], sub, n);
    }
    if (forest_.size() >= kMaxCacheEntries) {
      forest_.erase(forest_.begin());  // bounded cache; drop an arbitrary entry
    }
    auto [ins, ok] = forest_.emplace(z, std::move(arr));
    (void)ok;
    return ins->second;
  }

  void build() {
    const std::int32_t kappa = spec_.kappa;
    ExtinctData ex = extinct_conditioned_offspring(spec_);
    tree_.assign(kappa, std::vector<double>(static_cast<std::size_t>(n_max_) + 1, 0.0));
    for (std::int32_t i = 1; i < kappa; ++i) tree_[i][0] = ex.p[i];
    // closure of support multisets under removing the pivot type
    {
      std::lock_guard<std::mutex> lock(cache_mutex_);
      std::vector<double> marker(1, 0.0);
      for (std::int32_t i = 0; i < kappa; ++i)
        for (const auto& atom : spec_.offspring[i]) {
          std::vector<std::int64_t> z = atom.z;
          for (;;) {
            if (!closure_keys_.emplace(z).second) break;
            std::int64_t total = 0;
            for (std::int64_t c : z) total += c;
            if (total == 0) break;
            std::int32_t piv = 0;
            while (z[piv] == 0) ++piv;
            z[piv] -= 1;
          }
        }
      for (const auto& key : closure_keys_) {
        std::vector<double> arr(static_cast<std::size_t>(n_max_) + 1, 0.0);
        arr[0] = detail::prod_pow(ex.p, key);
        forest_[key] = std::move(arr);
      }
    }

    // coupling matrix A[j][k] (types 2..kappa): weight of a child subtree of
    // type k carrying the whole count while all other children carry zero
    std::vector<std::vector<double>> A(kappa - 1, std::vector<double>(kappa - 1, 0.0));
    std::vector<double> p0(kappa, 0.0);
    for (std::int32_t i = 1; i < kappa; ++i) p0[i] = ex.p[i];
    for (std::int32_t j = 1; j < kappa; ++j)
      for (const auto& atom : spec_.offspring[j])
        for (std::int32_t k = 1; k < kappa; ++k) {
          if (atom.z[k] == 0) continue;
          std::vector<std::int64_t> rest = atom.z;
          rest[k] -= 1;
          A[j - 1][k - 1] += atom.p * static_cast<double>(atom.z[k]) * detail::prod_pow(p0, rest);
        }

    for (std::int64_t n = 1; n <= n_max_; ++n) {
      // type 1 first: its own count shifts the forest by one
      {
        double sum = 0, comp = 0;
        for (const auto& atom : spec_.offspring[0])
          kahan_add(sum, comp, atom.p * forest_entry(atom.z, n - 1));
        tree_[0][static_cast<std::size_t>(n)] = sum;
      }
      if (kappa > 1) {
        // provisional pass with the unknown column entries set to zero
        refresh_column(n);
        std::vector<double> c(kappa - 1, 0.0);
        for (std::int32_t j = 1; j < kappa; ++j) {
          double sum = 0, comp = 0;
          for (const auto& atom : spec_.offspring[j])
            kahan_add(sum, comp, atom.p * forest_entry(atom.z, n));
          c[j - 1] = sum;
        }
        std::vector<double> x = solve_linear(A, c);
        for (std::int32_t j = 1; j < kappa; ++j) tree_[j][static_cast<std::size_t>(n)] = x[j - 1];
      }
      refresh_column(n);
    }
  }

  double forest_entry(const std::vector<std::int64_t>& z, std::int64_t n) {
    if (n < 0) return 0.0;
    auto it = forest_.find(z);
    if (it == forest_.end()) throw std::logic_error("CountTable: multiset missing from closure");
    return it->second[static_cast<std::size_t>(n)];
  }

  void refresh_column(std::int64_t n) {
    // increasing multiset size so sub-forests are already updated
    std::vector<const std::vector<std::int64_t>*> keys;
    for (const auto& key : closure_keys_) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [](const auto* a, const auto* b) {
      std::int64_t ta = 0, tb = 0;
      for (auto c : *a) ta += c;
      for (auto c : *b) tb += c;
      if (ta != tb) return ta < tb;
      return *a < *b;
    });
    for (const auto* key : keys) {
      std::int64_t total = 0;
      for (auto c : *key) total += c;
      if (total == 0) continue;
      std::int32_t piv = 0;
      while ((*key)[piv] == 0) ++piv;
      std::vector<std::int64_t> rest = *key;
      rest[piv] -= 1;
      const std::vector<double>& sub = forest_[rest];
      forest_[*key][static_cast<std::size_t>(n)] = conv_at(tree_[piv], sub, n);
    }
  }

  // solve (I - A) x = c by Gaussian elimination
  static std::vector<double> solve_linear(const std::vector<std::vector<double>>& A,
                                          std::vector<double> c) {
    const std::size_t k = A.size();
    std::vector<std::vector<double>> m(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) m[i][j] = (i == j ? 1.0 : 0.0) - A[i][j];
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t best = col;
      for (std::size_t r = col; r < k; ++r)
        if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
      if (std::abs(m[best][col]) < 1e-14)
        throw std::runtime_error("count_tables: singular zero-count coupling system");
      std::swap(m[best], m[col]);
      std::swap(c[best], c[col]);
      for (std::size_t r = 0; r < k; ++r) {
        if (r == col) continue;
        double f = m[r][col] / m[col][col];
        for (std::size_t c2 = col; c2 < k; ++c2) m[r][c2] -= f * m[col][c2];
        c[r] -= f * c[col];
      }
    }
    std::vector<double> x(k);
    for (std::size_t i = 0; i < k; ++i) x[i] = c[i] / m[i][i];
    return x;
  }

  GWSpec spec_;
  std::int64_t n_max_;
  std::vector<std::vector<double>> tree_;
  mutable std::map<std::vector<std::int64_t>, std::vector<double>> forest_;
  std::set<std::vector<std::int64_t>> closure_keys_;
  mutable std::mutex cache_mutex_;
  static constexpr std::size_t kMaxCacheEntries = 10000;
};

inline std::shared_ptr<const CountTable> count_tables(const GWSpec& spec, std::int64_t n_max,
                                                      std::int64_t ceiling = 5000) {
  return std::make_shared<const CountTable>(spec, n_max, ceiling);
}

// --- Otter-Dwass cross-check -----------------------------------------------------

struct OtterDwassValues {
  double dp_value = 0;
  double cycle_lemma_value = 0;
};

// For a monotype spec: forest count P(#F = n) from the table against
// (p/n) P(S_n = -p) with S the random walk whose steps are (offspring - 1).
inline OtterDwassValues otter_dwass_check(const GWSpec& spec, const CountTable& counts,
                                          std::int64_t p, std::int64_t n) {
  if (spec.kappa != 1)
    throw std::invalid_argument("otter_dwass_check: monotype projection required");
  if (p < 1 || n < 1) throw std::invalid_argument("otter_dwass_check: p, n must be >= 1");
  OtterDwassValues out;
  out.dp_value = counts.forest_pmf(std::vector<std::int64_t>{p})[static_cast<std::size_t>(n)];

  std::int64_t zmax = 0;
  for (const auto& atom : spec.offspring[0]) zmax = std::max(zmax, atom.z[0]);
  // walk value ranges over [-n, n*(zmax-1)]; index shifted by n
  const std::int64_t width = n * (zmax - 1) + n + 1;
  std::vector<double> dist(static_cast<std::size_t>(width), 0.0);
  dist[static_cast<std::size_t>(n)] = 1.0;  // S_0 = 0 at offset n
  for (std::int64_t step = 0; step < n; ++step) {
    std::vector<double> next(static_cast<std::size_t>(width), 0.0);
    for (std::int64_t v = 0; v < width; ++v) {
      double mass = dist[static_cast<std::size_t>(v)];
      if (mass == 0) continue;
      for (const auto& atom : spec.offspring[0]) {
        std::int64_t nv = v + atom.z[0] - 1;
        if (nv >= 0 && nv < width) next[static_cast<std::size_t>(nv)] += mass * atom.p;
      }
    }
    dist.swap(next);
  }
  double hit = (n - p >= 0) ? dist[static_cast<std::size_t>(n - p)] : 0.0;
  out.cycle_lemma_value = (static_cast<double>(p) / static_cast<double>(n)) * hit;
  return out;
}

// Leading local-limit term (b_z / b_1) / sqrt(2 pi sigma1^2 n^3).
inline double asymptotic_count_estimate(const PerronData& pd, const std::vector<std::int64_t>& z,
                                        std::int64_t n) {
  double bz = pd.b_of(z);
  return bz / pd.b[0] / std::sqrt(2.0 * M_PI * pd.sigma1_2 * std::pow(static_cast<double>(n), 3));
}

// --- the splitting kernel of the conditioned tree ---------------------------------

// Law of the ranked (size, type) children partition of a size-n type-i vertex
// in the tree conditioned to hold n type-1 vertices. Sampling draws the
// children type multiset first, then allocates subtree counts sequentially;
// zero-size parts are retained.
class GWVertexKernel : public SplittingKernel {
 public:
  GWVertexKernel(GWSpec spec, std::shared_ptr<const CountTable> counts,
                 std::int64_t enum_limit = 64)
      : spec_(std::move(spec)), counts_(std::move(counts)), enum_limit_(enum_limit) {}

  std::int32_t kappa() const override { return spec_.kappa; }

  DiscreteTypedPartition sample(std::int64_t n, std::int32_t type, Rng& rng) const override {
    check(n, type);
    const std::int64_t target = n - (type == 1 ? 1 : 0);
    double denom = counts_->tree_pmf(type, n);
    if (denom <= 0)
      throw std::invalid_argument("gw kernel: conditioning event has zero probability (n=" +
                                  std::to_string(n) + ", type=" + std::to_string(type) + ")");
    // stage 1: children type multiset
    const auto& atoms = spec_.offspring[type - 1];
    std::vector<double> w(atoms.size());
    for (std::size_t e = 0; e < atoms.size(); ++e)
      w[e] = atoms[e].p * forest_at(atoms[e].z, target);
    std::vector<std::int64_t> z = atoms[rng.discrete(w, denom)].z;

    // stage 2: sequential allocation of subtree counts
    std::vector<Part> parts;
    std::int64_t remaining = target;
    std::vector<std::int64_t> rest = z;
    for (;;) {
      std::int64_t total = 0;
      for (std::int64_t c : rest) total += c;
      if (total == 0) break;
      std::int32_t piv = 0;
      while (rest[piv] == 0) ++piv;
      const double whole = counts_->forest_pmf(rest)[static_cast<std::size_t>(remaining)];
      rest[piv] -= 1;
      const std::vector<double>& rest_arr = counts_->forest_pmf(rest);
      const std::vector<double>& tree_arr = counts_->tree_row(piv + 1);
      double u = rng.uniform() * whole;
      double acc = 0;
      std::int64_t chosen = remaining;
      for (std::int64_t s = 0; s <= remaining; ++s) {
        acc += tree_arr[static_cast<std::size_t>(s)] *
               rest_arr[static_cast<std::size_t>(remaining - s)];
        if (u < acc) {
          chosen = s;
          break;
        }
      }
      parts.push_back({chosen, piv + 1});
      remaining -= chosen;
    }
    return make_partition(std::move(parts), n, /*allow_zero=*/true);
  }

  std::optional<KernelSupport> support(std::int64_t n, std::int32_t type) const override {
    check(n, type);
    if (n > enum_limit_) return std::nullopt;
    const std::int64_t target = n - (type == 1 ? 1 : 0);
    double denom = counts_->tree_pmf(type, n);
    if (denom <= 0)
      throw std::invalid_argument("gw kernel: conditioning event has zero probability");
    KernelSupport out;
    for (const auto& atom : spec_.offspring[type - 1]) {
      std::vector<std::pair<std::vector<Part>, double>> partial = {{{}, atom.p / denom}};
      for (std::int32_t c = 0; c < spec_.kappa; ++c) {
        if (atom.z[c] == 0) continue;
        std::vector<std::pair<std::vector<Part>, double>> grown;
        for (const auto& [parts, mass] : partial)
          extend_same_type(parts, mass, c + 1, atom.z[c], target, grown);
        partial.swap(grown);
      }
      for (auto& [parts, mass] : partial) {
        std::int64_t sum = 0;
        for (const Part& p : parts) sum += p.size;
        if (sum != target || mass <= 0) continue;
        out.push_back({make_partition(parts, n, /*allow_zero=*/true), mass});
      }
    }
    std::sort(out.begin(), out.end(),
              [](const WeightedPartition& a, const WeightedPartition& b) {
                return a.partition < b.partition;
              });
    return out;
  }

  const CountTable& counts() const { return *counts_; }
  const GWSpec& gw_spec() const { return spec_; }

 private:
  void check(std::int64_t n, std::int32_t type) const {
    if (type < 1 || type > spec_.kappa) throw std::out_of_range("gw kernel: type out of range");
    if (n < 0 || n > counts_->n_max())
      throw std::out_of_range("gw kernel: n beyond counting tables");
  }

  double forest_at(const std::vector<std::int64_t>& z, std::int64_t n) const {
    if (n < 0) return 0.0;
    return counts_->forest_pmf(z)[static_cast<std::size_t>(n)];
  }

  // enumerate nonincreasing size tuples for `count` children of one type,
  // with the multinomial arrangement factor
  void extend_same_type(const std::vector<Part>& base, double mass, std::int32_t type,
                        std::int64_t count, std::int64_t budget,
                        std::vector<std::pair<std::vector<Part>, double>>& out) const {
    std::vector<std::int64_t> sizes;
    std::function<void(std::int64_t, std::int64_t, double)> rec =
        [&](std::int64_t left, std::int64_t cap, double prob) {
          if (left == 0) {
            // arrangement count: count! / prod over repeated sizes
            double arr = 1;
            for (std::int64_t i = 2; i <= count; ++i) arr *= static_cast<double>(i);
            std::size_t run = 1;
            for (std::size_t i = 1; i <= sizes.size(); ++i) {
              if (i < sizes.size() && sizes[i] == sizes[i - 1]) {
                ++run;
              } else {
                for (std::size_t r = 2; r <= run; ++r) arr /= static_cast<double>(r);
                run = 1;
              }
            }
            std::vector<Part> parts = base;
            for (std::int64_t s : sizes) parts.push_back({s, type});
            out.push_back({std::move(parts), mass * prob * arr});
            return;
          }
          std::int64_t top = std::min(cap, budget);
          for (std::int64_t s = top; s >= 0; --s) {
            double ps = counts_->tree_pmf(type, s);
            if (ps <= 0 && s > 0) continue;
            if (s * left < 0) continue;
            sizes.push_back(s);
            std::int64_t sum = 0;
            for (std::int64_t x : sizes) sum += x;
            if (sum <= budget) rec(left - 1, s, prob * ps);
            sizes.pop_back();
          }
        };
    rec(count, budget, 1.0);
  }

  GWSpec spec_;
  std::shared_ptr<const CountTable> counts_;
  std::int64_t enum_limit_;
};

inline std::shared_ptr<const GWVertexKernel> gw_splitting_kernel(
    const GWSpec& spec, std::shared_ptr<const CountTable> counts, std::int64_t enum_limit = 64) {
  return std::make_shared<const GWVertexKernel>(spec, std::move(counts), enum_limit);
}

// --- conditioned tree sampling -----------------------------------------------------

// Galton-Watson tree with offspring laws `laws` (over the original type set);
// node sizes are left 0 and filled by the caller if needed.
inline MBTree sample_offspring_tree(const std::vector<std::vector<OffspringAtom>>& laws,
                                    std::int32_t type, Rng& rng, std::int64_t max_nodes) {
  MBTree t;
  t.nodes.push_back({0, type, -1, -1, 0, 0});
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    const auto& law = laws[t.nodes[v].type - 1];
    if (law.empty()) continue;
    std::vector<double> w(law.size());
    for (std::size_t e = 0; e < law.size(); ++e) w[e] = law[e].p;
    const auto& z = law[rng.discrete(w)].z;
    std::int64_t nc = 0;
    for (std::int64_t c : z) nc += c;
    if (nc == 0) continue;
    if (static_cast<std::int64_t>(t.nodes.size()) + nc > max_nodes)
      throw NodeCapExceeded("sample_offspring_tree: node cap exceeded");
    t.nodes[v].first_child = static_cast<std::int32_t>(t.nodes.size());
    t.nodes[v].n_children = static_cast<std::int32_t>(nc);
    for (std::int32_t j = 0; j < static_cast<std::int32_t>(z.size()); ++j)
      for (std::int64_t c = 0; c < z[j]; ++c)
        t.nodes.push_back({0, j + 1, static_cast<std::int32_t>(v), -1, 0,
                           static_cast<std::int32_t>(t.nodes[v].depth + 1)});
  }
  return t;
}

// Conditioned tree via the splitting kernel. With `with_zero_subtrees` the
// zero-size parts are expanded into independent subtrees conditioned on
// avoiding type 1; otherwise they are removed.
inline MBTree sample_conditioned_gw(const GWVertexKernel& kernel, std::int64_t n,
                                    std::int32_t type, Rng& rng, bool with_zero_subtrees,
                                    const ExtinctData* extinct = nullptr,
                                    std::int64_t max_nodes = 100'000'000) {
  if (!with_zero_subtrees) {
    auto pruned = ZeroPrunedKernel(std::make_shared<GWVertexKernel>(kernel));
    return sample_mb_tree(pruned, n, type, rng, {max_nodes, false});
  }
  if (!extinct)
    throw std::invalid_argument("sample_conditioned_gw: extinct laws required to expand zeros");
  MBTree t = sample_mb_tree(kernel, n, type, rng, {max_nodes, false});
  // graft a type-1-free subtree below every zero-size node
  MBTree out;
  out.nodes = t.nodes;
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    if (t.nodes[v].size != 0 || t.nodes[v].parent == -1) continue;
    if (t.nodes[v].n_children != 0) continue;
    MBTree sub = sample_offspring_tree(extinct->zeta_cross, t.nodes[v].type, rng, max_nodes);
    // splice sub below v (skip sub's root, which coincides with v)
    std::int32_t base = static_cast<std::int32_t>(out.nodes.size());
    if (sub.nodes.size() == 1) continue;
    std::vector<std::int32_t> remap(sub.nodes.size(), -1);
    remap[0] = static_cast<std::int32_t>(v);
    for (std::size_t u = 1; u < sub.nodes.size(); ++u) {
      MBTree::Node nd = sub.nodes[u];
      remap[u] = base + static_cast<std::int32_t>(u) - 1;
      nd.parent = remap[nd.parent];
      nd.first_child = -1;
      nd.n_children = 0;
      nd.depth = out.nodes[nd.parent].depth + 1;
      out.nodes.push_back(nd);
      if (out.nodes[nd.parent].first_child == -1)
        out.nodes[nd.parent].first_child = static_cast<std::int32_t>(out.nodes.size() - 1);
      out.nodes[nd.parent].n_children++;
    }
  }
  return out;
}

// --- Kesten bias ----------------------------------------------------------------

struct KestenBias {
  // biased[j]: the size-biased offspring law of type j+1
  std::vector<std::vector<OffspringAtom>> biased;
  // spine_type_law[j][k]: probability the spine continues with type k+1
  std::vector<std::vector<double>> spine_type_law;
};

inline KestenBias kesten_bias(const GWSpec& spec, const PerronData& pd) {
  KestenBias kb;
  kb.biased.resize(spec.kappa);
  kb.spine_type_law.assign(spec.kappa, std::vector<double>(spec.kappa, 0.0));
  for (std::int32_t j = 0; j < spec.kappa; ++j) {
    for (const auto& atom : spec.offspring[j]) {
      double bz = pd.b_of(atom.z);
      double w = bz / pd.b[j] * atom.p;
      if (w > 0) kb.biased[j].push_back({atom.z, w});
      for (std::int32_t k = 0; k < spec.kappa; ++k)
        kb.spine_type_law[j][k] += atom.p * static_cast<double>(atom.z[k]) * pd.b[k] / pd.b[j];
    }
  }
  return kb;
}

// --- helpers shared with tests and experiments -------------------------------------

// Monotype tree conditioned on its number of leaves: the classical splitting
// kernel with leaf counting. Conservative for n >= 2.
class GWLeafKernel : public SplittingKernel {
 public:
  GWLeafKernel(GWSpec spec, std::int64_t n_max, std::int64_t enum_limit = 64)
      : spec_(std::move(spec)), n_max_(n_max), enum_limit_(enum_limit) {
    if (spec_.kappa != 1) throw std::invalid_argument("GWLeafKernel: monotype spec required");
    build();
  }

  std::int32_t kappa() const override { return 1; }

  double leaf_pmf(std::int64_t n) const {
    if (n < 0 || n > n_max_) throw std::out_of_range("GWLeafKernel: n out of range");
    return leaf_[static_cast<std::size_t>(n)];
  }

  DiscreteTypedPartition sample(std::int64_t n, std::int32_t, Rng& rng) const override {
    if (n < 1 || n > n_max_) throw std::out_of_range("GWLeafKernel: n out of range");
    if (n == 1) {
      // a 1-leaf tree is a unary chain; the root is internal w.p. zeta(1)
      return rng.uniform() < p_unary_ ? make_partition({{1, 1}}, 1)
                                      : DiscreteTypedPartition{{}, 1, false};
    }
    const double denom = leaf_[static_cast<std::size_t>(n)];
    if (denom <= 0) throw std::invalid_argument("GWLeafKernel: zero-probability conditioning");
    std::vector<double> w(powers_.size(), 0.0);
    for (std::size_t c = 0; c < powers_.size(); ++c)
      if (count_prob_[c] > 0 && c >= 2)
        w[c] = count_prob_[c] * powers_[c][static_cast<std::size_t>(n)];
    // a single child would carry all n leaves
    if (count_prob_.size() > 1 && count_prob_[1] > 0)
      w[1] = count_prob_[1] * leaf_[static_cast<std::size_t>(n)];
    std::size_t c = rng.discrete(w, denom);
    std::vector<Part> parts;
    std::int64_t remaining = n;
    for (std::size_t left = c; left >= 1; --left) {
      if (left == 1) {
        parts.push_back({remaining, 1});
        break;
      }
      const std::vector<double>& whole = powers_[left];
      double u = rng.uniform() * whole[static_cast<std::size_t>(remaining)];
      double acc = 0;
      std::int64_t chosen = remaining;
      for (std::int64_t s = 1; s <= remaining; ++s) {
        acc += leaf_[static_cast<std::size_t>(s)] *
               powers_[left - 1][static_cast<std::size_t>(remaining - s)];
        if (u < acc) {
          chosen = s;
          break;
        }
      }
      parts.push_back({chosen, 1});
      remaining -= chosen;
    }
    return make_partition(std::move(parts), n);
  }

  std::optional<KernelSupport> support(std::int64_t n, std::int32_t) const override {
    if (n > enum_limit_) return std::nullopt;
    if (n == 1) {
      KernelSupport out;
      if (p_unary_ < 1) out.push_back({DiscreteTypedPartition{{}, 1, false}, 1.0 - p_unary_});
      if (p_unary_ > 0) out.push_back({make_partition({{1, 1}}, 1), p_unary_});
      return out;
    }
    const double denom = leaf_[static_cast<std::size_t>(n)];
    KernelSupport out;
    std::vector<std::int64_t> sizes;
    std::function<void(std::int64_t, std::int64_t, std::int64_t, double)> rec =
        [&](std::int64_t left, std::int64_t cap, std::int64_t rem, double prob) {
          if (left == 0) {
            if (rem != 0 || prob <= 0) return;
            double arr = 1;
            for (std::size_t i = 2; i <= sizes.size(); ++i) arr *= static_cast<double>(i);
            std::size_t run = 1;
            for (std::size_t i = 1; i <= sizes.size(); ++i) {
              if (i < sizes.size() && sizes[i] == sizes[i - 1]) {
                ++run;
              } else {
                for (std::size_t r = 2; r <= run; ++r) arr /= static_cast<double>(r);
                run = 1;
              }
            }
            std::vector<Part> parts;
            for (std::int64_t s : sizes) parts.push_back({s, 1});
            out.push_back({make_partition(std::move(parts), n), prob * arr / denom});
            return;
          }
          for (std::int64_t s = std::min(cap, rem - (left - 1)); s >= 1; --s) {
            sizes.push_back(s);
            rec(left - 1, s, rem - s, prob * leaf_[static_cast<std::size_t>(s)]);
            sizes.pop_back();
          }
        };
    for (std::size_t c = 1; c < count_prob_.size(); ++c) {
      if (count_prob_[c] <= 0) continue;
      rec(static_cast<std::int64_t>(c), n, n, count_prob_[c]);
    }
    std::sort(out.begin(), out.end(), [](const WeightedPartition& a, const WeightedPartition& b) {
      return a.partition < b.partition;
    });
    return out;
  }

  std::optional<std::int64_t> conservative_from() const override { return 2; }

 private:
  void build() {
    std::int64_t cmax = 0;
    for (const auto& atom : spec_.offspring[0]) cmax = std::max(cmax, atom.z[0]);
    count_prob_.assign(static_cast<std::size_t>(cmax) + 1, 0.0);
    for (const auto& atom : spec_.offspring[0]) count_prob_[static_cast<std::size_t>(atom.z[0])] += atom.p;
    p_unary_ = count_prob_.size() > 1 ? count_prob_[1] : 0.0;
    if (p_unary_ >= 1.0) throw std::invalid_argument("GWLeafKernel: offspring law is purely unary");
    leaf_.assign(static_cast<std::size_t>(n_max_) + 1, 0.0);
    powers_.assign(count_prob_.size(), std::vector<double>(static_cast<std::size_t>(n_max_) + 1, 0.0));
    powers_[0][0] = 1.0;  // empty forest
    for (std::int64_t n = 1; n <= n_max_; ++n) {
      // forests of c >= 2 trees never put all n leaves in one tree, so their
      // column n closes before leaf_[n] is known
      for (std::size_t c = 2; c < powers_.size(); ++c) {
        double s = 0;
        for (std::int64_t m = 1; m < n; ++m)
          s += leaf_[static_cast<std::size_t>(m)] * powers_[c - 1][static_cast<std::size_t>(n - m)];
        powers_[c][static_cast<std::size_t>(n)] = s;
      }
      double v = (n == 1) ? count_prob_[0] : 0.0;
      for (std::size_t c = 2; c < count_prob_.size(); ++c)
        if (count_prob_[c] > 0) v += count_prob_[c] * powers_[c][static_cast<std::size_t>(n)];
      leaf_[static_cast<std::size_t>(n)] = v / (1.0 - p_unary_);
      if (powers_.size() > 1) powers_[1][static_cast<std::size_t>(n)] = leaf_[static_cast<std::size_t>(n)];
    }
  }

  GWSpec spec_;
  std::int64_t n_max_;
  std::int64_t enum_limit_;
  double p_unary_ = 0;
  std::vector<double> count_prob_;         // law of the number of children
  std::vector<double> leaf_;               // P(number of leaves = n)
  std::vector<std::vector<double>> powers_;  // powers_[c] = leaf law convolved c times
  };

// First generation of type 1 below forest roots z: number of type-1 vertices
// none of whose proper ancestors have type 1. Exploration stops at type-1
// vertices, so it stays small even though the full tree has infinite mean size.
inline std::int64_t first_generation_type1_count(const GWSpec& spec,
                                                 const std::vector<std::int64_t>& z, Rng& rng,
                                                 std::int64_t cap = 10'000'000) {
  std::vector<std::int32_t> stack;
  for (std::int32_t j = 0; j < spec.kappa; ++j)
    for (std::int64_t c = 0; c < z[j]; ++c) stack.push_back(j + 1);
  std::int64_t count = 0, explored = 0;
  std::vector<double> w;
  while (!stack.empty()) {
    std::int32_t type = stack.back();
    stack.pop_back();
    if (type == 1) {
      ++count;
      continue;
    }
    if (++explored > cap) throw std::runtime_error("first_generation_type1_count: cap exceeded");
    const auto& law = spec.offspring[type - 1];
    w.resize(law.size());
    for (std::size_t e = 0; e < law.size(); ++e) w[e] = law[e].p;
    const auto& zz = law[rng.discrete(w)].z;
    for (std::int32_t j = 0; j < spec.kappa; ++j)
      for (std::int64_t c = 0; c < zz[j]; ++c) stack.push_back(j + 1);
  }
  return count;
}

}  // namespace mbfrag
