#pragma once

// Small statistics toolbox: bit-stable aggregation, Kolmogorov-Smirnov
// statistics, chi-square goodness of fit, and an adaptive Simpson rule used
// by the test oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace mbfrag {

// Pairwise summation: deterministic and far more accurate than a running sum.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct MeanSE {
  double mean = 0;
  double se = 0;
  std::size_t n = 0;
};

inline MeanSE mean_and_se(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("mean_and_se: empty sample");
  MeanSE r;
  r.n = x.size();
  r.mean = pairwise_sum(x) / static_cast<double>(x.size());
  if (x.size() > 1) {
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - r.mean;
      sq[i] = d * d;
    }
    double var = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
    r.se = std::sqrt(var / static_cast<double>(x.size()));
  }
  return r;
}

// --- Kolmogorov-Smirnov ------------------------------------------------------

inline double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline double ks_statistic_one_sample(std::vector<double> a,
                                      const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  double d = 0;
  const double n = static_cast<double>(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double f = cdf(a[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} e^{-2 j^2 lambda^2}.
inline double ks_asymptotic_pvalue(double lambda) {
  if (lambda <= 0) return 1.0;
  double sum = 0;
  for (int j = 1; j <= 100; ++j) {
    double term = 2.0 * ((j % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * j * j * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// --- chi-square goodness of fit ----------------------------------------------

// Observed counts against expected probabilities; cells with expected count
// below `min_expected` are pooled into one bucket. Returns the p-value from
// the asymptotic chi-square distribution.
struct Chi2Result {
  double statistic = 0;
  int dof = 0;
  double pvalue = 1;
};

inline Chi2Result chi2_gof(const std::vector<double>& observed,
                           const std::vector<double>& expected_probs, double total,
                           double min_expected = 5.0) {
  if (observed.size() != expected_probs.size())
    throw std::invalid_argument("chi2_gof: size mismatch");
  std::vector<double> obs, exp;
  double pooled_obs = 0, pooled_exp = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = expected_probs[i] * total;
    if (e < min_expected) {
      pooled_obs += observed[i];
      pooled_exp += e;
    } else {
      obs.push_back(observed[i]);
      exp.push_back(e);
    }
  }
  if (pooled_exp > 0) {
    obs.push_back(pooled_obs);
    exp.push_back(pooled_exp);
  }
  if (obs.size() < 2) throw std::invalid_argument("chi2_gof: fewer than two usable cells");
  Chi2Result r;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    double d = obs[i] - exp[i];
    r.statistic += d * d / exp[i];
  }
  r.dof = static_cast<int>(obs.size()) - 1;
  r.pvalue = boost::math::gamma_q(r.dof / 2.0, r.statistic / 2.0);
  return r;
}

// --- quadrature ---------------------------------------------------------------

namespace detail {
inline double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, m, fa, flm, fm);
  double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = detail::simpson(a, b, fa, fm, fb);
  return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace mbfrag
