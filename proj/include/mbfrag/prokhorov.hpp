#pragma once

// Prokhorov distance between finite atomic measures on the unit cube, and
// the induced distance between typed mass partitions. A mass partition
// (s_n, i_n) is mapped to the measure s0*delta_0 + sum_n s_n*delta_{s_n e_{i_n}}
// and distances are computed there. Feasibility of a candidate epsilon is
// decided with a max-flow coupling test, so the value is exact for atomic
// inputs up to the bisection tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mbfrag/partitions.hpp"

namespace mbfrag {

struct AtomicMeasure {
  // atoms[i] is a point in [0,1]^d with mass masses[i] >= 0
  std::vector<std::vector<double>> points;
  std::vector<double> masses;

  double total_mass() const {
    double t = 0;
    for (double m : masses) t += m;
    return t;
  }
};

inline void validate_atomic_measure(const AtomicMeasure& mu) {
  if (mu.points.size() != mu.masses.size())
    throw std::invalid_argument("atomic measure: points/masses size mismatch");
  for (const auto& p : mu.points)
    for (double c : p)
      if (c < -1e-9 || c > 1.0 + 1e-9) throw std::invalid_argument("atomic measure: coordinate outside [0,1]");
  if (mu.total_mass() > 1.0 + 1e-9) throw std::invalid_argument("atomic measure: total mass > 1");
}

namespace detail {

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// Maximum flow on the bipartite transport graph whose edges are atom pairs
// at distance <= eps. Small instances only; plain BFS augmentation.
inline double max_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                            const std::vector<std::vector<char>>& allowed) {
  const std::size_t ns = supply.size(), nd = demand.size();
  // node ids: 0 source, 1..ns supplies, ns+1..ns+nd demands, ns+nd+1 sink
  const std::size_t n = ns + nd + 2, sink = ns + nd + 1;
  struct Edge {
    std::size_t to;
    double cap;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> g(n);
  auto add_edge = [&](std::size_t a, std::size_t b, double c) {
    g[a].push_back({b, c, g[b].size()});
    g[b].push_back({a, 0.0, g[a].size() - 1});
  };
  for (std::size_t i = 0; i < ns; ++i) add_edge(0, 1 + i, supply[i]);
  for (std::size_t j = 0; j < nd; ++j) add_edge(1 + ns + j, sink, demand[j]);
  for (std::size_t i = 0; i < ns; ++i)
    for (std::size_t j = 0; j < nd; ++j)
      if (allowed[i][j]) add_edge(1 + i, 1 + ns + j, 2.0);

  double flow = 0;
  const double kEps = 1e-15;
  for (;;) {
    std::vector<std::pair<std::size_t, std::size_t>> pred(n, {SIZE_MAX, SIZE_MAX});
    std::queue<std::size_t> q;
    q.push(0);
    pred[0] = {0, 0};
    while (!q.empty() && pred[sink].first == SIZE_MAX) {
      std::size_t u = q.front();
      q.pop();
      for (std::size_t e = 0; e < g[u].size(); ++e) {
        const Edge& ed = g[u][e];
        if (ed.cap > kEps && pred[ed.to].first == SIZE_MAX) {
          pred[ed.to] = {u, e};
          q.push(ed.to);
        }
      }
    }
    if (pred[sink].first == SIZE_MAX) break;
    double push = 1e30;
    for (std::size_t v = sink; v != 0;) {
      auto [u, e] = pred[v];
      push = std::min(push, g[u][e].cap);
      v = u;
    }
    for (std::size_t v = sink; v != 0;) {
      auto [u, e] = pred[v];
      g[u][e].cap -= push;
      g[g[u][e].to][g[u][e].rev].cap += push;
      v = u;
    }
    flow += push;
  }
  return flow;
}

}  // namespace detail

// Prokhorov distance between two finite atomic measures of (approximately)
// equal total mass: inf{eps > 0 : mass >= total - eps can be coupled moving
// each unit by at most eps}. Bisection to tolerance `tol`.
inline double prokhorov_distance(const AtomicMeasure& mu, const AtomicMeasure& nu,
                                 double tol = 1e-9) {
  validate_atomic_measure(mu);
  validate_atomic_measure(nu);
  const double total = mu.total_mass();
  if (std::abs(total - nu.total_mass()) > 1e-9)
    throw std::invalid_argument("prokhorov_distance: total masses differ");
  if (mu.points.empty() || nu.points.empty()) return total;

  std::vector<std::vector<double>> dist(mu.points.size(), std::vector<double>(nu.points.size()));
  double dmax = 0;
  for (std::size_t i = 0; i < mu.points.size(); ++i)
    for (std::size_t j = 0; j < nu.points.size(); ++j) {
      if (mu.points[i].size() != nu.points[j].size())
        throw std::invalid_argument("prokhorov_distance: dimension mismatch");
      dist[i][j] = detail::euclidean(mu.points[i], nu.points[j]);
      dmax = std::max(dmax, dist[i][j]);
    }

  auto feasible = [&](double eps) {
    std::vector<std::vector<char>> allowed(mu.points.size(),
                                           std::vector<char>(nu.points.size()));
    for (std::size_t i = 0; i < mu.points.size(); ++i)
      for (std::size_t j = 0; j < nu.points.size(); ++j)
        allowed[i][j] = dist[i][j] <= eps + 1e-12;
    double flow = detail::max_transport(mu.masses, nu.masses, allowed);
    return flow >= total - eps - 1e-12;
  };

  double lo = 0.0, hi = std::min(total, dmax);
  if (feasible(lo)) return 0.0;
  if (!feasible(hi)) hi = total;  // moving nothing is allowed once eps >= total
  while (hi - lo > tol) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

// Measure s0*delta_0 + sum s_n*delta_{s_n e_{i_n}} on [0,1]^kappa.
inline AtomicMeasure measure_of_mass_partition(const MassPartition& s, std::int32_t kappa) {
  AtomicMeasure mu;
  std::vector<double> origin(kappa, 0.0);
  if (s.s0 > 0) {
    mu.points.push_back(origin);
    mu.masses.push_back(s.s0);
  }
  for (const auto& a : s.atoms) {
    if (a.mass <= 0) continue;
    std::vector<double> pt(kappa, 0.0);
    if (a.type < 1 || a.type > kappa)
      throw std::invalid_argument("measure_of_mass_partition: type out of range");
    pt[a.type - 1] = a.mass;
    mu.points.push_back(std::move(pt));
    mu.masses.push_back(a.mass);
  }
  return mu;
}

inline double partition_distance(const MassPartition& a, const MassPartition& b,
                                 std::int32_t kappa, double tol = 1e-9) {
  return prokhorov_distance(measure_of_mass_partition(a, kappa),
                            measure_of_mass_partition(b, kappa), tol);
}

}  // namespace mbfrag
