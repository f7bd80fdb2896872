#pragma once

// Distances and summary statistics on finite leaf-labeled trees: depth and
// pairwise-distance matrices (integer for graph trees, real for continuum
// marginals), a matched-labeling distance bounding the rooted
// Gromov-Hausdorff distance, and the Kolmogorov-Smirnov statistic used by
// the distributional tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "mbfrag/frag.hpp"
#include "mbfrag/mb_tree.hpp"
#include "mbfrag/stats.hpp"

namespace mbfrag {

struct LeafLabeledMetricTree {
  std::vector<std::int32_t> labels;
  std::vector<double> depth;               // root-to-leaf distances
  std::vector<std::vector<double>> dist;   // pairwise leaf distances

  std::size_t size() const { return labels.size(); }
};

// Depth/pairwise matrix of the labeled leaves of a discrete tree.
inline LeafLabeledMetricTree distance_matrix(const MBTree& t,
                                             const std::vector<std::int32_t>& labels) {
  LeafLabeledMetricTree out;
  out.labels = labels;
  std::vector<std::int32_t> node(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) node[i] = t.node_of_label(labels[i]);
  out.depth.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out.depth[i] = t.nodes[node[i]].depth;
  out.dist.assign(labels.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      std::int32_t a = node[i], b = node[j];
      while (a != b) {
        if (t.nodes[a].depth >= t.nodes[b].depth)
          a = t.nodes[a].parent;
        else
          b = t.nodes[b].parent;
        if (a < 0 || b < 0) throw std::logic_error("distance_matrix: disconnected nodes");
      }
      double d = out.depth[i] + out.depth[j] - 2.0 * t.nodes[a].depth;
      out.dist[i][j] = out.dist[j][i] = d;
    }
  return out;
}

inline LeafLabeledMetricTree distance_matrix(const MarginalTree& t,
                                             const std::vector<std::int32_t>& labels) {
  LeafLabeledMetricTree out;
  out.labels = labels;
  std::vector<std::int32_t> node(labels.size(), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t v = 0; v < t.nodes.size(); ++v)
      if (t.nodes[v].leaf_label == labels[i]) node[i] = static_cast<std::int32_t>(v);
    if (node[i] < 0) throw std::out_of_range("distance_matrix: unknown label");
  }
  out.depth.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out.depth[i] = t.nodes[node[i]].height;
  out.dist.assign(labels.size(), std::vector<double>(labels.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      double split = split_height(t, {labels[i], labels[j]});
      double d = (out.depth[i] - split) + (out.depth[j] - split);
      out.dist[i][j] = out.dist[j][i] = d;
    }
  return out;
}

// Half the sup-norm difference of the root-augmented distance matrices: an
// upper bound on the rooted Gromov-Hausdorff distance under the identity
// matching of the labels.
inline double labeled_tree_distance(const LeafLabeledMetricTree& a,
                                    const LeafLabeledMetricTree& b) {
  if (a.labels != b.labels)
    throw std::invalid_argument("labeled_tree_distance: label sets differ");
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a.depth[i] - b.depth[i]));
    for (std::size_t j = 0; j < a.size(); ++j)
      m = std::max(m, std::abs(a.dist[i][j] - b.dist[i][j]));
  }
  return 0.5 * m;
}

// Four-point condition: for all leaves {i,j,k,l}, the two largest of the
// three pairings d(i,j)+d(k,l), d(i,k)+d(j,l), d(i,l)+d(j,k) are equal.
// Root-augmented check uses depths as distances to a virtual point.
inline double four_point_violation(const LeafLabeledMetricTree& t) {
  const std::size_t n = t.size();
  std::vector<std::vector<double>> d(n + 1, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][n] = d[n][i] = t.depth[i];
    for (std::size_t j = 0; j < n; ++j) d[i][j] = t.dist[i][j];
  }
  double worst = 0;
  for (std::size_t i = 0; i < n + 1; ++i)
    for (std::size_t j = i + 1; j < n + 1; ++j)
      for (std::size_t k = j + 1; k < n + 1; ++k)
        for (std::size_t l = k + 1; l < n + 1; ++l) {
          double s1 = d[i][j] + d[k][l];
          double s2 = d[i][k] + d[j][l];
          double s3 = d[i][l] + d[j][k];
          double top = std::max({s1, s2, s3});
          double mid = s1 + s2 + s3 - top - std::min({s1, s2, s3});
          worst = std::max(worst, top - mid);
        }
  return worst;
}

inline void emit_matrix_csv(const LeafLabeledMetricTree& t, std::ostream& os) {
  os << "label";
  for (std::int32_t lab : t.labels) os << ',' << lab;
  os << ",root\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    os << t.labels[i];
    for (std::size_t j = 0; j < t.size(); ++j) os << ',' << t.dist[i][j];
    os << ',' << t.depth[i] << '\n';
  }
}

// Kolmogorov-Smirnov statistics (two-sample and against a CDF) live in
// stats.hpp; re-export under the names used by the experiment code.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  return ks_statistic_two_sample(a, b);
}
inline double ks_statistic(const std::vector<double>& a,
                           const std::function<double(double)>& cdf) {
  return ks_statistic_one_sample(a, cdf);
}

}  // namespace mbfrag
