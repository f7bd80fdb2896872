#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "mbfrag/frag.hpp"
#include "mbfrag/kernels.hpp"
#include "mbfrag/mb_tree.hpp"
#include "mbfrag/metrics.hpp"

using namespace mbfrag;

namespace {
DislocationSpec test_spec() {
  DislocationSpec d;
  d.kappa = 1;
  d.gamma = 0.5;
  d.atoms = {{{1.0, rank_mass_partition({{0.5, 1}, {0.5, 1}})},
              {0.5, rank_mass_partition({{0.7, 1}, {0.3, 1}})}}};
  validate_dislocation_spec(d);
  return d;
}
}  // namespace

TEST_CASE("distance matrix of a single leaf") {
  Rng rng(3);
  HalvingKernel kernel;
  MBTree t = sample_mb_tree(kernel, 4, 1, rng, {1000, true});
  LeafLabeledMetricTree m = distance_matrix(t, {1});
  REQUIRE(m.size() == 1);
  CHECK(m.depth[0] == 2.0);
  CHECK(m.dist[0][0] == 0.0);
}

TEST_CASE("two leaves split at a common height") {
  // two leaves at depths h+x and h+y with split at h are x+y apart
  Rng rng(5);
  HalvingKernel kernel;
  MBTree t = sample_mb_tree(kernel, 8, 1, rng, {1000, true});
  LeafLabeledMetricTree m = distance_matrix(t, {1, 2});
  double lca = (m.depth[0] + m.depth[1] - m.dist[0][1]) / 2.0;
  CHECK(lca >= 0);
  CHECK(m.dist[0][1] == m.depth[0] + m.depth[1] - 2 * lca);
  CHECK(std::fmod(m.depth[0] + m.depth[1] - m.dist[0][1], 2.0) == 0.0);  // even parity
}

TEST_CASE("four-point condition holds exactly on discrete trees") {
  Rng rng(7);
  HalvingKernel kernel;
  for (int rep = 0; rep < 500; ++rep) {
    MBTree t = sample_mb_tree(kernel, 16, 1, rng, {10000, true});
    LeafLabeledMetricTree m = distance_matrix(t, {1, 2, 3, 4, 5});
    CHECK(four_point_violation(m) == 0.0);
  }
}

TEST_CASE("four-point condition holds on continuum marginals") {
  Rng rng(11);
  DislocationSpec d = test_spec();
  for (int rep = 0; rep < 500; ++rep) {
    MarginalTree t = simulate_marginal_tree(d, 1, 4, rng);
    LeafLabeledMetricTree m = distance_matrix(t, {1, 2, 3, 4});
    CHECK(four_point_violation(m) < 1e-9);
  }
}

TEST_CASE("labeled tree distance on matched labelings") {
  Rng rng(13);
  HalvingKernel kernel;
  MBTree t = sample_mb_tree(kernel, 8, 1, rng, {1000, true});
  LeafLabeledMetricTree a = distance_matrix(t, {1, 2, 3});
  CHECK(labeled_tree_distance(a, a) == 0.0);

  // scaling by c moves every entry by (c-1) times itself
  LeafLabeledMetricTree b = a;
  const double c = 1.5;
  for (auto& d : b.depth) d *= c;
  for (auto& row : b.dist)
    for (auto& v : row) v *= c;
  double max_entry = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    max_entry = std::max(max_entry, a.depth[i]);
    for (double v : a.dist[i]) max_entry = std::max(max_entry, v);
  }
  CHECK(labeled_tree_distance(a, b) == Catch::Approx((c - 1.0) / 2.0 * max_entry));

  LeafLabeledMetricTree wrong = a;
  wrong.labels[0] = 99;
  CHECK_THROWS(labeled_tree_distance(a, wrong));
}

TEST_CASE("labeled tree distance is a pseudometric") {
  Rng rng(17);
  DislocationSpec d = test_spec();
  for (int rep = 0; rep < 100; ++rep) {
    LeafLabeledMetricTree a = distance_matrix(simulate_marginal_tree(d, 1, 3, rng), {1, 2, 3});
    LeafLabeledMetricTree b = distance_matrix(simulate_marginal_tree(d, 1, 3, rng), {1, 2, 3});
    LeafLabeledMetricTree c = distance_matrix(simulate_marginal_tree(d, 1, 3, rng), {1, 2, 3});
    double ab = labeled_tree_distance(a, b);
    double ba = labeled_tree_distance(b, a);
    double ac = labeled_tree_distance(a, c);
    double cb = labeled_tree_distance(c, b);
    CHECK(ab == ba);
    CHECK(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("ks statistic reference values") {
  std::vector<double> a{1, 2, 3, 4, 5};
  CHECK(ks_statistic(a, a) == 0.0);
  std::vector<double> b{10, 11, 12};
  CHECK(ks_statistic(a, b) == 1.0);  // disjoint supports

  Rng rng(19);
  std::vector<double> u(10000);
  for (auto& x : u) x = rng.uniform();
  double ks = ks_statistic(u, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks < 0.02);
  CHECK_THROWS(ks_statistic(std::vector<double>{}, a));
}

TEST_CASE("asymptotic KS survival function") {
  CHECK(ks_asymptotic_pvalue(0.0) == 1.0);
  CHECK(ks_asymptotic_pvalue(0.5) > 0.9);
  CHECK(ks_asymptotic_pvalue(1.36) == Catch::Approx(0.05).margin(0.002));
  CHECK(ks_asymptotic_pvalue(3.0) < 1e-6);
}

TEST_CASE("matrix CSV emission") {
  LeafLabeledMetricTree m;
  m.labels = {1, 2};
  m.depth = {2, 3};
  m.dist = {{0, 3}, {3, 0}};
  std::ostringstream os;
  emit_matrix_csv(m, os);
  CHECK(os.str() == "label,1,2,root\n1,0,3,2\n2,3,0,3\n");
}
