#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "mbfrag/gw.hpp"
#include "mbfrag/stats.hpp"
#include "mbfrag/testing/tree_census.hpp"

using namespace mbfrag;
using mbfrag::testing::Rational;
using mbfrag::testing::RationalGWSpec;
using mbfrag::testing::TreeCensus;

namespace {

GWSpec binary_spec() {
  GWSpec s;
  s.kappa = 1;
  s.offspring = {{{{0}, 0.5}, {{2}, 0.5}}};
  return s;
}

// aperiodic variant: at most two children, unit span
GWSpec aperiodic_binary_spec() {
  GWSpec s;
  s.kappa = 1;
  s.offspring = {{{{0}, 0.25}, {{1}, 0.5}, {{2}, 0.25}}};
  return s;
}

// two types; type 2 avoids type 1 with probability 2/3
GWSpec worked_two_type_spec() {
  GWSpec s;
  s.kappa = 2;
  s.offspring = {{{{0, 0}, 1.0 / 12}, {{2, 0}, 5.0 / 12}, {{0, 1}, 0.5}},
                 {{{0, 0}, 0.5}, {{1, 0}, 0.25}, {{0, 1}, 0.25}}};
  return s;
}

// two types with finite conditioned tree sets (census-friendly)
GWSpec census_two_type_spec() {
  GWSpec s;
  s.kappa = 2;
  s.offspring = {{{{0, 0}, 1.0 / 8}, {{2, 0}, 3.0 / 8}, {{0, 1}, 0.5}},
                 {{{0, 0}, 0.5}, {{1, 0}, 0.5}}};
  return s;
}

RationalGWSpec census_two_type_rational() {
  RationalGWSpec s;
  s.kappa = 2;
  s.offspring = {{{{0, 0}, Rational(1, 8)}, {{2, 0}, Rational(3, 8)}, {{0, 1}, Rational(1, 2)}},
                 {{{0, 0}, Rational(1, 2)}, {{1, 0}, Rational(1, 2)}}};
  return s;
}

GWSpec alternating_spec() {
  GWSpec s;
  s.kappa = 2;
  s.offspring = {{{{0, 0}, 0.5}, {{0, 2}, 0.5}}, {{{0, 0}, 0.5}, {{2, 0}, 0.5}}};
  return s;
}

// random critical irreducible spec: random atoms with at least one child,
// mixed with the empty offspring at the rate that brings the Perron root to 1
GWSpec random_critical_spec(Rng& rng, std::int32_t kappa) {
  GWSpec base;
  base.kappa = kappa;
  for (std::int32_t i = 1; i <= kappa; ++i) {
    std::vector<OffspringAtom> atoms;
    // a cycle edge for irreducibility
    std::vector<std::int64_t> cyc(kappa, 0);
    cyc[i % kappa] = 1;
    atoms.push_back({cyc, 0.3});
    double left = 0.7;
    for (int a = 0; a < 2; ++a) {
      std::vector<std::int64_t> z(kappa, 0);
      int children = 1 + static_cast<int>(rng.uniform_below(3));
      for (int c = 0; c < children; ++c) z[rng.uniform_below(kappa)]++;
      double p = (a == 1) ? left : left * rng.uniform();
      left -= (a == 1) ? 0 : p;
      atoms.push_back({z, a == 1 ? left + p - left : p});
    }
    // normalize exactly
    double tot = 0;
    for (auto& at : atoms) tot += at.p;
    for (auto& at : atoms) at.p /= tot;
    base.offspring.push_back(std::move(atoms));
  }
  double rho = detail::power_iteration(detail::mean_matrix(base)).value;
  double x = 1.0 / rho;  // every atom has >= 1 child, so rho >= 1
  GWSpec crit;
  crit.kappa = kappa;
  for (std::int32_t i = 0; i < kappa; ++i) {
    std::vector<OffspringAtom> atoms;
    std::vector<std::int64_t> empty(kappa, 0);
    atoms.push_back({empty, 1.0 - x});
    for (const auto& at : base.offspring[i]) atoms.push_back({at.z, x * at.p});
    crit.offspring.push_back(std::move(atoms));
  }
  return crit;
}

}  // namespace

TEST_CASE("perron data of the monotype binary law") {
  PerronData pd = perron_data(binary_spec());
  CHECK(pd.a[0] == Catch::Approx(1.0));
  CHECK(pd.b[0] == Catch::Approx(1.0));
  CHECK(pd.Q[0][0][0] == Catch::Approx(1.0));
  CHECK(pd.sigma2 == Catch::Approx(1.0));
  CHECK(pd.sigma1_2 == Catch::Approx(1.0));
}

TEST_CASE("perron data of the alternating two-type law") {
  PerronData pd = perron_data(alternating_spec());
  CHECK(pd.M[0][1] == Catch::Approx(1.0));
  CHECK(pd.M[1][0] == Catch::Approx(1.0));
  CHECK(pd.a[0] == Catch::Approx(0.5).margin(1e-10));
  CHECK(pd.a[1] == Catch::Approx(0.5).margin(1e-10));
  CHECK(pd.b[0] == Catch::Approx(1.0).margin(1e-10));
  CHECK(pd.b[1] == Catch::Approx(1.0).margin(1e-10));
  CHECK(pd.chi[0] == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("perron data of the worked two-type law") {
  PerronData pd = perron_data(worked_two_type_spec());
  CHECK(pd.a[0] == Catch::Approx(0.6).margin(1e-9));
  CHECK(pd.a[1] == Catch::Approx(0.4).margin(1e-9));
  CHECK(pd.b[0] == Catch::Approx(15.0 / 11).margin(1e-9));
  CHECK(pd.b[1] == Catch::Approx(5.0 / 11).margin(1e-9));
  CHECK(pd.sigma2 == Catch::Approx(225.0 / 242).margin(1e-9));
  CHECK(pd.sigma1_2 == Catch::Approx(5.0 / 6).margin(1e-9));
}

TEST_CASE("eigen identities hold on random critical specs") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    GWSpec spec = random_critical_spec(rng, 2 + static_cast<std::int32_t>(rng.uniform_below(2)));
    PerronData pd = perron_data(spec);
    // a M = a and M b = b
    for (std::int32_t i = 0; i < spec.kappa; ++i) {
      double am = 0, mb = 0;
      for (std::int32_t j = 0; j < spec.kappa; ++j) {
        am += pd.a[j] * pd.M[j][i];
        mb += pd.M[i][j] * pd.b[j];
      }
      CHECK(std::abs(am - pd.a[i]) < 1e-8);
      CHECK(std::abs(mb - pd.b[i]) < 1e-8);
    }
    // chi Qmat = 0
    for (std::int32_t j = 0; j < spec.kappa; ++j) {
      double v = 0;
      for (std::int32_t i = 0; i < spec.kappa; ++i) v += pd.chi[i] * pd.Qmat[i][j];
      CHECK(std::abs(v) < 1e-8);
    }
    // the averaged second-moment identity: (1/(2 b1 sigma1)) sum chi_i b_j b_k
    // Q^i_jk / b_i equals sigma sqrt(a1) / 2
    double lhs = 0;
    for (std::int32_t i = 0; i < spec.kappa; ++i)
      for (std::int32_t j = 0; j < spec.kappa; ++j)
        for (std::int32_t k = 0; k < spec.kappa; ++k)
          lhs += pd.chi[i] * pd.b[j] * pd.b[k] * pd.Q[i][j][k] / pd.b[i];
    lhs /= 2.0 * pd.b[0] * std::sqrt(pd.sigma1_2);
    double rhs = std::sqrt(pd.sigma2) * std::sqrt(pd.a[0]) / 2.0;
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("gw spec validation rejects bad inputs") {
  GWSpec sub = binary_spec();
  sub.offspring[0][1].p = 0.4;  // probabilities no longer sum to 1
  CHECK_THROWS(validate_gw_spec(sub));
  GWSpec subcrit;
  subcrit.kappa = 1;
  subcrit.offspring = {{{{0}, 0.6}, {{2}, 0.4}}};
  CHECK_THROWS(validate_gw_spec(subcrit));
  GWSpec singular;
  singular.kappa = 1;
  singular.offspring = {{{{1}, 1.0}}};
  CHECK_THROWS(validate_gw_spec(singular));
}

TEST_CASE("counting tables: monotype binary exact values") {
  GWSpec spec = binary_spec();
  auto counts = count_tables(spec, 20);
  CHECK(counts->tree_pmf(1, 1) == Catch::Approx(0.5));
  CHECK(counts->tree_pmf(1, 3) == Catch::Approx(0.125));
  CHECK(counts->tree_pmf(1, 2) == 0.0);  // even totals impossible
  CHECK(counts->tree_pmf(1, 4) == 0.0);
  // lattice report: support is the odd integers
  auto sup = counts->support_of(1);
  for (std::int64_t n : sup) CHECK(n % 2 == 1);
}

TEST_CASE("counting tables: extinction of type 1 solves the fixed point") {
  // worked spec: p_2 = 1/2 + p_2/4, so p_2 = 2/3
  auto counts = count_tables(worked_two_type_spec(), 10);
  CHECK(counts->extinction_prob(2) == Catch::Approx(2.0 / 3).margin(1e-12));
  CHECK(counts->extinction_prob(1) == 0.0);
  auto census_counts = count_tables(census_two_type_spec(), 10);
  CHECK(census_counts->extinction_prob(2) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("counting tables match the exhaustive census") {
  TreeCensus census(census_two_type_rational());
  auto counts = count_tables(census_two_type_spec(), 10);
  for (std::int32_t type : {1, 2})
    for (std::int64_t m = (type == 1 ? 1 : 0); m <= 8; ++m) {
      double exact = static_cast<double>(census.total_probability(type, m));
      CHECK(std::abs(counts->tree_pmf(type, m) - exact) < 1e-12);
    }
}

TEST_CASE("otter-dwass values on the binary law") {
  GWSpec spec = binary_spec();
  auto counts = count_tables(spec, 220);
  OtterDwassValues v = otter_dwass_check(spec, *counts, 1, 3);
  CHECK(v.dp_value == Catch::Approx(0.125).margin(1e-14));
  CHECK(v.cycle_lemma_value == Catch::Approx(0.125).margin(1e-14));
  OtterDwassValues w = otter_dwass_check(spec, *counts, 2, 2);
  CHECK(w.dp_value == Catch::Approx(0.25).margin(1e-14));
  CHECK(w.cycle_lemma_value == Catch::Approx(0.25).margin(1e-14));
  for (std::int64_t p = 1; p <= 5; ++p)
    for (std::int64_t n = 1; n <= 60; ++n) {
      OtterDwassValues x = otter_dwass_check(spec, *counts, p, n);
      CHECK(std::abs(x.dp_value - x.cycle_lemma_value) < 1e-12);
    }
}

TEST_CASE("local-limit leading term approaches the exact counts") {
  GWSpec spec = aperiodic_binary_spec();
  PerronData pd = perron_data(spec);
  CHECK(pd.sigma1_2 == Catch::Approx(0.5));
  auto counts = count_tables(spec, 2100);
  for (std::int64_t p = 1; p <= 3; ++p) {
    std::vector<std::int64_t> z{p};
    double exact2000 = counts->forest_pmf(z)[2000];
    double lead2000 = asymptotic_count_estimate(pd, z, 2000);
    double exact200 = counts->forest_pmf(z)[200];
    double lead200 = asymptotic_count_estimate(pd, z, 200);
    CHECK(std::abs(exact2000 / lead2000 - 1.0) < 0.05);
    // closer at the larger size
    CHECK(std::abs(exact2000 / lead2000 - 1.0) < std::abs(exact200 / lead200 - 1.0));
  }
  // doubling the root multiset doubles the leading term exactly
  double one = asymptotic_count_estimate(pd, {1}, 500);
  double two = asymptotic_count_estimate(pd, {2}, 500);
  CHECK(two == Catch::Approx(2.0 * one));
}

TEST_CASE("leaf-count kernel of the binary law at n = 2") {
  GWSpec spec = binary_spec();
  GWLeafKernel kernel(spec, 64);
  // P(leaves = 1) = 1/2, P(leaves = 2) = 1/8
  CHECK(kernel.leaf_pmf(1) == Catch::Approx(0.5));
  CHECK(kernel.leaf_pmf(2) == Catch::Approx(0.125));
  auto sup = kernel.support(2, 1);
  REQUIRE(sup);
  REQUIRE(sup->size() == 1);
  CHECK((*sup)[0].partition.parts == std::vector<Part>{{1, 1}, {1, 1}});
  CHECK((*sup)[0].prob == Catch::Approx(1.0));
  // binary trees with 3 leaves always have height 2 above the root split
  Rng rng(4);
  KernelPtr shared = std::make_shared<GWLeafKernel>(spec, 64);
  for (int rep = 0; rep < 200; ++rep) {
    MBTree t = sample_mb_tree(*shared, 3, 1, rng);
    CHECK(t.height() == 2);
  }
}

TEST_CASE("conditioned-tree splitting kernel equals the exact census") {
  GWSpec spec = census_two_type_spec();
  auto counts = count_tables(spec, 16);
  auto kernel = gw_splitting_kernel(spec, counts);
  TreeCensus census(census_two_type_rational());
  for (std::int32_t type : {1, 2})
    for (std::int64_t n = 2; n <= 8; ++n) {
      auto sup = kernel->support(n, type);
      REQUIRE(sup);
      auto exact = census.kernel_census(type, n);
      double total = 0;
      for (const auto& e : *sup) {
        auto it = exact.find(e.partition);
        REQUIRE(it != exact.end());
        CHECK(std::abs(e.prob - static_cast<double>(it->second)) < 1e-12);
        total += e.prob;
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
      CHECK(sup->size() == exact.size());
    }
}

TEST_CASE("kernel sampling agrees with its enumerated support") {
  GWSpec spec = worked_two_type_spec();
  auto counts = count_tables(spec, 16);
  auto kernel = gw_splitting_kernel(spec, counts);
  Rng rng(6);
  auto sup = kernel->support(8, 1);
  REQUIRE(sup);
  std::map<DiscreteTypedPartition, double> freq;
  const int reps = 200000;
  for (int r = 0; r < reps; ++r) freq[kernel->sample(8, 1, rng)] += 1.0;
  std::vector<double> obs, probs;
  for (const auto& e : *sup) {
    probs.push_back(e.prob);
    obs.push_back(freq.count(e.partition) ? freq[e.partition] : 0.0);
  }
  Chi2Result c = chi2_gof(obs, probs, reps);
  CHECK(c.pvalue > 0.01);
}

namespace {
// rejection oracle: unconditioned trees kept when the type-1 count hits n;
// returns the ranked root partition or nothing
std::optional<DiscreteTypedPartition> rejection_root_partition(const GWSpec& spec,
                                                               std::int32_t type, std::int64_t n,
                                                               Rng& rng) {
  MBTree t;
  try {
    t = sample_offspring_tree(spec.offspring, type, rng, 100000);
  } catch (const NodeCapExceeded&) {
    return std::nullopt;
  }
  // fill subtree type-1 counts (children are contiguous, parents first)
  std::vector<std::int64_t> cnt(t.nodes.size(), 0);
  for (std::size_t v = t.nodes.size(); v-- > 0;) {
    cnt[v] = t.nodes[v].type == 1 ? 1 : 0;
    for (std::int32_t c = 0; c < t.nodes[v].n_children; ++c)
      cnt[v] += cnt[t.nodes[v].first_child + c];
  }
  if (cnt[0] != n) return std::nullopt;
  std::vector<Part> parts;
  for (std::int32_t c = 0; c < t.nodes[0].n_children; ++c)
    parts.push_back({cnt[t.nodes[0].first_child + c], t.nodes[0].first_child + c >= 0
                                                          ? t.nodes[t.nodes[0].first_child + c].type
                                                          : 0});
  return make_partition(std::move(parts), n, /*allow_zero=*/true);
}
}  // namespace

TEST_CASE("kernel law matches rejection-sampled conditioned trees") {
  GWSpec spec = worked_two_type_spec();
  auto counts = count_tables(spec, 16);
  auto kernel = gw_splitting_kernel(spec, counts);
  const std::int64_t n = 5;
  auto sup = kernel->support(n, 1);
  REQUIRE(sup);
  Rng rng(8);
  std::map<DiscreteTypedPartition, double> freq;
  double kept = 0;
  for (int r = 0; r < 400000; ++r) {
    auto part = rejection_root_partition(spec, 1, n, rng);
    if (!part) continue;
    freq[*part] += 1.0;
    kept += 1.0;
  }
  REQUIRE(kept > 3000);
  std::vector<double> obs, probs;
  for (const auto& e : *sup) {
    probs.push_back(e.prob);
    obs.push_back(freq.count(e.partition) ? freq[e.partition] : 0.0);
  }
  Chi2Result c = chi2_gof(obs, probs, kept);
  CHECK(c.pvalue > 0.01);
}

namespace {
// canonical encoding of a typed tree (children sorted, types included)
std::string typed_code(const MBTree& t, std::int32_t v) {
  std::vector<std::string> sub;
  for (std::int32_t c = 0; c < t.nodes[v].n_children; ++c)
    sub.push_back(typed_code(t, t.nodes[v].first_child + c));
  std::sort(sub.begin(), sub.end());
  std::string out = "[" + std::to_string(t.nodes[v].type);
  for (const auto& s : sub) out += s;
  return out + "]";
}

// unconditioned tree, abandoned as soon as the type-1 count exceeds n;
// returns the full typed shape code when the count hits n exactly
std::optional<std::string> rejection_full_code(const GWSpec& spec, std::int64_t n, Rng& rng) {
  MBTree t;
  t.nodes.push_back({0, 1, -1, -1, 0, 0});
  std::int64_t type1 = 1;
  std::vector<double> w;
  for (std::size_t v = 0; v < t.nodes.size(); ++v) {
    const auto& law = spec.offspring[t.nodes[v].type - 1];
    w.resize(law.size());
    for (std::size_t e = 0; e < law.size(); ++e) w[e] = law[e].p;
    const auto& z = law[rng.discrete(w)].z;
    std::int64_t nc = 0;
    for (std::int64_t c : z) nc += c;
    if (nc == 0) continue;
    t.nodes[v].first_child = static_cast<std::int32_t>(t.nodes.size());
    t.nodes[v].n_children = static_cast<std::int32_t>(nc);
    for (std::int32_t j = 0; j < static_cast<std::int32_t>(z.size()); ++j)
      for (std::int64_t c = 0; c < z[j]; ++c) {
        if (j == 0 && ++type1 > n) return std::nullopt;
        t.nodes.push_back({0, j + 1, static_cast<std::int32_t>(v), -1, 0, 0});
      }
  }
  if (type1 != n) return std::nullopt;
  return typed_code(t, 0);
}
}  // namespace

TEST_CASE("small conditioned trees: direct and rejection samplers match the census") {
  // total variation of both samplers against the exact full-shape law at
  // n = 4; for this model the zero-count subtrees are bare type-2 leaves, so
  // expanding the zero parts of the direct sampler reproduces full shapes
  GWSpec spec = census_two_type_spec();
  TreeCensus census(census_two_type_rational());
  const std::int64_t n = 4;
  std::map<std::string, double> exact;
  double total = 0;
  for (const auto& s : census.shapes(1, n)) {
    exact[s.code] += static_cast<double>(s.prob);
    total += static_cast<double>(s.prob);
  }
  for (auto& [code, p] : exact) p /= total;

  auto tv_vs_exact = [&](const std::map<std::string, double>& freq) {
    double v = 0;
    std::map<std::string, double> all = exact;
    for (const auto& [code, p] : freq) all.emplace(code, 0.0);
    for (const auto& [code, p] : all) {
      double f = freq.count(code) ? freq.at(code) : 0.0;
      v += std::abs(f - p);
    }
    return v / 2.0;
  };

  auto counts = count_tables(spec, 16);
  auto kernel = gw_splitting_kernel(spec, counts);
  ExtinctData ex = extinct_conditioned_offspring(spec);
  Rng rng(321);
  std::map<std::string, double> direct_freq;
  const int direct_reps = 400000;
  for (int r = 0; r < direct_reps; ++r) {
    MBTree t = sample_conditioned_gw(*kernel, n, 1, rng, true, &ex);
    direct_freq[typed_code(t, 0)] += 1.0 / direct_reps;
  }
  CHECK(tv_vs_exact(direct_freq) < 0.01);

  std::map<std::string, double> rej_freq;
  double kept = 0;
  for (int r = 0; r < 4000000; ++r) {
    auto code = rejection_full_code(spec, n, rng);
    if (code) {
      rej_freq[*code] += 1.0;
      kept += 1.0;
    }
  }
  REQUIRE(kept > 50000);
  for (auto& [code, c] : rej_freq) c /= kept;
  CHECK(tv_vs_exact(rej_freq) < 0.01);
}

TEST_CASE("first-part type marginal approaches the spine law") {
  GWSpec spec = worked_two_type_spec();
  PerronData pd = perron_data(spec);
  auto counts = count_tables(spec, 2100);
  auto kernel = gw_splitting_kernel(spec, counts);
  KestenBias kb = kesten_bias(spec, pd);
  Rng rng(12);
  const int reps = 20000;
  std::vector<double> freq(2, 0.0);
  for (int r = 0; r < reps; ++r) {
    DiscreteTypedPartition lam = kernel->sample(2000, 1, rng);
    freq[lam.parts.front().type - 1] += 1.0;
  }
  for (std::int32_t j = 0; j < 2; ++j) {
    double limit = kb.spine_type_law[0][j];
    double se = std::sqrt(limit * (1 - limit) / reps);
    CHECK(std::abs(freq[j] / reps - limit) < 4 * se + 0.01);
  }
  // the limit for the worked law is (5/6, 1/6)
  CHECK(kb.spine_type_law[0][0] == Catch::Approx(5.0 / 6).margin(1e-9));
  CHECK(kb.spine_type_law[0][1] == Catch::Approx(1.0 / 6).margin(1e-9));
}

TEST_CASE("conditioned trees hold exactly n type-1 vertices") {
  GWSpec spec = worked_two_type_spec();
  auto counts = count_tables(spec, 64);
  auto kernel = gw_splitting_kernel(spec, counts);
  ExtinctData ex = extinct_conditioned_offspring(spec);
  Rng rng(21);
  for (std::int64_t n : {3, 10, 25}) {
    for (int rep = 0; rep < 50; ++rep) {
      MBTree pruned = sample_conditioned_gw(*kernel, n, 1, rng, false);
      std::int64_t count = 0;
      for (const auto& nd : pruned.nodes) count += nd.type == 1 ? 1 : 0;
      CHECK(count == n);
      for (const auto& nd : pruned.nodes) CHECK(nd.size > 0);
      MBTree full = sample_conditioned_gw(*kernel, n, 1, rng, true, &ex);
      count = 0;
      for (const auto& nd : full.nodes) count += nd.type == 1 ? 1 : 0;
      CHECK(count == n);
    }
  }
}

TEST_CASE("kesten bias of the binary law and normalization in general") {
  GWSpec spec = binary_spec();
  PerronData pd = perron_data(spec);
  KestenBias kb = kesten_bias(spec, pd);
  REQUIRE(kb.biased[0].size() == 1);  // the empty offspring has zero biased mass
  CHECK(kb.biased[0][0].z[0] == 2);
  CHECK(kb.biased[0][0].p == Catch::Approx(1.0));

  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    GWSpec sp = random_critical_spec(rng, 2);
    PerronData p2 = perron_data(sp);
    KestenBias k2 = kesten_bias(sp, p2);
    for (std::int32_t j = 0; j < sp.kappa; ++j) {
      double sum = 0;
      for (const auto& atom : k2.biased[j]) sum += atom.p;
      CHECK(std::abs(sum - 1.0) < 1e-12);
      double spine = 0;
      for (std::int32_t k = 0; k < sp.kappa; ++k) spine += k2.spine_type_law[j][k];
      CHECK(std::abs(spine - 1.0) < 1e-12);
    }
  }

  // alternating law: the spine alternates deterministically
  KestenBias alt = kesten_bias(alternating_spec(), perron_data(alternating_spec()));
  CHECK(alt.spine_type_law[0][1] == Catch::Approx(1.0));
  CHECK(alt.spine_type_law[1][0] == Catch::Approx(1.0));
}

TEST_CASE("offspring conditioned on avoiding type 1: worked example") {
  GWSpec spec = worked_two_type_spec();
  ExtinctData ex = extinct_conditioned_offspring(spec);
  CHECK(ex.p[1] == Catch::Approx(2.0 / 3).margin(1e-12));
  REQUIRE(ex.kept == std::vector<std::int32_t>{2});
  REQUIRE(ex.zeta_cross[1].size() == 2);
  double empty = 0, renew = 0;
  for (const auto& atom : ex.zeta_cross[1]) {
    std::int64_t tot = 0;
    for (std::int64_t c : atom.z) tot += c;
    (tot == 0 ? empty : renew) = atom.p;
  }
  CHECK(empty == Catch::Approx(0.75).margin(1e-12));
  CHECK(renew == Catch::Approx(0.25).margin(1e-12));

  SubcriticalityResult sub = subcriticality_check(ex);
  CHECK(sub.pass);
  CHECK(sub.spectral_radius == Catch::Approx(0.25).margin(1e-9));
}

TEST_CASE("types that always bear a type-1 child are excluded") {
  GWSpec spec;
  spec.kappa = 2;
  spec.offspring = {{{{0, 0}, 0.5}, {{1, 1}, 0.5}}, {{{1, 0}, 1.0}}};
  ExtinctData ex = extinct_conditioned_offspring(spec);
  CHECK(ex.p[1] == 0.0);
  CHECK(ex.kept.empty());
  CHECK(subcriticality_check(ex).pass);
}

TEST_CASE("a critical conditioned law fails the subcriticality check") {
  ExtinctData ex;
  ex.p = {0.0, 0.5};
  ex.kept = {2};
  ex.zeta_cross.resize(2);
  ex.zeta_cross[1] = {{{0, 1}, 1.0}};  // always one child of its own type
  SubcriticalityResult sub = subcriticality_check(ex);
  CHECK_FALSE(sub.pass);
  CHECK(sub.spectral_radius == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("conditioned laws normalize on random specs") {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    GWSpec spec = random_critical_spec(rng, 3);
    ExtinctData ex = extinct_conditioned_offspring(spec);
    for (std::int32_t t : ex.kept) {
      double sum = 0;
      for (const auto& atom : ex.zeta_cross[t - 1]) sum += atom.p;
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("heights of type-1-free trees have exponential tails") {
  GWSpec spec = worked_two_type_spec();
  ExtinctData ex = extinct_conditioned_offspring(spec);
  Rng rng(13);
  const int reps = 10000;
  std::vector<double> heights;
  for (int r = 0; r < reps; ++r) {
    MBTree t = sample_offspring_tree(ex.zeta_cross, 2, rng, 100000);
    heights.push_back(t.height());
  }
  std::sort(heights.begin(), heights.end());
  // slope of the log-survival between the 90% and 99% quantiles
  double h90 = heights[static_cast<std::size_t>(0.90 * reps)];
  double h99 = heights[static_cast<std::size_t>(0.99 * reps)];
  double lambda_hat = std::log(10.0) / std::max(1.0, h99 - h90);
  CHECK(lambda_hat > 0.1);
  // the maximum grows like log(reps), not polynomially
  CHECK(heights.back() <= 3.0 * std::log(static_cast<double>(reps)) / lambda_hat);
}

TEST_CASE("first generation of type 1 has mean b_z / b_1") {
  GWSpec spec = worked_two_type_spec();
  PerronData pd = perron_data(spec);
  Rng rng(14);
  for (const std::vector<std::int64_t>& z :
       {std::vector<std::int64_t>{0, 1}, std::vector<std::int64_t>{1, 1},
        std::vector<std::int64_t>{0, 3}}) {
    const int reps = 40000;
    std::vector<double> counts(reps);
    for (int r = 0; r < reps; ++r)
      counts[r] = static_cast<double>(first_generation_type1_count(spec, z, rng));
    MeanSE ms = mean_and_se(counts);
    double target = pd.b_of(z) / pd.b[0];
    CHECK(std::abs(ms.mean - target) < 3 * ms.se);
  }
}

TEST_CASE("mixing-regime hypotheses realized by the conditioned-tree kernel") {
  GWSpec spec = worked_two_type_spec();
  auto counts = count_tables(spec, 2100);
  auto kernel = gw_splitting_kernel(spec, counts);
  Rng rng(15);
  auto f_one = [](const MassPartition&) { return 1.0; };
  FunctionalEstimate a = split_functional_estimate(*kernel, 500, 1, f_one,
                                                   FunctionalMode::kMixing, 0.5, 20000, rng);
  FunctionalEstimate b = split_functional_estimate(*kernel, 2000, 1, f_one,
                                                   FunctionalMode::kMixing, 0.5, 20000, rng);
  // sqrt(n) E[1 - s1] stabilizes across n
  CHECK(std::abs(a.mean / b.mean - 1.0) < 0.15 + 3 * (a.se + b.se) / b.mean);
}
