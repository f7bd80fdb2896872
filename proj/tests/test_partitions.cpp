#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mbfrag/partitions.hpp"
#include "mbfrag/prokhorov.hpp"
#include "mbfrag/rng.hpp"

using namespace mbfrag;

TEST_CASE("validate_partition checks ordering and sums") {
  // ((3,1),(2,2)) of 5: sums to 5, ordered
  CHECK(validate_partition(DiscreteTypedPartition{{{3, 1}, {2, 2}}, 5}));
  // size order violated
  CHECK_FALSE(validate_partition(DiscreteTypedPartition{{{2, 2}, {3, 1}}, 5}));
  // equal sizes require type nonincreasing
  CHECK_FALSE(validate_partition(DiscreteTypedPartition{{{2, 1}, {2, 2}}, 4}));
  CHECK(validate_partition(DiscreteTypedPartition{{{2, 2}, {2, 1}}, 4}));
  // empty partition is valid
  CHECK(validate_partition(DiscreteTypedPartition{{}, 3}));
  // zero parts only with allow_zero
  CHECK_FALSE(validate_partition(DiscreteTypedPartition{{{2, 1}, {0, 2}}, 2}));
  CHECK(validate_partition(DiscreteTypedPartition{{{2, 1}, {0, 2}}, 2, true}));
  // sum above n
  CHECK_FALSE(validate_partition(DiscreteTypedPartition{{{3, 1}, {2, 2}}, 4}));
}

TEST_CASE("rank_mass_partition sorts and breaks ties by type") {
  MassPartition a = rank_mass_partition({{0.2, 2}, {0.5, 1}});
  REQUIRE(a.atoms.size() == 2);
  CHECK(a.atoms[0].mass == 0.5);
  CHECK(a.atoms[0].type == 1);
  CHECK(a.atoms[1].mass == 0.2);
  CHECK(a.s0 == Catch::Approx(0.3));

  MassPartition b = rank_mass_partition({{0.3, 1}, {0.3, 2}});
  CHECK(b.atoms[0].type == 2);  // tie broken by larger type first
  CHECK(b.atoms[1].type == 1);

  MassPartition c = rank_mass_partition({});
  CHECK(c.atoms.empty());
  CHECK(c.s0 == 1.0);

  CHECK_THROWS(rank_mass_partition({{0.9, 1}, {0.2, 1}}));
}

TEST_CASE("rank_mass_partition is idempotent and preserves atoms") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<MassAtom> atoms;
    int k = 1 + static_cast<int>(rng.uniform_below(6));
    double left = 1.0;
    for (int i = 0; i < k; ++i) {
      double m = rng.uniform() * left * 0.5;
      left -= m;
      atoms.push_back({m, 1 + static_cast<std::int32_t>(rng.uniform_below(3))});
    }
    MassPartition once = rank_mass_partition(atoms);
    std::vector<MassAtom> again = once.atoms;
    MassPartition twice = rank_mass_partition(again);
    REQUIRE(once.atoms.size() == twice.atoms.size());
    for (std::size_t i = 0; i < once.atoms.size(); ++i) {
      CHECK(once.atoms[i].mass == twice.atoms[i].mass);
      CHECK(once.atoms[i].type == twice.atoms[i].type);
    }
    CHECK(validate_mass_partition(once, 3));
    // multiset preserved
    std::vector<std::pair<double, std::int32_t>> in, out;
    for (const auto& x : atoms)
      if (x.mass != 0) in.push_back({x.mass, x.type});
    for (const auto& x : once.atoms) out.push_back({x.mass, x.type});
    std::sort(in.begin(), in.end());
    std::sort(out.begin(), out.end());
    CHECK(in == out);
  }
}

TEST_CASE("paintbox on a single interval is one block") {
  Rng rng(1);
  MassPartition s = rank_mass_partition({{1.0, 2}});
  for (int t = 0; t < 20; ++t) {
    TypedSetPartition p = paintbox_sample(s, 5, rng);
    REQUIRE(p.blocks.size() == 1);
    CHECK(p.blocks[0].size() == 5);
    CHECK(p.types[0] == 2);
  }
}

TEST_CASE("paintbox pair probabilities match the exact binomial values") {
  Rng rng(42);
  MassPartition s = rank_mass_partition({{0.5, 2}, {0.5, 1}});
  int same = 0, first_type1 = 0;
  const int n = 100000;
  for (int t = 0; t < n; ++t) {
    TypedSetPartition p = paintbox_sample(s, 2, rng);
    if (p.blocks.size() == 1) ++same;
    if (p.types[0] == 1) ++first_type1;  // block containing index 1
  }
  // P(same block) = 1/2, P(block of 1 has type 1) = 1/2; 3-sigma bands
  double se = std::sqrt(0.25 / n);
  CHECK(std::abs(same / static_cast<double>(n) - 0.5) < 3 * se);
  CHECK(std::abs(first_type1 / static_cast<double>(n) - 0.5) < 3 * se);
}

TEST_CASE("paintbox interval frequencies within three standard errors") {
  Rng rng(11);
  MassPartition s = rank_mass_partition({{0.5, 3}, {0.3, 2}, {0.2, 1}});
  const int n = 100000;
  std::vector<int> hits(3, 0);
  for (int t = 0; t < n; ++t) {
    TypedSetPartition p = paintbox_sample(s, 1, rng);
    hits[p.types[0] - 1]++;
  }
  double probs[3] = {0.2, 0.3, 0.5};
  for (int j = 0; j < 3; ++j) {
    double se = std::sqrt(probs[j] * (1 - probs[j]) / n);
    CHECK(std::abs(hits[j] / static_cast<double>(n) - probs[j]) < 3 * se);
  }
}

TEST_CASE("prokhorov distance on hand-checked pairs") {
  AtomicMeasure a{{{0.0, 0.0}}, {1.0}};
  AtomicMeasure b{{{0.3, 0.0}}, {1.0}};
  CHECK(prokhorov_distance(a, a) == 0.0);
  CHECK(prokhorov_distance(a, b) == Catch::Approx(0.3).margin(1e-9));
  // far atom: the mass budget caps the distance at total mass 1
  AtomicMeasure c{{{1.0, 1.0}}, {1.0}};
  AtomicMeasure origin2{{{0.0, 0.0}}, {1.0}};
  double far = prokhorov_distance(origin2, c);
  CHECK(far == Catch::Approx(1.0).margin(1e-9));
  CHECK_THROWS(prokhorov_distance(a, AtomicMeasure{{{0.1, 0.1}}, {0.5}}));
}

namespace {
AtomicMeasure random_measure(Rng& rng, int atoms, int dim) {
  AtomicMeasure m;
  for (int i = 0; i < atoms; ++i) {
    std::vector<double> pt(dim);
    for (double& c : pt) c = rng.uniform();
    m.points.push_back(pt);
    m.masses.push_back(0.1 + rng.uniform());
  }
  double tot = m.total_mass();
  for (double& mass : m.masses) mass /= tot;
  return m;
}
}  // namespace

TEST_CASE("prokhorov metric axioms on random atomic measures") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    AtomicMeasure a = random_measure(rng, 2 + static_cast<int>(rng.uniform_below(7)), 2);
    AtomicMeasure b = random_measure(rng, 2 + static_cast<int>(rng.uniform_below(7)), 2);
    AtomicMeasure c = random_measure(rng, 2 + static_cast<int>(rng.uniform_below(7)), 2);
    double ab = prokhorov_distance(a, b);
    double ba = prokhorov_distance(b, a);
    double ac = prokhorov_distance(a, c);
    double cb = prokhorov_distance(c, b);
    CHECK(std::abs(ab - ba) < 1e-9);               // symmetry
    CHECK(prokhorov_distance(a, a) < 1e-9);        // identity
    CHECK(ab <= ac + cb + 2e-9);                   // triangle
  }
}

TEST_CASE("partition_distance basics") {
  MassPartition x = rank_mass_partition({{0.6, 1}, {0.4, 2}});
  CHECK(partition_distance(x, x, 2) < 1e-9);

  // two pure states of distinct types: Prokhorov(delta_e1, delta_e2)
  MassPartition p1 = rank_mass_partition({{1.0, 1}});
  MassPartition p2 = rank_mass_partition({{1.0, 2}});
  double d = partition_distance(p1, p2, 2);
  double oracle = prokhorov_distance(AtomicMeasure{{{1.0, 0.0}}, {1.0}},
                                     AtomicMeasure{{{0.0, 1.0}}, {1.0}});
  CHECK(d == Catch::Approx(oracle).margin(1e-9));
  CHECK(d == Catch::Approx(1.0).margin(1e-9));  // sqrt(2) capped by mass budget
}

TEST_CASE("partition_distance stays within the mass budget and triangle holds") {
  Rng rng(9);
  auto random_partition = [&](int kappa) {
    std::vector<MassAtom> atoms;
    double left = 1.0;
    int k = 1 + static_cast<int>(rng.uniform_below(4));
    for (int i = 0; i < k; ++i) {
      double m = rng.uniform() * left;
      left -= m;
      if (m > 0) atoms.push_back({m, 1 + static_cast<std::int32_t>(rng.uniform_below(kappa))});
    }
    return rank_mass_partition(atoms);
  };
  for (int trial = 0; trial < 100; ++trial) {
    MassPartition a = random_partition(2), b = random_partition(2), c = random_partition(2);
    double ab = partition_distance(a, b, 2);
    double ac = partition_distance(a, c, 2);
    double cb = partition_distance(c, b, 2);
    CHECK(ab <= 1.0 + 1e-9);
    CHECK(ab <= ac + cb + 2e-9);
  }
}

TEST_CASE("mass partition JSON round trip") {
  MassPartition s = rank_mass_partition({{1.0 / 3.0, 2}, {0.25, 1}});
  nlohmann::json j = to_json(s);
  MassPartition back = mass_partition_from_json(j);
  REQUIRE(back.atoms.size() == s.atoms.size());
  for (std::size_t i = 0; i < s.atoms.size(); ++i) {
    CHECK(back.atoms[i].mass == s.atoms[i].mass);  // full-precision doubles
    CHECK(back.atoms[i].type == s.atoms[i].type);
  }
}
