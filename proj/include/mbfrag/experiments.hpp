#pragma once

// Experiment dispatch: every statistical certification shipped with the
// toolkit is one configuration kind here. Replicates run in parallel on
// stream-derived generators and are aggregated in replicate order, so a
// (config, seed) pair produces identical reports for any thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mbfrag/config.hpp"
#include "mbfrag/frag.hpp"
#include "mbfrag/growth.hpp"
#include "mbfrag/gw.hpp"
#include "mbfrag/metrics.hpp"
#include "mbfrag/parallel.hpp"
#include "mbfrag/prokhorov.hpp"
#include "mbfrag/report.hpp"
#include "mbfrag/stats.hpp"
#include "mbfrag/testing/tree_census.hpp"

namespace mbfrag {

namespace experiments {

inline GWSpec model_gw(const ExperimentConfig& cfg, const std::string& key) {
  if (!cfg.models.contains(key))
    throw std::invalid_argument("config: missing model '" + key + "'");
  GWSpec spec = gw_spec_from_json(cfg.models.at(key));
  validate_gw_spec(spec);
  return spec;
}

inline DislocationSpec model_frag(const ExperimentConfig& cfg, const std::string& key) {
  if (!cfg.models.contains(key))
    throw std::invalid_argument("config: missing model '" + key + "'");
  return dislocation_spec_from_json(cfg.models.at(key));
}

inline BrickSet model_growth(const ExperimentConfig& cfg, const std::string& key) {
  if (!cfg.models.contains(key))
    throw std::invalid_argument("config: missing model '" + key + "'");
  return build_brick_set(growth_spec_from_json(cfg.models.at(key)));
}

// conditioned-tree kernel turned into a conservative kernel with unit deaths
inline KernelPtr gw_mb_pipeline(const GWSpec& spec, std::shared_ptr<const CountTable> counts) {
  KernelPtr k = gw_splitting_kernel(spec, counts);
  return death_coupling_kernel(conservation_kernel(zero_pruned_kernel(k)));
}

// --- criterion implementations -----------------------------------------------

// exact splitting kernel against the exhaustive rational tree census
inline Report run_kernel_convergence(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t n_max = cfg.params.value("n_max", 10);
  const double tol = cfg.params.value("tol", 1e-12);
  GWSpec spec = model_gw(cfg, "gw");
  auto counts = count_tables(spec, n_max + 2);
  auto kernel = gw_splitting_kernel(spec, counts);

  testing::RationalGWSpec rational;
  rational.kappa = spec.kappa;
  for (const auto& law : spec.offspring) {
    std::vector<testing::RationalAtom> atoms;
    for (const auto& a : law) atoms.push_back({a.z, testing::Rational(a.p)});
    rational.offspring.push_back(std::move(atoms));
  }
  testing::TreeCensus census(rational);

  double worst = 0;
  std::int64_t compared = 0;
  for (std::int32_t type = 1; type <= spec.kappa; ++type)
    for (std::int64_t n = 2; n <= n_max; ++n) {
      if (counts->tree_pmf(type, n) <= 0) continue;
      auto sup = kernel->support(n, type);
      auto exact = census.kernel_census(type, n);
      if (!sup || sup->size() != exact.size())
        throw std::runtime_error("kernel_convergence: support size mismatch");
      for (const auto& e : *sup) {
        auto it = exact.find(e.partition);
        if (it == exact.end())
          throw std::runtime_error("kernel_convergence: partition missing from census");
        worst = std::max(worst, std::abs(e.prob - static_cast<double>(it->second)));
        ++compared;
      }
    }
  rep.rows.push_back({cfg.criterion_id + ".kernel_vs_census", worst,
                      static_cast<double>(compared), tol, worst <= tol});
  return rep;
}

inline Report run_gw_limit(const ExperimentConfig& cfg) {
  Report rep;
  const std::string variant = cfg.params.value("variant", "otter_dwass");
  if (variant == "otter_dwass") {
    const std::int64_t p_max = cfg.params.value("p_max", 5);
    const std::int64_t n_max = cfg.params.value("n_max", 200);
    const double tol = cfg.params.value("tol", 1e-12);
    std::vector<std::string> keys;
    for (auto it = cfg.models.begin(); it != cfg.models.end(); ++it) keys.push_back(it.key());
    std::sort(keys.begin(), keys.end());
    for (const std::string& key : keys) {
      GWSpec spec = model_gw(cfg, key);
      auto counts = count_tables(spec, n_max + 5);
      double worst = 0;
      for (std::int64_t p = 1; p <= p_max; ++p)
        for (std::int64_t n = 1; n <= n_max; ++n) {
          OtterDwassValues v = otter_dwass_check(spec, *counts, p, n);
          worst = std::max(worst, std::abs(v.dp_value - v.cycle_lemma_value));
        }
      rep.rows.push_back({cfg.criterion_id + ".cycle_lemma." + key, worst, 0.0, tol,
                          worst <= tol});
    }
  } else if (variant == "local_limit") {
    const std::int64_t n = cfg.params.value("n", 2000);
    const std::int64_t z_max = cfg.params.value("z_max", 3);
    const double band = cfg.params.value("band", 0.05);
    GWSpec spec = model_gw(cfg, "gw");
    PerronData pd = perron_data(spec);
    auto counts = count_tables(spec, n + 10);
    double worst = 0;
    for (std::int64_t p = 1; p <= z_max; ++p) {
      std::vector<std::int64_t> z{p};
      double exact = counts->forest_pmf(z)[static_cast<std::size_t>(n)];
      double lead = asymptotic_count_estimate(pd, z, n);
      double ratio = exact / lead;
      rep.grid.push_back({"exact_over_leading", static_cast<double>(p), ratio, 0.0});
      worst = std::max(worst, std::abs(ratio - 1.0));
    }
    rep.rows.push_back({cfg.criterion_id + ".local_limit", worst, 0.0, band, worst <= band});
  } else if (variant == "crt_ratio") {
    const std::int64_t n_a = cfg.params.value("n_a", 2001);
    const std::int64_t n_b = cfg.params.value("n_b", 2000);
    const std::int64_t walks = cfg.params.value("walks", 2000);
    const double tol = cfg.params.value("tol", 0.07);
    GWSpec spec_a = model_gw(cfg, "gw_a");
    GWSpec spec_b = model_gw(cfg, "gw_b");
    PerronData pd_a = perron_data(spec_a);
    PerronData pd_b = perron_data(spec_b);
    auto counts_a = count_tables(spec_a, n_a + 5);
    auto counts_b = count_tables(spec_b, n_b + 5);
    auto kernel_a = gw_splitting_kernel(spec_a, counts_a);
    auto kernel_b = gw_splitting_kernel(spec_b, counts_b);
    std::vector<double> da = run_replicates_d(cfg.seed, walks, cfg.threads,
                                              [&](std::int64_t, Rng& rng) {
                                                return static_cast<double>(
                                                    sample_mu_tagged_walk(*kernel_a, n_a, 1, rng)
                                                        .depth);
                                              });
    std::vector<double> db = run_replicates_d(cfg.seed + 1, walks, cfg.threads,
                                              [&](std::int64_t, Rng& rng) {
                                                return static_cast<double>(
                                                    sample_mu_tagged_walk(*kernel_b, n_b, 1, rng)
                                                        .depth);
                                              });
    MeanSE ma = mean_and_se(da);
    MeanSE mb = mean_and_se(db);
    double ratio_hat = (ma.mean / std::sqrt(static_cast<double>(n_a))) /
                       (mb.mean / std::sqrt(static_cast<double>(n_b)));
    // depths scale like 2/(sigma sqrt(a1)); the A/B ratio of means inverts it
    double target = (std::sqrt(pd_b.sigma2) * std::sqrt(pd_b.a[0])) /
                    (std::sqrt(pd_a.sigma2) * std::sqrt(pd_a.a[0]));
    double se = ratio_hat * (ma.se / ma.mean + mb.se / mb.mean);
    rep.rows.push_back({cfg.criterion_id + ".crt_ratio", ratio_hat / target, se / target, tol,
                        std::abs(ratio_hat / target - 1.0) <= tol});
  } else {
    throw std::invalid_argument("gw_limit: unknown variant '" + variant + "'");
  }
  return rep;
}

inline Report run_tagged_chain(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t n = cfg.params.value("n", 15);
  const std::int64_t reps = cfg.params.value("replicates", 100000);
  const double p_min = cfg.params.value("pvalue_min", 0.01);
  GWSpec spec = model_gw(cfg, "gw");
  auto counts = count_tables(spec, n + 2);
  KernelPtr kernel = gw_mb_pipeline(spec, counts);
  auto row = tagged_transition_row(*kernel, n, 1);

  using Cell = std::pair<std::int64_t, std::int32_t>;
  std::vector<Cell> observed = run_replicates<Cell>(
      cfg.seed, reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        MBTree t = sample_mb_tree(*kernel, n, 1, rng, {1000000, true});
        std::int32_t v = t.node_of_label(1);
        while (t.nodes[v].depth > 1) v = t.nodes[v].parent;
        return Cell{t.nodes[v].size, t.nodes[v].type};
      });
  std::map<Cell, double> freq;
  for (const Cell& c : observed) freq[c] += 1.0;
  std::vector<double> obs, probs;
  for (const auto& [cell, p] : row) {
    probs.push_back(p);
    obs.push_back(freq.count(cell) ? freq[cell] : 0.0);
  }
  Chi2Result c = chi2_gof(obs, probs, static_cast<double>(reps));
  rep.rows.push_back(
      {cfg.criterion_id + ".one_step_chi2", c.pvalue, c.statistic, p_min, c.pvalue > p_min});
  return rep;
}

inline Report run_type_mixing(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t n = cfg.params.value("n", 2000);
  const std::int64_t walks = cfg.params.value("walks", 1000);
  const double tol = cfg.params.value("tol", 0.02);
  GWSpec spec = model_gw(cfg, "gw");
  PerronData pd = perron_data(spec);
  auto counts = count_tables(spec, n + 5);
  auto kernel = gw_splitting_kernel(spec, counts);

  struct Tally {
    std::vector<double> counts;
    double length = 0;
  };
  std::vector<Tally> tallies = run_replicates<Tally>(
      cfg.seed, walks, cfg.threads, [&](std::int64_t, Rng& rng) {
        MuTaggedWalk walk = sample_mu_tagged_walk(*kernel, n, 1, rng);
        Tally t;
        t.counts.assign(spec.kappa, 0.0);
        for (std::int32_t type : walk.type_path) t.counts[type - 1] += 1.0;
        t.length = static_cast<double>(walk.type_path.size());
        return t;
      });
  std::vector<double> total(spec.kappa, 0.0);
  double length = 0;
  for (const Tally& t : tallies) {
    for (std::int32_t j = 0; j < spec.kappa; ++j) total[j] += t.counts[j];
    length += t.length;
  }
  for (std::int32_t j = 0; j < spec.kappa; ++j) {
    double freq = total[j] / length;
    rep.rows.push_back({cfg.criterion_id + ".type" + std::to_string(j + 1) + "_frequency",
                        freq, std::abs(freq - pd.chi[j]), tol,
                        std::abs(freq - pd.chi[j]) <= tol});
    rep.grid.push_back({"chi", static_cast<double>(j + 1), pd.chi[j], 0.0});
  }
  return rep;
}

inline Report run_urn_limit(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t polya_reps = cfg.params.value("polya_replicates", 10000);
  const std::int64_t polya_steps = cfg.params.value("polya_steps", 10000);
  const double ks_tol = cfg.params.value("ks_tol", 0.02);
  std::vector<double> first = run_replicates_d(
      cfg.seed, polya_reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        return urn_limit_sample({1.0, 1.0}, constant_increment(1.0), polya_steps, rng)[0];
      });
  double ks = ks_statistic_one_sample(first, [](double x) { return std::clamp(x, 0.0, 1.0); });
  rep.rows.push_back({cfg.criterion_id + ".polya_uniform_ks", ks, 0.0, ks_tol, ks <= ks_tol});

  const std::int64_t rand_reps = cfg.params.value("random_replicates", 1000);
  const std::int64_t rand_steps = cfg.params.value("random_steps", 10000);
  std::vector<double> weights = cfg.params.value("weights", std::vector<double>{1.0, 2.0, 4.0});
  BrickSet bs = model_growth(cfg, "growth");
  IncrementLaw law = growth_increment_law(bs);
  std::vector<double> violations = run_replicates_d(
      cfg.seed + 1, rand_reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        std::vector<double> w = urn_limit_sample(weights, law, rand_steps, rng);
        for (double x : w)
          if (!(x > 0)) return 1.0;
        for (std::size_t i = 0; i < w.size(); ++i)
          for (std::size_t j = i + 1; j < w.size(); ++j)
            if (w[i] == w[j]) return 1.0;
        return 0.0;
      });
  double bad = pairwise_sum(violations);
  rep.rows.push_back(
      {cfg.criterion_id + ".random_increment_distinct", bad, 0.0, 0.5, bad == 0.0});
  return rep;
}

inline Report run_ell_weights(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t n = cfg.params.value("n", 10000);
  const std::int64_t reps = cfg.params.value("replicates", 100000);
  const double tol = cfg.params.value("tol", 0.10);
  const std::int64_t k_max = cfg.params.value("k_max", 3);
  BrickSet bs = model_growth(cfg, "growth");
  std::vector<double> ell = ell_weights_closed_form(bs, 1, k_max);

  std::vector<double> js = run_replicates_d(cfg.seed, reps, cfg.threads,
                                            [&](std::int64_t, Rng& rng) {
                                              return static_cast<double>(
                                                  sample_root_glue_index(bs, 1, n, rng));
                                            });
  std::vector<double> counts(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (double j : js)
    if (j >= 1 && j <= static_cast<double>(k_max)) counts[static_cast<std::size_t>(j)] += 1.0;
  const double scale = std::pow(static_cast<double>(n), bs.gamma());
  for (std::int64_t k = 1; k <= k_max; ++k) {
    double hat = scale * counts[static_cast<std::size_t>(k)] / static_cast<double>(reps);
    double target = ell[static_cast<std::size_t>(k)];
    double se = scale * std::sqrt(counts[static_cast<std::size_t>(k)]) / static_cast<double>(reps);
    rep.rows.push_back({cfg.criterion_id + ".ell" + std::to_string(k), hat / target,
                        se / target, tol, std::abs(hat / target - 1.0) <= tol});
    rep.grid.push_back({"ell_empirical", static_cast<double>(k), hat, se});
    rep.grid.push_back({"ell_closed_form", static_cast<double>(k), target, 0.0});
  }
  return rep;
}

inline Report run_growth_scaling(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t n = cfg.params.value("n", 10000);
  const std::int64_t reps = cfg.params.value("replicates", 30000);
  const std::int64_t k_trunc = cfg.params.value("k_trunc", 50);
  const double tol = cfg.params.value("tol", 0.10);
  const std::int64_t urn_steps = cfg.params.value("urn_steps", 20000);
  const std::int64_t urn_reps = cfg.params.value("urn_replicates", 500);
  BrickSet bs = model_growth(cfg, "growth");
  const double gamma = bs.gamma();
  GrowthKernel kernel(bs);

  // empirical side: n^gamma E[1 - s1 1{i1 = 1}] under the reduced-tree kernel
  std::vector<double> values = run_replicates_d(
      cfg.seed, reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        DiscreteTypedPartition lam = kernel.sample(n, 1, rng);
        MassPartition s = mass_partition_from_discrete(lam);
        return 1.0 - (s.i1() == 1 ? s.s1() : 0.0);
      });
  MeanSE ms = mean_and_se(values);
  const double scale = std::pow(static_cast<double>(n), gamma);
  double lhs = scale * ms.mean;
  double lhs_se = scale * ms.se;

  // limit side: truncated sum of ell_k times the component split mass
  std::vector<double> ell = ell_weights_closed_form(bs, 1, k_trunc);
  std::vector<double> comp = run_replicates_d(
      cfg.seed + 1, k_trunc * urn_reps, cfg.threads, [&](std::int64_t r, Rng& rng) {
        std::int64_t k = 1 + r / urn_reps;
        GrowthComponent c = growth_dislocation_component(bs, 1, k, rng, urn_steps);
        double mx = 0;
        for (double f : c.fractions) mx = std::max(mx, f);
        return 1.0 - mx;
      });
  double rhs = 0;
  for (std::int64_t k = 1; k <= k_trunc; ++k) {
    double mean_k = 0;
    for (std::int64_t r = 0; r < urn_reps; ++r)
      mean_k += comp[static_cast<std::size_t>((k - 1) * urn_reps + r)];
    mean_k /= static_cast<double>(urn_reps);
    rhs += ell[static_cast<std::size_t>(k)] * mean_k;
    rep.grid.push_back({"component_split_mass", static_cast<double>(k), mean_k, 0.0});
  }
  double ratio = lhs / rhs;
  rep.rows.push_back({cfg.criterion_id + ".kernel_vs_truncated_limit", ratio, lhs_se / rhs,
                      tol, std::abs(ratio - 1.0) <= tol});
  rep.grid.push_back({"lhs", static_cast<double>(n), lhs, lhs_se});
  rep.grid.push_back({"rhs_truncated", static_cast<double>(k_trunc), rhs, 0.0});
  return rep;
}

inline Report run_marginal_compare(const ExperimentConfig& cfg) {
  Report rep;
  const std::int64_t n = cfg.params.value("n", 2000);
  const std::int64_t reps = cfg.params.value("replicates", 10000);
  const double ks_tol = cfg.params.value("ks_tol", 0.05);
  DislocationSpec d = model_frag(cfg, "frag");
  DislocationMBKernel kernel(d);
  const double scale = std::pow(static_cast<double>(n), d.gamma);

  std::vector<double> d1_disc = run_replicates_d(
      cfg.seed, reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        return static_cast<double>(sample_tagged_chain(kernel, n, 1, rng).absorption_step) /
               scale;
      });
  std::vector<double> d1_cont = run_replicates_d(
      cfg.seed + 1, reps, cfg.threads,
      [&](std::int64_t, Rng& rng) { return simulate_absorption_time(d, 1, rng).time; });
  double ks1 = ks_statistic_two_sample(d1_disc, d1_cont);
  rep.rows.push_back({cfg.criterion_id + ".death_time_ks", ks1, 0.0, ks_tol, ks1 <= ks_tol});

  std::vector<double> d2_disc = run_replicates_d(
      cfg.seed + 2, reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        return static_cast<double>(sample_pair_split_time(kernel, n, 1, rng)) / scale;
      });
  std::vector<double> d2_cont = run_replicates_d(
      cfg.seed + 3, reps, cfg.threads, [&](std::int64_t, Rng& rng) {
        MarginalTree t = simulate_marginal_tree(d, 1, 2, rng);
        return split_height(t, {1, 2});
      });
  double ks2 = ks_statistic_two_sample(d2_disc, d2_cont);
  rep.rows.push_back({cfg.criterion_id + ".pair_split_ks", ks2, 0.0, ks_tol, ks2 <= ks_tol});
  return rep;
}

inline Report run_height_moments(const ExperimentConfig& cfg) {
  Report rep;
  std::vector<std::int64_t> sizes =
      cfg.params.value("sizes", std::vector<std::int64_t>{128, 256, 512, 1024, 2048, 4096, 8192});
  const std::int64_t reps = cfg.params.value("replicates", 1000);
  const double factor = cfg.params.value("factor", 1.5);
  std::int64_t n_top = 0;
  for (std::int64_t n : sizes) n_top = std::max(n_top, n);

  auto finish = [&](const std::string& name, const std::vector<double>& ratios) {
    double lo = ratios[0], hi = ratios[0];
    for (double r : ratios) {
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    rep.rows.push_back(
        {cfg.criterion_id + "." + name + "_height_factor", hi / lo, 0.0, factor, hi / lo < factor});
  };
  auto run_kernel = [&](const SplittingKernel& kernel, double gamma, const std::string& name,
                        std::uint64_t seed, std::int64_t kernel_reps) {
    std::vector<double> ratios;
    for (std::int64_t n : sizes) {
      std::vector<double> h = run_replicates_d(
          seed + static_cast<std::uint64_t>(n), kernel_reps, cfg.threads,
          [&](std::int64_t, Rng& rng) {
            return static_cast<double>(sample_mb_tree(kernel, n, 1, rng).height());
          });
      MeanSE ms = mean_and_se(h);
      double ratio = ms.mean / std::pow(static_cast<double>(n), gamma);
      ratios.push_back(ratio);
      rep.grid.push_back({name, static_cast<double>(n), ratio,
                          ms.se / std::pow(static_cast<double>(n), gamma)});
    }
    finish(name, ratios);
  };

  // critical regime: typed finite dislocation measure through the bridge kernel
  DislocationSpec critical = model_frag(cfg, "frag");
  DislocationMBKernel crit_kernel(critical);
  run_kernel(crit_kernel, critical.gamma, "critical", cfg.seed, reps);

  // mixing regime with a type that only renames (null split measure)
  const auto& mix = cfg.params.at("mixing");
  double gamma = mix.value("gamma", 0.5);
  double beta = mix.value("beta", 0.0);
  std::vector<std::vector<MixingRegimeKernel::SplitAtom>> splits;
  for (const auto& type_splits : mix.at("splits")) {
    std::vector<MixingRegimeKernel::SplitAtom> list;
    for (const auto& atom : type_splits)
      list.push_back({atom.at("w").get<double>(), atom.at("fractions").get<std::vector<double>>()});
    splits.push_back(std::move(list));
  }
  std::vector<std::vector<double>> renames;
  for (const auto& row : mix.at("renames")) renames.push_back(row.get<std::vector<double>>());
  MixingRegimeKernel mix_kernel(static_cast<std::int32_t>(splits.size()), gamma, beta,
                                std::move(splits), std::move(renames));
  run_kernel(mix_kernel, gamma, "mixing", cfg.seed + 1000, reps);

  // conditioned two-type trees (mixing regime with beta = 0)
  if (cfg.models.contains("gw")) {
    const std::int64_t gw_reps = cfg.params.value("gw_replicates", reps);
    GWSpec spec = model_gw(cfg, "gw");
    auto counts = count_tables(spec, n_top + 5, n_top + 5);
    KernelPtr kernel = gw_mb_pipeline(spec, counts);
    run_kernel(*kernel, 0.5, "gw", cfg.seed + 2000, gw_reps);
  }

  // reduced growth trees (critical or solo regime)
  if (cfg.models.contains("growth")) {
    BrickSet bs = model_growth(cfg, "growth");
    std::vector<double> ratios;
    for (std::int64_t n : sizes) {
      std::vector<double> h = run_replicates_d(
          cfg.seed + 3000 + static_cast<std::uint64_t>(n), reps, cfg.threads,
          [&](std::int64_t, Rng& rng) {
            GrowthState st = grow(bs, 1, n, rng);
            return static_cast<double>(reduce_growth_tree(bs, st).height());
          });
      MeanSE ms = mean_and_se(h);
      double ratio = ms.mean / std::pow(static_cast<double>(n), bs.gamma());
      ratios.push_back(ratio);
      rep.grid.push_back({"growth", static_cast<double>(n), ratio,
                          ms.se / std::pow(static_cast<double>(n), bs.gamma())});
    }
    finish("growth", ratios);
  }
  return rep;
}

inline Report run_prokhorov_props(const ExperimentConfig& cfg) {
  Report rep;
  Rng rng(cfg.seed);

  // metric axioms on random atomic measures with at most 8 atoms
  {
    auto random_measure = [&](int atoms) {
      AtomicMeasure m;
      for (int i = 0; i < atoms; ++i) {
        m.points.push_back({rng.uniform(), rng.uniform()});
        m.masses.push_back(0.1 + rng.uniform());
      }
      double tot = m.total_mass();
      for (double& mass : m.masses) mass /= tot;
      return m;
    };
    double worst = 0;
    const int trials = cfg.params.value("prokhorov_trials", 30);
    for (int t = 0; t < trials; ++t) {
      AtomicMeasure a = random_measure(2 + static_cast<int>(rng.uniform_below(7)));
      AtomicMeasure b = random_measure(2 + static_cast<int>(rng.uniform_below(7)));
      AtomicMeasure c = random_measure(2 + static_cast<int>(rng.uniform_below(7)));
      double ab = prokhorov_distance(a, b);
      worst = std::max(worst, std::abs(ab - prokhorov_distance(b, a)));
      worst = std::max(worst, prokhorov_distance(a, a));
      worst = std::max(worst, ab - (prokhorov_distance(a, c) + prokhorov_distance(c, b)));
    }
    rep.rows.push_back(
        {cfg.criterion_id + ".prokhorov_axioms", worst, 0.0, 1e-9, worst <= 1e-9});
  }

  // rank idempotence
  {
    bool ok = true;
    for (int t = 0; t < 1000; ++t) {
      std::vector<MassAtom> atoms;
      double left = 1.0;
      int k = 1 + static_cast<int>(rng.uniform_below(6));
      for (int i = 0; i < k; ++i) {
        double m = rng.uniform() * left * 0.6;
        left -= m;
        atoms.push_back({m, 1 + static_cast<std::int32_t>(rng.uniform_below(3))});
      }
      MassPartition once = rank_mass_partition(atoms);
      MassPartition twice = rank_mass_partition(once.atoms);
      ok = ok && once.atoms.size() == twice.atoms.size();
      for (std::size_t i = 0; ok && i < once.atoms.size(); ++i)
        ok = once.atoms[i].mass == twice.atoms[i].mass &&
             once.atoms[i].type == twice.atoms[i].type;
    }
    rep.rows.push_back({cfg.criterion_id + ".rank_idempotent", ok ? 0.0 : 1.0, 0.0, 0.5, ok});
  }

  // four-point condition on continuum marginals
  {
    DislocationSpec d;
    d.kappa = 1;
    d.gamma = 0.5;
    d.atoms = {{{1.0, rank_mass_partition({{0.5, 1}, {0.5, 1}})},
                {0.5, rank_mass_partition({{0.7, 1}, {0.3, 1}})}}};
    validate_dislocation_spec(d);
    double worst = 0;
    for (int t = 0; t < 300; ++t) {
      MarginalTree m = simulate_marginal_tree(d, 1, 4, rng);
      worst = std::max(worst, four_point_violation(distance_matrix(m, {1, 2, 3, 4})));
    }
    rep.rows.push_back({cfg.criterion_id + ".four_point", worst, 0.0, 1e-9, worst <= 1e-9});
  }

  // size-biased offspring laws normalize; spine law normalizes
  {
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
      GWSpec spec;
      spec.kappa = 2;
      // random critical spec: mix random atoms with the empty offspring
      GWSpec base;
      base.kappa = 2;
      for (std::int32_t i = 1; i <= 2; ++i) {
        std::vector<OffspringAtom> atoms;
        std::vector<std::int64_t> cyc(2, 0);
        cyc[i % 2] = 1;
        atoms.push_back({cyc, 0.4});
        std::vector<std::int64_t> z(2, 0);
        int children = 2 + static_cast<int>(rng.uniform_below(2));  // keeps the law non-singular
        for (int c = 0; c < children; ++c) z[rng.uniform_below(2)]++;
        atoms.push_back({z, 0.6});
        base.offspring.push_back(std::move(atoms));
      }
      double rho = detail::power_iteration(detail::mean_matrix(base)).value;
      double x = 1.0 / rho;
      spec.offspring.resize(2);
      for (std::int32_t i = 0; i < 2; ++i) {
        spec.offspring[i].push_back({{0, 0}, 1.0 - x});
        for (const auto& at : base.offspring[i]) spec.offspring[i].push_back({at.z, x * at.p});
      }
      PerronData pd = perron_data(spec);
      KestenBias kb = kesten_bias(spec, pd);
      for (std::int32_t j = 0; j < 2; ++j) {
        double sum = 0;
        for (const auto& atom : kb.biased[j]) sum += atom.p;
        worst = std::max(worst, std::abs(sum - 1.0));
      }
    }
    rep.rows.push_back(
        {cfg.criterion_id + ".kesten_normalization", worst, 0.0, 1e-12, worst <= 1e-12});
  }

  // conditioned offspring laws on the worked two-type model
  {
    GWSpec spec;
    spec.kappa = 2;
    spec.offspring = {{{{0, 0}, 1.0 / 12}, {{2, 0}, 5.0 / 12}, {{0, 1}, 0.5}},
                      {{{0, 0}, 0.5}, {{1, 0}, 0.25}, {{0, 1}, 0.25}}};
    ExtinctData ex = extinct_conditioned_offspring(spec);
    double norm_err = 0;
    for (std::int32_t t : ex.kept) {
      double sum = 0;
      for (const auto& atom : ex.zeta_cross[t - 1]) sum += atom.p;
      norm_err = std::max(norm_err, std::abs(sum - 1.0));
    }
    SubcriticalityResult sub = subcriticality_check(ex);
    bool ok = norm_err <= 1e-12 && sub.pass && std::abs(sub.spectral_radius - 0.25) <= 1e-9;
    rep.rows.push_back({cfg.criterion_id + ".conditioned_offspring", sub.spectral_radius,
                        norm_err, 0.25, ok});
  }

  // Markov-additive parameter identity at q in {0, 1, 2}
  {
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
      DislocationSpec d;
      d.kappa = 2;
      d.gamma = 0.5;
      d.atoms.resize(2);
      for (std::int32_t i = 1; i <= 2; ++i) {
        int n_atoms = 1 + static_cast<int>(rng.uniform_below(3));
        for (int a = 0; a < n_atoms; ++a) {
          int parts = 2 + static_cast<int>(rng.uniform_below(3));
          std::vector<double> cuts{0.0, 1.0};
          for (int c = 0; c < parts - 1; ++c) cuts.push_back(rng.uniform());
          std::sort(cuts.begin(), cuts.end());
          std::vector<MassAtom> atoms;
          for (int c = 0; c < parts; ++c)
            atoms.push_back(
                {cuts[c + 1] - cuts[c], 1 + static_cast<std::int32_t>(rng.uniform_below(2))});
          d.atoms[i - 1].push_back({0.2 + rng.uniform(), rank_mass_partition(atoms)});
        }
      }
      validate_dislocation_spec(d);
      MAPParams mp = map_params(d);
      for (std::int32_t i = 1; i <= 2; ++i)
        for (std::int32_t j = 1; j <= 2; ++j)
          for (double q : {0.0, 1.0, 2.0})
            worst = std::max(
                worst, std::abs(map_laplace_lhs(mp, i, j, q) - map_laplace_rhs(d, i, j, q)));
    }
    rep.rows.push_back(
        {cfg.criterion_id + ".map_laplace_identity", worst, 0.0, 1e-12, worst <= 1e-12});
  }

  return rep;
}

}  // namespace experiments

inline Report run_experiment(const ExperimentConfig& cfg) {
  Report rep;
  if (cfg.kind == "kernel_convergence")
    rep = experiments::run_kernel_convergence(cfg);
  else if (cfg.kind == "gw_limit")
    rep = experiments::run_gw_limit(cfg);
  else if (cfg.kind == "tagged_chain")
    rep = experiments::run_tagged_chain(cfg);
  else if (cfg.kind == "type_mixing")
    rep = experiments::run_type_mixing(cfg);
  else if (cfg.kind == "urn_limit")
    rep = experiments::run_urn_limit(cfg);
  else if (cfg.kind == "ell_weights")
    rep = experiments::run_ell_weights(cfg);
  else if (cfg.kind == "growth_scaling")
    rep = experiments::run_growth_scaling(cfg);
  else if (cfg.kind == "marginal_compare")
    rep = experiments::run_marginal_compare(cfg);
  else if (cfg.kind == "height_moments")
    rep = experiments::run_height_moments(cfg);
  else if (cfg.kind == "prokhorov_props")
    rep = experiments::run_prokhorov_props(cfg);
  else
    throw std::invalid_argument("run_experiment: unknown kind '" + cfg.kind + "'");
  rep.kind = cfg.kind;
  rep.seed = cfg.seed;
  return rep;
}

}  // namespace mbfrag
