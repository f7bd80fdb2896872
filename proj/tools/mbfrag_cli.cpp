// Command-line front end. Verbs group the experiment kinds:
//
//   mbfrag sim    --config <path> [--seed <u64>] [--out <path>] [--threads <k>]
//   mbfrag gw     ... (gw_limit, tagged_chain, type_mixing, kernel_convergence)
//   mbfrag growth ... (growth_scaling, ell_weights, urn_limit)
//   mbfrag frag   ... (marginal_compare)
//   mbfrag test   [--config <dir or list>] runs the whole acceptance battery
//
// Exit code 0 iff every criterion in the run passes. The MBFRAG_THREADS
// environment variable overrides the configured thread count; it never
// changes the results.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "mbfrag/config.hpp"
#include "mbfrag/experiments.hpp"
#include "mbfrag/report.hpp"

namespace {

int thread_override(int configured, int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("MBFRAG_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  return configured;
}

int run_one(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
            const std::string& out_path, const std::string& out_format, int threads_flag,
            const std::set<std::string>& allowed_kinds) {
  mbfrag::ExperimentConfig cfg = mbfrag::load_experiment_config(config_path);
  if (!allowed_kinds.empty() && !allowed_kinds.count(cfg.kind)) {
    std::fprintf(stderr, "config kind '%s' does not belong to this verb\n", cfg.kind.c_str());
    return 2;
  }
  if (has_seed) cfg.seed = seed_override;
  cfg.threads = thread_override(cfg.threads, threads_flag);
  mbfrag::Report rep = mbfrag::run_experiment(cfg);
  int failures = 0;
  for (const auto& row : rep.rows) {
    std::printf("%s  %-45s estimate=%-12.6g stat=%-12.6g threshold=%g\n",
                row.pass ? "PASS" : "FAIL", row.criterion_id.c_str(), row.estimate, row.stat,
                row.threshold);
    if (!row.pass) ++failures;
  }
  if (!out_path.empty()) {
    mbfrag::ReportFormat fmt =
        out_format == "json" ? mbfrag::ReportFormat::kJson : mbfrag::ReportFormat::kCsv;
    mbfrag::emit_report(rep, fmt, out_path);
  }
  return failures == 0 ? 0 : 1;
}

int run_battery(const std::string& config_arg, int threads_flag) {
  namespace fs = std::filesystem;
  fs::path list_path(config_arg);
  if (fs::is_directory(list_path)) list_path /= "acceptance.json";
  nlohmann::json list = mbfrag::detail::load_json_file(list_path.string());
  fs::path base = list_path.parent_path();
  int failures = 0;
  for (const auto& entry : list.at("configs")) {
    mbfrag::ExperimentConfig cfg =
        mbfrag::load_experiment_config((base / entry.get<std::string>()).string());
    cfg.threads = thread_override(cfg.threads, threads_flag);
    mbfrag::Report rep = mbfrag::run_experiment(cfg);
    for (const auto& row : rep.rows) {
      std::printf("%s  %-45s estimate=%-12.6g stat=%-12.6g threshold=%g\n",
                  row.pass ? "PASS" : "FAIL", row.criterion_id.c_str(), row.estimate, row.stat,
                  row.threshold);
      if (!row.pass) ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion check(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-branching tree simulation and certification toolkit"};
  app.require_subcommand(1);

  struct VerbArgs {
    std::string config;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string out;
    std::string format = "csv";
    int threads = 0;
  };

  std::map<std::string, std::set<std::string>> verb_kinds = {
      {"sim", {"tagged_chain", "height_moments", "prokhorov_props", "marginal_compare",
               "kernel_convergence"}},
      {"gw", {"gw_limit", "tagged_chain", "type_mixing", "kernel_convergence"}},
      {"growth", {"growth_scaling", "ell_weights", "urn_limit"}},
      {"frag", {"marginal_compare", "height_moments"}},
  };

  std::map<std::string, VerbArgs> args;
  for (const auto& [verb, kinds] : verb_kinds) {
    CLI::App* sub = app.add_subcommand(verb, "run one experiment config");
    VerbArgs& a = args[verb];
    sub->add_option("--config", a.config, "experiment config path")->required();
    sub->add_option("--seed", a.seed, "seed override")->each([&a](const std::string&) {
      a.has_seed = true;
    });
    sub->add_option("--out", a.out, "report output path");
    sub->add_option("--format", a.format, "report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", a.threads, "thread count override");
  }
  VerbArgs& test_args = args["test"];
  CLI::App* test_cmd = app.add_subcommand("test", "run the full acceptance battery");
  test_cmd->add_option("--config", test_args.config, "configs directory or list file");
  test_cmd->add_option("--threads", test_args.threads, "thread count override");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [verb, kinds] : verb_kinds)
      if (app.got_subcommand(verb)) {
        const VerbArgs& a = args[verb];
        return run_one(a.config, a.seed, a.has_seed, a.out, a.format, a.threads, kinds);
      }
    if (app.got_subcommand("test")) {
      std::string dir = test_args.config.empty() ? "configs" : test_args.config;
      return run_battery(dir, test_args.threads);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
