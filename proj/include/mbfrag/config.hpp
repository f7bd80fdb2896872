#pragma once

// Experiment configuration: JSON files with a kind, a seed, thread count,
// kind-specific parameters and model references (inline JSON or paths
// resolved relative to the config file). Parse errors name the offending
// field.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace mbfrag {

struct ExperimentConfig {
  std::string kind;
  std::string criterion_id;
  std::uint64_t seed = 1;
  int threads = 4;
  nlohmann::json params;  // kind-specific: n grid, replicates, gamma, beta, tolerances
  nlohmann::json models;  // kind-specific model definitions (already resolved)
  std::string source_path;
};

namespace detail {
inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config: parse error in " + path + ": " + e.what());
  }
  return j;
}

// model entries that are strings are treated as file references
inline nlohmann::json resolve_models(const nlohmann::json& models,
                                     const std::filesystem::path& base) {
  nlohmann::json out = nlohmann::json::object();
  for (auto it = models.begin(); it != models.end(); ++it) {
    if (it.value().is_string()) {
      std::filesystem::path p = base / it.value().get<std::string>();
      out[it.key()] = load_json_file(p.string());
    } else {
      out[it.key()] = it.value();
    }
  }
  return out;
}
}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j,
                                                const std::string& source_path = "") {
  ExperimentConfig cfg;
  cfg.source_path = source_path;
  auto require = [&](const char* field) {
    if (!j.contains(field))
      throw std::invalid_argument("config" + (source_path.empty() ? "" : " " + source_path) +
                                  ": missing field '" + field + "'");
  };
  require("kind");
  cfg.kind = j.at("kind").get<std::string>();
  static const char* kinds[] = {"tagged_chain",  "gw_limit",       "type_mixing",
                                "growth_scaling", "ell_weights",    "urn_limit",
                                "marginal_compare", "kernel_convergence", "prokhorov_props",
                                "height_moments"};
  bool known = false;
  for (const char* k : kinds) known = known || cfg.kind == k;
  if (!known)
    throw std::invalid_argument("config: unknown kind '" + cfg.kind + "'");
  cfg.criterion_id = j.value("criterion_id", cfg.kind);
  require("seed");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.threads = j.value("threads", 4);
  if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  cfg.params = j.value("params", nlohmann::json::object());
  std::filesystem::path base =
      source_path.empty() ? std::filesystem::path(".")
                          : std::filesystem::path(source_path).parent_path();
  cfg.models = detail::resolve_models(j.value("models", nlohmann::json::object()), base);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(detail::load_json_file(path), path);
}

}  // namespace mbfrag
