#pragma once

// Experiment reports: one row per checked criterion with the estimate, the
// test statistic or standard error, the threshold and the pass flag, plus
// long-format (series, n, value) rows for grid experiments. Emission is
// byte-deterministic given the rows.

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mbfrag {

struct ReportRow {
  std::string criterion_id;
  double estimate = 0;
  double stat = 0;  // standard error or test statistic, per criterion
  double threshold = 0;
  bool pass = false;
};

struct GridRow {
  std::string series;
  double n = 0;
  double value = 0;
  double stat = 0;
};

struct Report {
  std::string kind;
  std::uint64_t seed = 0;
  std::vector<ReportRow> rows;
  std::vector<GridRow> grid;

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

namespace detail {
inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}
}  // namespace detail

inline void emit_report_csv(const Report& r, std::ostream& os) {
  os << "criterion_id,estimate,stderr_or_stat,threshold,pass\n";
  for (const auto& row : r.rows)
    os << row.criterion_id << ',' << detail::fmt_double(row.estimate) << ','
       << detail::fmt_double(row.stat) << ',' << detail::fmt_double(row.threshold) << ','
       << (row.pass ? "true" : "false") << '\n';
  if (!r.grid.empty()) {
    os << "\nseries,n,value,stderr_or_stat\n";
    for (const auto& g : r.grid)
      os << g.series << ',' << detail::fmt_double(g.n) << ',' << detail::fmt_double(g.value)
         << ',' << detail::fmt_double(g.stat) << '\n';
  }
}

inline nlohmann::json report_to_json(const Report& r) {
  nlohmann::json j;
  j["kind"] = r.kind;
  j["seed"] = r.seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows)
    j["rows"].push_back({{"criterion_id", row.criterion_id},
                         {"estimate", row.estimate},
                         {"stderr_or_stat", row.stat},
                         {"threshold", row.threshold},
                         {"pass", row.pass}});
  j["grid"] = nlohmann::json::array();
  for (const auto& g : r.grid)
    j["grid"].push_back(
        {{"series", g.series}, {"n", g.n}, {"value", g.value}, {"stderr_or_stat", g.stat}});
  return j;
}

enum class ReportFormat { kCsv, kJson };

inline void emit_report(const Report& r, ReportFormat format, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("emit_report: cannot open " + path);
  if (format == ReportFormat::kCsv)
    emit_report_csv(r, os);
  else
    os << report_to_json(r).dump(2) << '\n';
  if (!os) throw std::runtime_error("emit_report: write failed for " + path);
}

}  // namespace mbfrag
