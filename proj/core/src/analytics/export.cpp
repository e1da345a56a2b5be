#include "gridt/analytics/export.hpp"

#include <stdexcept>
#include <string>

namespace gridt::analytics {

CsvTable to_csv(const InfluenceTable& table) {
  CsvTable csv;
  csv.header = {"k", "expected_influence_nats", "p_empty_limit", "admissible"};
  for (const auto& row : table.rows) {
    csv.rows.push_back({std::to_string(row.k), format_double(row.expected_influence),
                        format_double(row.p_empty_limit), row.admissible ? "true" : "false"});
  }
  return csv;
}

InfluenceTable influence_table_from_csv(const CsvTable& csv, double p_empty_cap) {
  InfluenceTable table;
  table.p_empty_cap = p_empty_cap;
  const auto ck = csv.column("k");
  const auto ci = csv.column("expected_influence_nats");
  const auto cp = csv.column("p_empty_limit");
  const auto ca = csv.column("admissible");
  for (const auto& r : csv.rows) {
    InfluenceRow row;
    row.k = std::stoi(r[ck]);
    row.expected_influence = parse_double(r[ci]);
    row.p_empty_limit = parse_double(r[cp]);
    if (r[ca] != "true" && r[ca] != "false") throw std::invalid_argument("bad admissible cell");
    row.admissible = r[ca] == "true";
    table.rows.push_back(row);
  }
  const InfluenceRow* best = nullptr;
  for (const auto& row : table.rows) {
    if (row.admissible && (!best || row.expected_influence > best->expected_influence)) best = &row;
  }
  if (best) table.optimal_k = best->k;
  return table;
}

nlohmann::json to_json(const InfluenceTable& table) {
  auto rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    rows.push_back({{"k", row.k},
                    {"expected_influence_nats", row.expected_influence},
                    {"p_empty_limit", row.p_empty_limit},
                    {"admissible", row.admissible}});
  }
  nlohmann::json j = {{"p_empty_cap", table.p_empty_cap}, {"rows", rows}, {"optimal_k", nullptr}};
  if (table.optimal_k) j["optimal_k"] = *table.optimal_k;
  return j;
}

CsvTable to_csv(const OutdegreeHistogram& hist) {
  CsvTable csv;
  csv.header = {"k_out", "count", "fraction"};
  const double nodes = static_cast<double>(hist.total_nodes());
  for (const auto& [deg, count] : hist.counts) {
    csv.rows.push_back({std::to_string(deg), std::to_string(count),
                        format_double(static_cast<double>(count) / nodes)});
  }
  return csv;
}

nlohmann::json to_json(const OutdegreeHistogram& hist) {
  auto counts = nlohmann::json::array();
  for (const auto& [deg, count] : hist.counts) counts.push_back({{"k_out", deg}, {"count", count}});
  return {{"n", hist.n},
          {"k", hist.k},
          {"samples", hist.samples},
          {"seed", hist.seed},
          {"mean_outdegree", hist.mean_outdegree()},
          {"zero_fraction", hist.zero_fraction()},
          {"zero_fraction_standard_error", hist.zero_fraction_standard_error()},
          {"counts", counts}};
}

}  // namespace gridt::analytics
