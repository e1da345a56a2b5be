#pragma once

#include <nlohmann/json.hpp>

#include "gridt/analytics/influence.hpp"
#include "gridt/analytics/outdegree.hpp"
#include "gridt/csv.hpp"

namespace gridt::analytics {

// Column names: k, expected_influence_nats, p_empty_limit, admissible
CsvTable to_csv(const InfluenceTable& table);
InfluenceTable influence_table_from_csv(const CsvTable& csv, double p_empty_cap);
nlohmann::json to_json(const InfluenceTable& table);

// Column names: k_out, count, fraction
CsvTable to_csv(const OutdegreeHistogram& hist);
nlohmann::json to_json(const OutdegreeHistogram& hist);

}  // namespace gridt::analytics
