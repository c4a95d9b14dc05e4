#pragma once

#include <span>
#include <string>

#include "json.hpp"

#include "pisa/pipeline/system.hpp"
#include "pisa/perf/account.hpp"
#include "pisa/variation/monte_carlo.hpp"

namespace pisa {

/// Field names are part of the public interface; see docs/report_schema.md.
nlohmann::json to_json(const TraceReport& r);
nlohmann::json to_json(const Trace& t);
nlohmann::json to_json(const LayerTally& t);
nlohmann::json to_json(const ComparisonSummary& s);
nlohmann::json to_json(const McReport& r);

/// One row per (workload, platform).
std::string comparison_csv(std::span<const ComparisonSummary> summaries);

}  // namespace pisa
