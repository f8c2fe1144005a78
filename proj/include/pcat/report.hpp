#pragma once

#include <filesystem>
#include <string>

#include "pcat/simulation.hpp"

namespace pcat {

// Enum names used in files, reports and the CLI.
const char* to_string(Variant v);
const char* to_string(Weighting w);
const char* to_string(Init i);
const char* to_string(Scenario s);
const char* to_string(Distribution d);
const char* to_string(PcaKind k);
const char* to_string(RateTerm t);
Variant variant_from_string(const std::string& s);
Weighting weighting_from_string(const std::string& s);
Scenario scenario_from_string(const std::string& s);
Distribution distribution_from_string(const std::string& s);
PcaKind pca_kind_from_string(const std::string& s);
RateTerm rate_term_from_string(const std::string& s);

// Each writer emits <stem>.csv (long format: method,x,replication,value) and
// <stem>.json (config echo plus summary statistics). Output bytes depend only
// on the report contents, never on timing or thread count.
void write_scenario_report(const ScenarioReport& report,
                           const std::filesystem::path& directory,
                           const std::string& stem);
void write_rate_report(const RateReport& report,
                       const std::filesystem::path& directory,
                       const std::string& stem);
void write_normality_report(const NormalityReport& report,
                            const std::filesystem::path& directory,
                            const std::string& stem);

}  // namespace pcat
