#pragma once

#include "dimgp/dataset.hpp"
#include "dimgp/evolve.hpp"
#include "dimgp/hessian_ed.hpp"
#include "dimgp/intrinsic_dim.hpp"
#include "dimgp/select.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace dimgp {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";

json model_to_json(const StackModel& m);
StackModel model_from_json(const json& j, int max_complexity = kDefaultMaxComplexity);

json scored_to_json(const ScoredModel& m);
ScoredModel scored_from_json(const json& j);

json population_to_json(const Population& pop, const std::vector<GenStats>& history);
Population population_from_json(const json& j);

json front_to_json(const std::vector<ScoredModel>& front);
std::vector<ScoredModel> front_from_json(const json& j);

json profile_to_json(const IDProfile& p);
IDProfile profile_from_json(const json& j);

json hessian_to_json(const HessianEstimate& h);

json selection_to_json(const SelectionResult& s);

json band_report_to_json(const BandReport& r);

json dataset_summary_json(const Dataset& d);

/// Wrap a payload with the schema version and the configuration echo every
/// artifact carries.
json make_artifact(const json& run_config_echo, json payload);

/// Write via a temp file in the same directory plus rename, so readers never
/// observe partial artifacts.
void write_artifact(const std::filesystem::path& path, const json& doc);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

json load_json(const std::filesystem::path& path);

} // namespace dimgp
