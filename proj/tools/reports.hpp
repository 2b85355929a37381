#pragma once

#include <string>

#include <json.hpp>

#include "lrst/gaussian_oracle.hpp"
#include "lrst/lrst_inference.hpp"
#include "lrst/power_design.hpp"
#include "lrst/sim_engine.hpp"
#include "lrst/trial_data.hpp"

namespace lrst::cli {

using nlohmann::ordered_json;

inline constexpr const char* schema_version = "1";

ordered_json to_json(const Matrix& m);
ordered_json to_json(const LrstResult& r);
ordered_json to_json(const PowerResult& r);
ordered_json to_json(const SampleSizeResult& r);
ordered_json to_json(const OracleResult& r);
ordered_json to_json(const SimReport& r);
ordered_json to_json(const PruneReport& r);

/// Top-level report: schema_version, tool, version, command, inputs, result.
ordered_json make_report(const std::string& command, ordered_json inputs, ordered_json result);

/// Flattens a report into "key,value" lines; nested keys join with '.',
/// array elements use 1-based [i] suffixes.
std::string csv_summary(const ordered_json& report);

}  // namespace lrst::cli
