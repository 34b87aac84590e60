#pragma once

#include <filesystem>
#include <string>

#include "lbt/experiment.hpp"

namespace lbt {

/// Parses a JSON experiment config. Unknown keys are errors; all fields
/// default to the reference configuration. Throws ConfigError with a
/// field-level message on any problem.
ExperimentConfig parse_config_text(const std::string& text);

/// File variant; an empty (or whitespace-only) file yields the defaults.
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Normalized JSON dump of a config (round-trips through parse).
std::string config_to_json(const ExperimentConfig& cfg);

/// Human-readable schema: every key, type and default.
std::string config_schema_doc();

}  // namespace lbt
