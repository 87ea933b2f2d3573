#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bioreactor/scenario.hpp"

namespace bioreactor {

/**
 * Parses and validates a scenario document.
 *
 * The document is nested YAML; every key is optional and falls back to the
 * defaults of ScenarioConfig. Unknown keys are rejected. Throws ParseError
 * (with position) for malformed text and ConfigError (field path and
 * constraint) for invalid values.
 */
ScenarioConfig parse_config(const std::string& text);

ScenarioConfig load_config(const std::string& path);

/// Emits a document that parse_config maps back to an identical config.
std::string serialize_config(const ScenarioConfig& config);

/// Applies dotted-path overrides ("flow.q0" -> "0.2") to a document; each
/// value is itself parsed as YAML.
std::string apply_overrides(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace bioreactor
