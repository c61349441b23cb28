#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "satarq/model.hpp"

namespace satarq {

/// Builds a Scenario from its JSON form. Unknown keys, wrong types and
/// missing required members are collected and thrown together as
/// InvalidScenario; semantic checks from validate() run afterwards.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

nlohmann::json scenario_to_json(const Scenario& scenario);

/// Compact dump of the JSON form. Object keys are sorted, so equal
/// scenarios give equal strings.
std::string canonical_json(const Scenario& scenario);

std::uint64_t fnv1a64(const std::string& bytes);
std::uint64_t scenario_fingerprint(const Scenario& scenario);
std::string hex64(std::uint64_t v);

}  // namespace satarq
