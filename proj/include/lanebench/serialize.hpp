#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lanebench/scenario.hpp"

namespace lanebench {

// ADL hooks so nlohmann::json converts these types directly.
void to_json(nlohmann::json& j, const Interval& v);
void from_json(const nlohmann::json& j, Interval& v);
void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);
void to_json(nlohmann::json& j, const DomainModel& d);
void from_json(const nlohmann::json& j, DomainModel& d);
void to_json(nlohmann::json& j, const ModelRestriction& r);
void from_json(const nlohmann::json& j, ModelRestriction& r);

// File helpers; throw IoError on missing files or malformed JSON.
nlohmann::json load_json_file(const std::filesystem::path& p);
void save_json_file(const nlohmann::json& j, const std::filesystem::path& p);

void save_scenario(const Scenario& s, const std::filesystem::path& p);
Scenario load_scenario(const std::filesystem::path& p);

}  // namespace lanebench
