#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace erl {

enum class ClaimStatus { Pass, Fail, Indeterminate };
const char* to_string(ClaimStatus status) noexcept;

struct Claim {
    std::string description;
    std::string anchor;      // the statement being checked
    nlohmann::json values;   // computed numbers behind the verdict
    double tolerance = 0.0;
    ClaimStatus status = ClaimStatus::Fail;
};

struct ScenarioReport {
    std::string id;
    nlohmann::json params;  // effective parameters, defaults filled in
    std::vector<Claim> claims;
    std::vector<std::string> trail;  // convergence trail, one line per evaluation
    double wall_seconds = 0.0;

    // Indeterminate claims do not pass.
    bool passed() const;
    // Wall time is left out unless asked for, so reports are byte-stable.
    nlohmann::json to_json(bool timing = false) const;
    std::string to_text(bool timing = false) const;
};

const std::vector<std::string>& scenario_ids();

// Unknown ids throw UnknownScenario; unknown or malformed params throw Config.
ScenarioReport run_scenario(const std::string& id, const nlohmann::json& params = nlohmann::json::object(),
                            std::size_t jobs = 1);

}  // namespace erl
