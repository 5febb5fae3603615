#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "blindspot/search.hpp"
#include "blindspot/targets.hpp"

namespace blindspot {

// Fully resolved campaign configuration: file contents + flag overrides +
// defaults. Parsing is total — any unknown key, wrong type or invariant
// violation throws ConfigError before anything is evaluated or written.
struct ResolvedConfig {
    ParameterSpace space = ParameterSpace::default_face_space();
    TargetSpec target = SyntheticTargetConfig{};
    SearchSettings search;
    GpSettings gp;
    AcquisitionSettings acquisition;
    std::string output_dir = "./out";

    CampaignConfig campaign() const { return {space, search, gp, acquisition}; }

    // Canonical JSON form; embedded as the header line of every campaign
    // log so logs are self-contained for `report` and replays.
    nlohmann::json to_json() const;
};

ResolvedConfig parse_config(const nlohmann::json& j);

// Applies `--a.b.c value` style overrides onto the raw config JSON. Values
// parse as JSON when possible and fall back to strings.
nlohmann::json apply_overrides(nlohmann::json config,
                               const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace blindspot
