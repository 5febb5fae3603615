#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "blindspot/search.hpp"

namespace blindspot {

// Observation <-> JSON for the append-only JSONL campaign logs. Every line
// after the config header is exactly one observation object.
nlohmann::json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j);

struct LoadedLog {
    nlohmann::json config;  // the {"type":"config", ...} header payload
    std::vector<Observation> observations;
};

// Parses a campaign log; throws ConfigError on unreadable, headerless or
// malformed files (message names the file).
LoadedLog read_log_file(const std::filesystem::path& path);

// Streams a campaign to disk: config header first, then one line per
// observation, flushed per line so partial logs survive aborts.
class LogWriter {
  public:
    LogWriter(const std::filesystem::path& path, const nlohmann::json& config_header);
    void append(const Observation& obs);
    void close();

  private:
    std::ofstream out_;
};

}  // namespace blindspot
