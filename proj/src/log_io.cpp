#include "blindspot/log_io.hpp"

#include "blindspot/errors.hpp"

namespace blindspot {

using nlohmann::json;

json observation_to_json(const Observation& obs) {
    json j;
    j["index"] = obs.index;
    j["strategy"] = strategy_name(obs.strategy);
    j["replicate_seed"] = obs.replicate_seed;
    j["timestamp"] = obs.timestamp;
    j["theta"] = {{"unit", obs.theta.unit}, {"raw", obs.theta.raw}};
    if (obs.loss)
        j["loss"] = *obs.loss;
    else
        j["evaluation_error"] = true;
    j["outcome"] = {
        {"detected", obs.outcome.detected},
        {"face_count", obs.outcome.face_count},
        {"latency_ms", obs.outcome.latency_ms},
        {"raw_response", obs.outcome.raw_response},
        {"error", obs.outcome.error ? json(*obs.outcome.error) : json(nullptr)},
    };
    return j;
}

Observation observation_from_json(const json& j) {
    Observation obs;
    obs.index = j.at("index").get<std::size_t>();
    obs.strategy = parse_strategy(j.at("strategy").get<std::string>());
    obs.replicate_seed = j.at("replicate_seed").get<std::uint64_t>();
    obs.timestamp = j.value("timestamp", "");
    obs.theta.unit = j.at("theta").at("unit").get<std::vector<double>>();
    obs.theta.raw = j.at("theta").at("raw").get<std::vector<double>>();
    if (j.contains("loss")) obs.loss = j.at("loss").get<double>();
    const json& o = j.at("outcome");
    obs.outcome.detected = o.at("detected").get<bool>();
    obs.outcome.face_count = o.at("face_count").get<int>();
    obs.outcome.latency_ms = o.at("latency_ms").get<double>();
    obs.outcome.raw_response = o.value("raw_response", "");
    if (o.contains("error") && !o.at("error").is_null())
        obs.outcome.error = o.at("error").get<std::string>();
    if (obs.loss.has_value() == j.value("evaluation_error", false))
        throw ConfigError("observation must carry either a loss or the evaluation_error flag");
    return obs;
}

LoadedLog read_log_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open log file: " + path.string());
    LoadedLog log;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded())
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON");
        if (lineno == 1) {
            if (!j.is_object() || j.value("type", "") != "config")
                throw ConfigError(path.string() + ": first line must be the config header");
            log.config = std::move(j);
            continue;
        }
        try {
            log.observations.push_back(observation_from_json(j));
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (lineno == 0) throw ConfigError(path.string() + ": empty log file");
    return log;
}

LogWriter::LogWriter(const std::filesystem::path& path, const json& config_header) {
    out_.open(path, std::ios::trunc);
    if (!out_) throw ConfigError("cannot open log file for writing: " + path.string());
    json header = config_header;
    header["type"] = "config";
    out_ << header.dump() << '\n';
    out_.flush();
}

void LogWriter::append(const Observation& obs) {
    out_ << observation_to_json(obs).dump() << '\n';
    out_.flush();
}

void LogWriter::close() { out_.close(); }

}  // namespace blindspot
