#include "blindspot/config.hpp"

#include <set>

#include "blindspot/errors.hpp"

namespace blindspot {

using nlohmann::json;

namespace {

void expect_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("unknown key '" + where + "." + item.key() + "'");
}

double get_number(const json& obj, const std::string& key, double fallback,
                  const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw ConfigError("'" + where + "." + key + "' must be a number");
    return obj.at(key).get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& key, std::int64_t fallback,
                         const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError("'" + where + "." + key + "' must be an integer");
    return obj.at(key).get<std::int64_t>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& fallback,
                       const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string())
        throw ConfigError("'" + where + "." + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

bool get_bool(const json& obj, const std::string& key, bool fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean())
        throw ConfigError("'" + where + "." + key + "' must be a boolean");
    return obj.at(key).get<bool>();
}

std::pair<double, double> get_bounds(const json& obj, const std::string& key,
                                     std::pair<double, double> fallback,
                                     const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& b = obj.at(key);
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
        throw ConfigError("'" + where + "." + key + "' must be [lower, upper]");
    const double lo = b[0].get<double>();
    const double hi = b[1].get<double>();
    if (!(lo > 0.0 && lo < hi))
        throw ConfigError("'" + where + "." + key + "' needs 0 < lower < upper");
    return {lo, hi};
}

ParameterSpace parse_parameters(const json& j) {
    if (!j.contains("parameters")) return ParameterSpace::default_face_space();
    const json& arr = j.at("parameters");
    if (!arr.is_array() || arr.empty())
        throw ConfigError("'parameters' must be a nonempty array");
    std::vector<ParameterDef> defs;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& p = arr[i];
        const std::string where = "parameters[" + std::to_string(i) + "]";
        expect_object(p, where);
        reject_unknown_keys(p, {"name", "min", "max", "units"}, where);
        ParameterDef def;
        def.name = get_string(p, "name", "", where);
        if (def.name.empty()) throw ConfigError("'" + where + ".name' is required");
        if (!p.contains("min") || !p.contains("max"))
            throw ConfigError("'" + where + "' needs min and max");
        def.lower = get_number(p, "min", 0.0, where);
        def.upper = get_number(p, "max", 0.0, where);
        def.units = get_string(p, "units", "", where);
        defs.push_back(std::move(def));
    }
    return ParameterSpace(std::move(defs));
}

HttpTargetConfig parse_http_block(const json& t, const std::string& where) {
    HttpTargetConfig http;
    reject_unknown_keys(t, {"kind", "url", "content_type", "auth_header", "auth_env",
                            "faces_pointer", "image_path", "image_url", "retries", "backoff_ms",
                            "min_interval_ms", "timeout_s"},
                        where);
    http.url = get_string(t, "url", "", where);
    if (http.url.empty()) throw ConfigError("'" + where + ".url' is required");
    http.image_url = get_string(t, "image_url", "", where);
    http.content_type = get_string(
        t, "content_type",
        http.image_url.empty() ? "application/octet-stream" : "application/json", where);
    http.auth_header = get_string(t, "auth_header", "", where);
    http.auth_env = get_string(t, "auth_env", "", where);
    if (!http.auth_header.empty() && http.auth_env.empty())
        throw ConfigError("'" + where + ".auth_env' is required with auth_header");
    http.faces_pointer = get_string(t, "faces_pointer", "/faces", where);
    try {
        (void)json::json_pointer(http.faces_pointer);
    } catch (const json::exception&) {
        throw ConfigError("'" + where + ".faces_pointer' is not a valid JSON pointer");
    }
    http.image_path = get_string(t, "image_path", "", where);
    http.retries = static_cast<int>(get_integer(t, "retries", 3, where));
    if (http.retries < 0) throw ConfigError("'" + where + ".retries' must be >= 0");
    if (t.contains("backoff_ms")) {
        const json& b = t.at("backoff_ms");
        if (!b.is_array()) throw ConfigError("'" + where + ".backoff_ms' must be an array");
        http.backoff_ms.clear();
        for (const json& v : b) {
            if (!v.is_number_integer() || v.get<int>() < 0)
                throw ConfigError("'" + where + ".backoff_ms' entries must be integers >= 0");
            http.backoff_ms.push_back(v.get<int>());
        }
    }
    http.min_interval_ms = static_cast<int>(get_integer(t, "min_interval_ms", 250, where));
    if (http.min_interval_ms < 0)
        throw ConfigError("'" + where + ".min_interval_ms' must be >= 0");
    http.timeout_s = get_number(t, "timeout_s", 30.0, where);
    if (!(http.timeout_s > 0)) throw ConfigError("'" + where + ".timeout_s' must be positive");
    return http;
}

SubprocessTargetConfig parse_subprocess_block(const json& t, const std::string& where) {
    SubprocessTargetConfig sp;
    reject_unknown_keys(t, {"kind", "command", "timeout_s"}, where);
    if (!t.contains("command") || !t.at("command").is_array() || t.at("command").empty())
        throw ConfigError("'" + where + ".command' must be a nonempty array of strings");
    for (const json& v : t.at("command")) {
        if (!v.is_string())
            throw ConfigError("'" + where + ".command' entries must be strings");
        sp.command.push_back(v.get<std::string>());
    }
    sp.timeout_s = get_number(t, "timeout_s", 120.0, where);
    if (!(sp.timeout_s > 0)) throw ConfigError("'" + where + ".timeout_s' must be positive");
    return sp;
}

TargetSpec parse_target(const json& j) {
    if (!j.contains("target")) return SyntheticTargetConfig{};
    const json& t = j.at("target");
    expect_object(t, "target");
    const std::string kind = get_string(t, "kind", "synthetic", "target");
    if (kind == "synthetic") {
        reject_unknown_keys(t, {"kind", "oracle"}, "target");
        SyntheticTargetConfig s;
        s.oracle = parse_oracle(get_string(t, "oracle", "corner", "target"));
        return s;
    }
    if (kind == "http") {
        HttpTargetConfig http = parse_http_block(t, "target");
        if (http.image_path.empty() && http.image_url.empty())
            throw ConfigError("'target' (http) needs image_path or image_url");
        return http;
    }
    if (kind == "subprocess") return parse_subprocess_block(t, "target");
    if (kind == "pipeline") {
        reject_unknown_keys(t, {"kind", "render", "detect"}, "target");
        if (!t.contains("render") || !t.contains("detect"))
            throw ConfigError("'target' (pipeline) needs render and detect blocks");
        PipelineTargetConfig p;
        expect_object(t.at("render"), "target.render");
        expect_object(t.at("detect"), "target.detect");
        p.render = parse_subprocess_block(t.at("render"), "target.render");
        p.detect = parse_http_block(t.at("detect"), "target.detect");
        return p;
    }
    throw ConfigError("unknown key 'target.kind' value '" + kind +
                      "' (expected synthetic, http, subprocess or pipeline)");
}

}  // namespace

ResolvedConfig parse_config(const json& j) {
    expect_object(j, "config");
    reject_unknown_keys(j, {"parameters", "target", "search", "gp", "acquisition", "output"},
                        "config");

    ResolvedConfig cfg;
    cfg.space = parse_parameters(j);
    cfg.target = parse_target(j);

    if (j.contains("search")) {
        const json& s = j.at("search");
        expect_object(s, "search");
        reject_unknown_keys(s, {"strategy", "budget", "init_samples", "failure_threshold", "seed",
                                "replicates"},
                            "search");
        cfg.search.strategy = parse_strategy(get_string(s, "strategy", "random", "search"));
        const std::int64_t budget = get_integer(s, "budget", 100, "search");
        if (budget < 0) throw ConfigError("'search.budget' must be >= 0");
        cfg.search.budget = static_cast<std::size_t>(budget);
        const std::int64_t init = get_integer(s, "init_samples", 10, "search");
        if (init < 1) throw ConfigError("'search.init_samples' must be >= 1");
        cfg.search.init_samples = static_cast<std::size_t>(init);
        cfg.search.failure_threshold = get_number(s, "failure_threshold", 0.5, "search");
        if (!(cfg.search.failure_threshold > 0.0 && cfg.search.failure_threshold < 1.0))
            throw ConfigError("'search.failure_threshold' must lie in (0, 1)");
        cfg.search.seed = static_cast<std::uint64_t>(get_integer(s, "seed", 0, "search"));
        const std::int64_t reps = get_integer(s, "replicates", 1, "search");
        if (reps < 1) throw ConfigError("'search.replicates' must be >= 1");
        cfg.search.replicates = static_cast<std::size_t>(reps);
    }
    if (cfg.search.strategy == Strategy::bo && cfg.search.budget < cfg.search.init_samples)
        throw ConfigError("'search.budget' must be >= 'search.init_samples' for strategy bo");

    if (j.contains("gp")) {
        const json& g = j.at("gp");
        expect_object(g, "gp");
        reject_unknown_keys(g, {"ard", "refit_every", "lengthscale_bounds",
                                "signal_variance_bounds", "noise_variance_bounds",
                                "fit_subsample", "fit_starts", "warm_starts", "fit_evals"},
                            "gp");
        cfg.gp.ard = get_bool(g, "ard", true, "gp");
        const std::int64_t refit = get_integer(g, "refit_every", 10, "gp");
        if (refit < 1) throw ConfigError("'gp.refit_every' must be >= 1");
        cfg.gp.refit_every = static_cast<std::size_t>(refit);
        std::tie(cfg.gp.bounds.lengthscale_lo, cfg.gp.bounds.lengthscale_hi) =
            get_bounds(g, "lengthscale_bounds", {0.05, 10.0}, "gp");
        std::tie(cfg.gp.bounds.signal_variance_lo, cfg.gp.bounds.signal_variance_hi) =
            get_bounds(g, "signal_variance_bounds", {0.01, 4.0}, "gp");
        std::tie(cfg.gp.bounds.noise_variance_lo, cfg.gp.bounds.noise_variance_hi) =
            get_bounds(g, "noise_variance_bounds", {1e-4, 1.0}, "gp");
        const std::int64_t sub = get_integer(g, "fit_subsample", 320, "gp");
        if (sub < 2) throw ConfigError("'gp.fit_subsample' must be >= 2");
        cfg.gp.fit_subsample = static_cast<std::size_t>(sub);
        cfg.gp.fit_starts = static_cast<int>(get_integer(g, "fit_starts", 8, "gp"));
        cfg.gp.warm_starts = static_cast<int>(get_integer(g, "warm_starts", 2, "gp"));
        cfg.gp.fit_evals = static_cast<int>(get_integer(g, "fit_evals", 200, "gp"));
        if (cfg.gp.fit_starts < 1 || cfg.gp.warm_starts < 1 || cfg.gp.fit_evals < 1)
            throw ConfigError("'gp' fit_starts, warm_starts and fit_evals must be >= 1");
    }

    if (j.contains("acquisition")) {
        const json& a = j.at("acquisition");
        expect_object(a, "acquisition");
        reject_unknown_keys(a, {"xi", "candidates"}, "acquisition");
        cfg.acquisition.xi = get_number(a, "xi", 0.01, "acquisition");
        if (cfg.acquisition.xi < 0.0) throw ConfigError("'acquisition.xi' must be >= 0");
        const std::int64_t cand = get_integer(a, "candidates", 4096, "acquisition");
        if (cand < 1) throw ConfigError("'acquisition.candidates' must be >= 1");
        cfg.acquisition.candidates = static_cast<std::size_t>(cand);
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        expect_object(o, "output");
        reject_unknown_keys(o, {"dir"}, "output");
        cfg.output_dir = get_string(o, "dir", "./out", "output");
        if (cfg.output_dir.empty()) throw ConfigError("'output.dir' must not be empty");
    }
    return cfg;
}

json ResolvedConfig::to_json() const {
    json params = json::array();
    for (const ParameterDef& p : space.params())
        params.push_back(
            {{"name", p.name}, {"min", p.lower}, {"max", p.upper}, {"units", p.units}});

    json target_j;
    if (const auto* s = std::get_if<SyntheticTargetConfig>(&target)) {
        target_j = {{"kind", "synthetic"}, {"oracle", oracle_name(s->oracle)}};
    } else if (const auto* h = std::get_if<HttpTargetConfig>(&target)) {
        target_j = {{"kind", "http"},
                    {"url", h->url},
                    {"content_type", h->content_type},
                    {"auth_header", h->auth_header},
                    {"auth_env", h->auth_env},
                    {"faces_pointer", h->faces_pointer},
                    {"image_path", h->image_path},
                    {"image_url", h->image_url},
                    {"retries", h->retries},
                    {"backoff_ms", h->backoff_ms},
                    {"min_interval_ms", h->min_interval_ms},
                    {"timeout_s", h->timeout_s}};
    } else if (const auto* sp = std::get_if<SubprocessTargetConfig>(&target)) {
        target_j = {{"kind", "subprocess"}, {"command", sp->command}, {"timeout_s", sp->timeout_s}};
    } else {
        const auto& p = std::get<PipelineTargetConfig>(target);
        target_j = {{"kind", "pipeline"},
                    {"render", {{"command", p.render.command}, {"timeout_s", p.render.timeout_s}}},
                    {"detect",
                     {{"url", p.detect.url},
                      {"content_type", p.detect.content_type},
                      {"auth_header", p.detect.auth_header},
                      {"auth_env", p.detect.auth_env},
                      {"faces_pointer", p.detect.faces_pointer},
                      {"retries", p.detect.retries},
                      {"backoff_ms", p.detect.backoff_ms},
                      {"min_interval_ms", p.detect.min_interval_ms},
                      {"timeout_s", p.detect.timeout_s}}}};
    }

    return json{
        {"parameters", params},
        {"target", target_j},
        {"search",
         {{"strategy", strategy_name(search.strategy)},
          {"budget", search.budget},
          {"init_samples", search.init_samples},
          {"failure_threshold", search.failure_threshold},
          {"seed", search.seed},
          {"replicates", search.replicates}}},
        {"gp",
         {{"ard", gp.ard},
          {"refit_every", gp.refit_every},
          {"lengthscale_bounds", {gp.bounds.lengthscale_lo, gp.bounds.lengthscale_hi}},
          {"signal_variance_bounds",
           {gp.bounds.signal_variance_lo, gp.bounds.signal_variance_hi}},
          {"noise_variance_bounds", {gp.bounds.noise_variance_lo, gp.bounds.noise_variance_hi}},
          {"fit_subsample", gp.fit_subsample},
          {"fit_starts", gp.fit_starts},
          {"warm_starts", gp.warm_starts},
          {"fit_evals", gp.fit_evals}}},
        {"acquisition", {{"xi", acquisition.xi}, {"candidates", acquisition.candidates}}},
        {"output", {{"dir", output_dir}}},
    };
}

json apply_overrides(json config,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [path, value] : overrides) {
        std::string pointer = "/";
        for (char c : path) pointer += (c == '.') ? '/' : c;
        json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded()) parsed = value;
        try {
            config[json::json_pointer(pointer)] = parsed;
        } catch (const json::exception& e) {
            throw ConfigError("cannot apply override '" + path + "': " + e.what());
        }
    }
    return config;
}

}  // namespace blindspot
