// HTTP face-detection adapter. Every failure mode lands in the outcome's
// error field; a flaky endpoint must never abort a campaign.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "blindspot/errors.hpp"
#include "blindspot/targets.hpp"

namespace blindspot {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // starts with '/'
};

ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("target.url must start with http:// or https://: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl p;
    if (path_start == std::string::npos) {
        p.base = url;
        p.path = "/";
    } else {
        p.base = url.substr(0, path_start);
        p.path = url.substr(path_start);
    }
    return p;
}

// Process-global per-endpoint rate limiter: callers reserve serialized send
// slots at least min_interval apart.
void reserve_slot(const std::string& endpoint, int min_interval_ms) {
    using clock = std::chrono::steady_clock;
    static std::mutex mu;
    static std::map<std::string, clock::time_point> next_slot;

    clock::time_point slot;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto& next = next_slot[endpoint];
        const auto now = clock::now();
        slot = next > now ? next : now;
        next = slot + std::chrono::milliseconds(min_interval_ms);
    }
    std::this_thread::sleep_until(slot);
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

DetectionOutcome parse_face_response(const HttpTargetConfig& cfg, const std::string& body,
                                     double latency_ms) {
    DetectionOutcome out;
    out.latency_ms = latency_ms;
    out.raw_response = body;
    const json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        out.error = "response_parse_error";
        return out;
    }
    json::json_pointer ptr;
    try {
        ptr = json::json_pointer(cfg.faces_pointer);
    } catch (const json::exception&) {
        out.error = "bad_faces_pointer";
        return out;
    }
    if (!j.contains(ptr)) {
        out.detected = false;
        out.face_count = 0;
        return out;
    }
    const json& faces = j.at(ptr);
    if (!faces.is_array()) {
        out.error = "faces_not_a_list";
        return out;
    }
    out.face_count = static_cast<int>(faces.size());
    out.detected = out.face_count >= 1;
    return out;
}

}  // namespace

std::string load_http_image(const HttpTargetConfig& cfg) {
    if (!cfg.image_url.empty()) return json{{"url", cfg.image_url}}.dump();
    if (cfg.image_path.empty())
        throw ConfigError("http target needs target.image_path or target.image_url");
    std::ifstream f(cfg.image_path, std::ios::binary);
    if (!f) throw ConfigError("cannot read target.image_path: " + cfg.image_path);
    std::ostringstream os;
    os << f.rdbuf();
    std::string bytes = os.str();
    if (bytes.empty()) throw ConfigError("target.image_path is empty: " + cfg.image_path);
    return bytes;
}

DetectionOutcome http_evaluate(const HttpTargetConfig& cfg, const std::string& image,
                               const RetryLogger& retry_logger) {
    DetectionOutcome out;
    if (image.empty()) {
        out.error = "empty_image";
        return out;
    }

    ParsedUrl url;
    try {
        url = parse_url(cfg.url);
    } catch (const ConfigError& e) {
        out.error = e.what();
        return out;
    }

    httplib::Headers headers;
    if (!cfg.auth_header.empty()) {
        const char* secret = std::getenv(cfg.auth_env.c_str());
        if (secret == nullptr) {
            out.error = "auth_env_missing:" + cfg.auth_env;
            return out;
        }
        headers.emplace(cfg.auth_header, secret);
    }

    httplib::Client client(url.base);
    client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(cfg.timeout_s));

    std::string reason;
    for (int attempt = 1; attempt <= cfg.retries + 1; ++attempt) {
        reserve_slot(url.base, cfg.min_interval_ms);

        const auto t0 = std::chrono::steady_clock::now();
        httplib::Result res = client.Post(url.path, headers, image, cfg.content_type);
        const double latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        bool retry = false;
        if (!res) {
            reason = httplib::to_string(res.error());
            retry = true;
        } else if (res->status >= 200 && res->status < 300) {
            return parse_face_response(cfg, res->body, latency_ms);
        } else {
            reason = "HTTP " + std::to_string(res->status);
            retry = retryable_status(res->status);
            if (!retry) {
                out.error = reason;
                out.latency_ms = latency_ms;
                out.raw_response = res->body;
                return out;
            }
        }

        if (retry && attempt <= cfg.retries) {
            const std::size_t bi = static_cast<std::size_t>(attempt - 1);
            const int backoff =
                cfg.backoff_ms.empty()
                    ? 0
                    : cfg.backoff_ms[std::min(bi, cfg.backoff_ms.size() - 1)];
            if (retry_logger) retry_logger(RetryEvent{attempt, reason, backoff});
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
        out.latency_ms = latency_ms;
    }

    out.error = "retries_exhausted:" + reason;
    return out;
}

}  // namespace blindspot
