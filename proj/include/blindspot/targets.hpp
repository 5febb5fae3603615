#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "blindspot/param_space.hpp"

namespace blindspot {

// Result of one detector invocation. When `error` is set the observation is
// flagged evaluation_error and detected/face_count carry no meaning.
struct DetectionOutcome {
    bool detected = false;
    int face_count = 0;
    double latency_ms = 0.0;
    std::string raw_response;
    std::optional<std::string> error;
};

// 0-1 loss: 0 iff a face was detected, 1 otherwise. Throws
// EvaluationErrorPresent when the outcome carries an error.
double zero_one_loss(const DetectionOutcome& outcome);

// Uniform evaluation contract for every system under test.
class Target {
  public:
    virtual ~Target() = default;
    // Deterministic per (config, theta, seed) for all adapters except HTTP,
    // whose nondeterminism is confined to latency, raw response text and
    // transient-error handling.
    virtual DetectionOutcome evaluate(const ThetaPoint& theta, std::uint64_t rng_seed) = 0;
};

// ---- synthetic oracles ------------------------------------------------

enum class OracleId { corner, pose_band, mixed };

// Parses "corner" / "pose_band" / "mixed"; throws UnknownOracle otherwise.
OracleId parse_oracle(const std::string& name);
std::string oracle_name(OracleId id);

// Desk-scale stand-ins for a rendered-face + detector pipeline, defined on
// the default six-axis space ordering:
//   corner:    fail iff skin_unit >= 0.8 and age_unit >= 0.7 (6% volume)
//   pose_band: fail iff |pitch_raw| >= 60 deg or |yaw_raw| >= 100 deg
//   mixed:     fail w.p. sigmoid(8 (skin_unit - 0.7) + 6 (age_unit - 0.6)),
//              Bernoulli draw seeded by (seed, quantized theta) so replays
//              are identical
DetectionOutcome synthetic_evaluate(OracleId oracle, const ThetaPoint& theta,
                                    std::uint64_t rng_seed);

struct SyntheticTargetConfig {
    OracleId oracle = OracleId::corner;
};

// ---- HTTP face-detection API adapter ----------------------------------

struct RetryEvent {
    int attempt = 0;     // 1-based attempt that failed
    std::string reason;  // e.g. "HTTP 500", "timeout"
    int backoff_ms = 0;
};
using RetryLogger = std::function<void(const RetryEvent&)>;

struct HttpTargetConfig {
    std::string url;                                        // http(s)://host[:port]/path
    std::string content_type = "application/octet-stream";  // or application/json
    std::string auth_header;     // header name; empty = no auth
    std::string auth_env;        // environment variable holding the secret
    std::string faces_pointer = "/faces";  // JSON pointer to the face list
    std::string image_path;      // body source for kind=http (octet-stream mode)
    std::string image_url;       // body source for kind=http (json {"url": ...} mode)
    int retries = 3;
    std::vector<int> backoff_ms = {1000, 2000, 4000};
    int min_interval_ms = 250;   // enforced process-globally per endpoint
    double timeout_s = 30.0;
};

// ---- subprocess adapters -----------------------------------------------

struct SubprocessTargetConfig {
    std::vector<std::string> command;
    double timeout_s = 120.0;
};

// Renderer subprocess chained before an HTTP detector. The render child
// receives the same {"params": ...} request and must write the stimulus
// bytes to stdout.
struct PipelineTargetConfig {
    SubprocessTargetConfig render;
    HttpTargetConfig detect;
};

using TargetSpec =
    std::variant<SyntheticTargetConfig, HttpTargetConfig, SubprocessTargetConfig,
                 PipelineTargetConfig>;

// Builds the adapter for a parsed target spec. The space supplies parameter
// names for the subprocess wire format and sanity-checks oracle
// requirements. retry_logger (optional) observes HTTP retries.
std::unique_ptr<Target> make_target(const TargetSpec& spec, const ParameterSpace& space,
                                    RetryLogger retry_logger = nullptr);

// ---- low-level helpers (exposed for tests) ------------------------------

struct SubprocessResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string output;
    std::string error;  // populated for spawn failures
};

// Runs argv with `input` on stdin, captures stdout, enforces a wall-clock
// timeout (SIGKILL on expiry).
SubprocessResult run_subprocess(const std::vector<std::string>& argv, const std::string& input,
                                double timeout_s);

// One POST of `image` to the configured endpoint with retry/backoff and
// rate limiting; all failures land in the outcome's error field.
DetectionOutcome http_evaluate(const HttpTargetConfig& cfg, const std::string& image,
                               const RetryLogger& retry_logger = nullptr);

// Serializes {"params": {name: raw_value, ...}} for the subprocess protocol.
std::string subprocess_request_json(const ParameterSpace& space, const ThetaPoint& theta);

}  // namespace blindspot
