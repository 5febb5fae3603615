#include "blindspot/targets.hpp"

#include <cmath>
#include <cstring>

#include "blindspot/errors.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

// Implemented in targets_subprocess.cpp / targets_http.cpp.
DetectionOutcome parse_detection_json(const std::string& text);
std::string load_http_image(const HttpTargetConfig& cfg);

double zero_one_loss(const DetectionOutcome& outcome) {
    if (outcome.error)
        throw EvaluationErrorPresent("cannot score an outcome flagged with error: " +
                                     *outcome.error);
    return outcome.detected ? 0.0 : 1.0;
}

OracleId parse_oracle(const std::string& name) {
    if (name == "corner") return OracleId::corner;
    if (name == "pose_band") return OracleId::pose_band;
    if (name == "mixed") return OracleId::mixed;
    throw UnknownOracle("unknown oracle '" + name + "' (expected corner, pose_band or mixed)");
}

std::string oracle_name(OracleId id) {
    switch (id) {
        case OracleId::corner: return "corner";
        case OracleId::pose_band: return "pose_band";
        case OracleId::mixed: return "mixed";
    }
    return "?";
}

namespace {

DetectionOutcome outcome_for(bool fail) {
    DetectionOutcome o;
    o.detected = !fail;
    o.face_count = fail ? 0 : 1;
    return o;
}

// Hash of the raw coordinates at fixed 1e-9 quantization, so floating-point
// noise below that grain cannot flip a Bernoulli outcome between replays.
std::uint64_t theta_hash(const ThetaPoint& theta) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (double raw : theta.raw) {
        const auto q = static_cast<std::int64_t>(std::llround(raw / 1e-9));
        std::uint64_t bits;
        std::memcpy(&bits, &q, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void require_dims(const ThetaPoint& theta, std::size_t need, OracleId id) {
    if (theta.unit.size() < need || theta.raw.size() != theta.unit.size())
        throw DimensionMismatch("oracle '" + oracle_name(id) + "' needs at least " +
                                std::to_string(need) + " parameters");
}

class SyntheticTarget final : public Target {
  public:
    explicit SyntheticTarget(OracleId id) : id_(id) {}
    DetectionOutcome evaluate(const ThetaPoint& theta, std::uint64_t rng_seed) override {
        return synthetic_evaluate(id_, theta, rng_seed);
    }

  private:
    OracleId id_;
};

class SubprocessTarget final : public Target {
  public:
    SubprocessTarget(SubprocessTargetConfig cfg, ParameterSpace space)
        : cfg_(std::move(cfg)), space_(std::move(space)) {}

    DetectionOutcome evaluate(const ThetaPoint& theta, std::uint64_t) override {
        const SubprocessResult res =
            run_subprocess(cfg_.command, subprocess_request_json(space_, theta), cfg_.timeout_s);
        DetectionOutcome out;
        if (!res.error.empty()) {
            out.error = res.error;
            return out;
        }
        if (res.timed_out) {
            out.error = "timeout";
            return out;
        }
        if (res.exit_code != 0) {
            out.error = "exit_" + std::to_string(res.exit_code);
            return out;
        }
        return parse_detection_json(res.output);
    }

  private:
    SubprocessTargetConfig cfg_;
    ParameterSpace space_;
};

class HttpTarget final : public Target {
  public:
    HttpTarget(HttpTargetConfig cfg, RetryLogger logger)
        : cfg_(std::move(cfg)), logger_(std::move(logger)) {
        image_ = load_http_image(cfg_);
    }

    DetectionOutcome evaluate(const ThetaPoint&, std::uint64_t) override {
        return http_evaluate(cfg_, image_, logger_);
    }

  private:
    HttpTargetConfig cfg_;
    RetryLogger logger_;
    std::string image_;
};

class PipelineTarget final : public Target {
  public:
    PipelineTarget(PipelineTargetConfig cfg, ParameterSpace space, RetryLogger logger)
        : cfg_(std::move(cfg)), space_(std::move(space)), logger_(std::move(logger)) {}

    DetectionOutcome evaluate(const ThetaPoint& theta, std::uint64_t) override {
        const SubprocessResult render =
            run_subprocess(cfg_.render.command, subprocess_request_json(space_, theta),
                           cfg_.render.timeout_s);
        if (!render.error.empty() || render.timed_out || render.exit_code != 0) {
            DetectionOutcome o;
            o.error = !render.error.empty()
                          ? render.error
                          : (render.timed_out ? "timeout"
                                              : "render_exit_" + std::to_string(render.exit_code));
            return o;
        }
        return http_evaluate(cfg_.detect, render.output, logger_);
    }

  private:
    PipelineTargetConfig cfg_;
    ParameterSpace space_;
    RetryLogger logger_;
};

}  // namespace

DetectionOutcome synthetic_evaluate(OracleId oracle, const ThetaPoint& theta,
                                    std::uint64_t rng_seed) {
    switch (oracle) {
        case OracleId::corner: {
            require_dims(theta, 2, oracle);
            return outcome_for(theta.unit[0] >= 0.8 && theta.unit[1] >= 0.7);
        }
        case OracleId::pose_band: {
            require_dims(theta, 4, oracle);
            return outcome_for(std::abs(theta.raw[2]) >= 60.0 || std::abs(theta.raw[3]) >= 100.0);
        }
        case OracleId::mixed: {
            require_dims(theta, 2, oracle);
            const double logit = 8.0 * (theta.unit[0] - 0.7) + 6.0 * (theta.unit[1] - 0.6);
            const double p = 1.0 / (1.0 + std::exp(-logit));
            Rng rng(splitmix64(rng_seed ^ theta_hash(theta)));
            return outcome_for(rng.unit() < p);
        }
    }
    throw UnknownOracle("invalid oracle id");
}

std::unique_ptr<Target> make_target(const TargetSpec& spec, const ParameterSpace& space,
                                    RetryLogger retry_logger) {
    if (const auto* s = std::get_if<SyntheticTargetConfig>(&spec)) {
        const std::size_t need = s->oracle == OracleId::pose_band ? 4 : 2;
        if (space.dim() < need)
            throw ConfigError("oracle '" + oracle_name(s->oracle) + "' needs at least " +
                              std::to_string(need) + " parameters, space has " +
                              std::to_string(space.dim()));
        return std::make_unique<SyntheticTarget>(s->oracle);
    }
    if (const auto* s = std::get_if<HttpTargetConfig>(&spec))
        return std::make_unique<HttpTarget>(*s, std::move(retry_logger));
    if (const auto* s = std::get_if<SubprocessTargetConfig>(&spec)) {
        if (s->command.empty()) throw ConfigError("subprocess target: command is empty");
        return std::make_unique<SubprocessTarget>(*s, space);
    }
    const auto& p = std::get<PipelineTargetConfig>(spec);
    if (p.render.command.empty()) throw ConfigError("pipeline target: render command is empty");
    return std::make_unique<PipelineTarget>(p, space, std::move(retry_logger));
}

}  // namespace blindspot
