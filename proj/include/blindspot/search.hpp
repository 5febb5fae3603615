#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blindspot/acquisition.hpp"
#include "blindspot/gp.hpp"
#include "blindspot/param_space.hpp"
#include "blindspot/targets.hpp"

namespace blindspot {

enum class Strategy { random, bo };

Strategy parse_strategy(const std::string& name);  // ConfigError on unknown
std::string strategy_name(Strategy s);

// One record per composite-function evaluation. `loss` is absent exactly
// when the evaluation errored; error records never enter GP training,
// failure counts or distribution statistics.
struct Observation {
    std::size_t index = 0;
    ThetaPoint theta;
    std::optional<double> loss;
    DetectionOutcome outcome;
    Strategy strategy = Strategy::random;
    std::uint64_t replicate_seed = 0;
    std::string timestamp;  // ISO-8601 UTC

    bool evaluation_error() const { return !loss.has_value(); }
};

struct SearchSettings {
    Strategy strategy = Strategy::random;
    std::size_t budget = 100;
    std::size_t init_samples = 10;  // BO initial Latin-hypercube design
    double failure_threshold = 0.5;
    std::uint64_t seed = 0;
    std::size_t replicates = 1;
};

struct GpSettings {
    bool ard = true;
    std::size_t refit_every = 10;
    GpHyperparamBounds bounds;
    // Hyperparameter refits subsample to this many points (seeded, sorted)
    // to keep the marginal-likelihood search affordable at large n; the
    // model itself always trains on all non-error observations.
    std::size_t fit_subsample = 320;
    int fit_starts = 8;   // multi-starts for the first fit
    int warm_starts = 2;  // warm refits: current hyperparams + fresh starts
    int fit_evals = 200;  // evaluation budget per start
};

struct AcquisitionSettings {
    double xi = 0.01;
    std::size_t candidates = 4096;
};

struct CampaignConfig {
    ParameterSpace space;
    SearchSettings search;
    GpSettings gp;
    AcquisitionSettings acquisition;
};

struct CampaignLog {
    std::vector<Observation> observations;
    // posterior variance clamp accounting for the report-time warning
    std::uint64_t variance_clamps = 0;
    std::uint64_t posterior_points = 0;
};

using ObservationSink = std::function<void(const Observation&)>;

// Evaluates `budget` i.i.d. uniform points in order. Deterministic given
// (config, replicate_seed) and a deterministic target; evaluation errors
// are logged and the loop continues.
CampaignLog run_random(const CampaignConfig& cfg, Target& target, std::uint64_t replicate_seed,
                       const ObservationSink& sink = nullptr);

// Latin-hypercube initialization followed by fit -> propose -> evaluate
// rounds. The GP trains on all non-error observations of both classes;
// hyperparameters refit every gp.refit_every new observations and the
// factor grows incrementally in between. Falls back to uniform sampling
// while fewer than two non-error observations exist.
CampaignLog run_bo(const CampaignConfig& cfg, Target& target, std::uint64_t replicate_seed,
                   const ObservationSink& sink = nullptr);

// Dispatch on cfg.search.strategy.
CampaignLog run_campaign(const CampaignConfig& cfg, Target& target, std::uint64_t replicate_seed,
                         const ObservationSink& sink = nullptr);

// Number of non-error observations with loss strictly above threshold.
std::size_t count_failures(std::span<const Observation> log, double threshold);

std::string now_iso8601_utc();

}  // namespace blindspot
