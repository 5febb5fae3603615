#include "blindspot/search.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

#include "blindspot/errors.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

namespace {

// Stream tags for sub-seed derivation; one campaign seed fans out into
// independent deterministic streams.
enum SeedStream : std::uint64_t {
    kInitDesign = 1,
    kUniformFallback = 2,
    kFitSubsample = 3,
    kHyperparamFit = 4,
    kCandidates = 5,
    kRandomPoints = 6,
};

Observation make_observation(std::size_t index, ThetaPoint theta, DetectionOutcome outcome,
                             Strategy strategy, std::uint64_t replicate_seed) {
    Observation obs;
    obs.index = index;
    obs.theta = std::move(theta);
    obs.strategy = strategy;
    obs.replicate_seed = replicate_seed;
    obs.timestamp = now_iso8601_utc();
    if (!outcome.error) obs.loss = zero_one_loss(outcome);
    obs.outcome = std::move(outcome);
    return obs;
}

void validate_common(const CampaignConfig& cfg) {
    if (!(cfg.search.failure_threshold > 0.0 && cfg.search.failure_threshold < 1.0))
        throw ConfigError("search.failure_threshold must lie in (0, 1)");
}

// Seeded subsample (without replacement, indices kept in order) of the
// hyperparameter-fit data.
void subsample_for_fit(const Matrix& X, const std::vector<double>& y, std::size_t cap,
                       std::uint64_t seed, Matrix& Xs, std::vector<double>& ys) {
    const std::size_t n = y.size();
    if (cap == 0 || n <= cap) {
        Xs = X;
        ys = y;
        return;
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    Xs = Matrix(0, X.cols);
    Xs.data.reserve(cap * X.cols);
    ys.clear();
    ys.reserve(cap);
    for (std::size_t i : idx) {
        Xs.append_row(X.row(i));
        ys.push_back(y[i]);
    }
}

}  // namespace

Strategy parse_strategy(const std::string& name) {
    if (name == "random") return Strategy::random;
    if (name == "bo") return Strategy::bo;
    throw ConfigError("unknown strategy '" + name + "' (expected random or bo)");
}

std::string strategy_name(Strategy s) { return s == Strategy::random ? "random" : "bo"; }

std::string now_iso8601_utc() {
    using namespace std::chrono;
    const auto now = system_clock::now();
    const auto ms = duration_cast<milliseconds>(now.time_since_epoch()) % 1000;
    const std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                  static_cast<int>(ms.count()));
    return buf;
}

CampaignLog run_random(const CampaignConfig& cfg, Target& target, std::uint64_t replicate_seed,
                       const ObservationSink& sink) {
    validate_common(cfg);
    CampaignLog log;
    if (cfg.search.budget == 0) return log;

    std::vector<ThetaPoint> points = cfg.space.uniform_sample(
        cfg.search.budget, derive_seed(replicate_seed, kRandomPoints, 0));
    for (std::size_t i = 0; i < points.size(); ++i) {
        DetectionOutcome outcome = target.evaluate(points[i], replicate_seed);
        Observation obs = make_observation(i, std::move(points[i]), std::move(outcome),
                                           Strategy::random, replicate_seed);
        if (sink) sink(obs);
        log.observations.push_back(std::move(obs));
    }
    return log;
}

CampaignLog run_bo(const CampaignConfig& cfg, Target& target, std::uint64_t replicate_seed,
                   const ObservationSink& sink) {
    validate_common(cfg);
    const std::size_t budget = cfg.search.budget;
    const std::size_t init = cfg.search.init_samples;
    if (init < 1) throw ConfigError("search.init_samples must be >= 1");
    if (budget < init)
        throw ConfigError("search.budget (" + std::to_string(budget) +
                          ") must be at least search.init_samples (" + std::to_string(init) + ")");
    if (cfg.gp.refit_every < 1) throw ConfigError("gp.refit_every must be >= 1");

    CampaignLog log;
    const auto evaluate_and_log = [&](ThetaPoint theta) {
        DetectionOutcome outcome = target.evaluate(theta, replicate_seed);
        Observation obs = make_observation(log.observations.size(), std::move(theta),
                                           std::move(outcome), Strategy::bo, replicate_seed);
        if (sink) sink(obs);
        log.observations.push_back(std::move(obs));
    };

    for (ThetaPoint& p :
         cfg.space.latin_hypercube(init, derive_seed(replicate_seed, kInitDesign, 0)))
        evaluate_and_log(std::move(p));

    Matrix X(0, cfg.space.dim());
    std::vector<double> y;
    std::size_t consumed = 0;
    const auto sync_training_data = [&] {
        for (; consumed < log.observations.size(); ++consumed) {
            const Observation& obs = log.observations[consumed];
            if (obs.evaluation_error()) continue;
            X.append_row(obs.theta.unit.data());
            y.push_back(*obs.loss);
        }
    };

    std::optional<GpHyperparams> hp;
    std::optional<GpModel> model;
    std::size_t fitted_at = 0;
    std::uint64_t refit_counter = 0;

    for (std::size_t step = log.observations.size(); step < budget; ++step) {
        sync_training_data();
        const std::size_t n = y.size();

        if (n < 2) {
            // Nothing to model yet (initial design all errored out): keep
            // sampling uniformly until evaluations succeed.
            ThetaPoint theta =
                cfg.space.uniform_sample(1, derive_seed(replicate_seed, kUniformFallback, step))
                    .front();
            evaluate_and_log(std::move(theta));
            continue;
        }

        if (!hp || n - fitted_at >= cfg.gp.refit_every) {
            Matrix Xfit;
            std::vector<double> yfit;
            subsample_for_fit(X, y, cfg.gp.fit_subsample,
                              derive_seed(replicate_seed, kFitSubsample, refit_counter), Xfit,
                              yfit);
            HyperparamFitOptions opts;
            opts.bounds = cfg.gp.bounds;
            opts.ard = cfg.gp.ard;
            opts.max_evals_per_start = cfg.gp.fit_evals;
            opts.starts = hp ? cfg.gp.warm_starts : cfg.gp.fit_starts;
            opts.warm_start = hp;
            hp = fit_hyperparams(Xfit, yfit,
                                 derive_seed(replicate_seed, kHyperparamFit, refit_counter), opts);
            ++refit_counter;
            fitted_at = n;
            model = GpModel::fit(X, y, *hp);
        } else {
            while (model->size() < n)
                model = model->appended(
                    std::span<const double>(X.row(model->size()), X.cols), y[model->size()]);
        }

        AcquisitionConfig acq;
        acq.xi = cfg.acquisition.xi;
        acq.candidates = cfg.acquisition.candidates;
        acq.rng_seed = derive_seed(replicate_seed, kCandidates, step);
        Proposal prop = propose_next(*model, acq);
        log.variance_clamps += prop.variance_clamps;
        log.posterior_points += n + acq.candidates;

        evaluate_and_log(cfg.space.denormalize(prop.unit));
    }
    return log;
}

CampaignLog run_campaign(const CampaignConfig& cfg, Target& target, std::uint64_t replicate_seed,
                         const ObservationSink& sink) {
    return cfg.search.strategy == Strategy::random ? run_random(cfg, target, replicate_seed, sink)
                                                   : run_bo(cfg, target, replicate_seed, sink);
}

std::size_t count_failures(std::span<const Observation> log, double threshold) {
    std::size_t count = 0;
    for (const Observation& obs : log)
        if (obs.loss && *obs.loss > threshold) ++count;
    return count;
}

}  // namespace blindspot
