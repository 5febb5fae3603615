#include "blindspot/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "blindspot/errors.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double expected_improvement(double mean, double stddev, double incumbent, double xi) {
    const double diff = mean - incumbent - xi;
    if (!(stddev > 0.0)) return std::max(diff, 0.0);
    const double z = diff / stddev;
    return std::max(diff * normal_cdf(z) + stddev * normal_pdf(z), 0.0);
}

Proposal propose_next(const GpModel& model, const AcquisitionConfig& cfg) {
    if (model.size() < 1) throw ConfigError("propose_next: model has no observations");
    if (cfg.candidates < 1) throw ConfigError("propose_next: need at least one candidate");
    if (cfg.xi < 0.0) throw ConfigError("propose_next: xi must be nonnegative");

    const std::size_t d = model.dim();
    const std::size_t n = model.size();

    Proposal out;

    // Noisy-EI incumbent: best posterior mean over the observed inputs.
    {
        std::vector<double> means(n), vars(n);
        out.variance_clamps +=
            model.posterior_batch(model.inputs().data.data(), n, means.data(), vars.data());
        out.incumbent = *std::max_element(means.begin(), means.end());
    }

    Rng rng(cfg.rng_seed);
    std::vector<double> candidates(cfg.candidates * d);
    for (double& v : candidates) v = rng.unit();

    std::vector<double> means(cfg.candidates), vars(cfg.candidates);
    out.variance_clamps +=
        model.posterior_batch(candidates.data(), cfg.candidates, means.data(), vars.data());

    std::size_t best = 0;
    double best_ei = -1.0;
    for (std::size_t c = 0; c < cfg.candidates; ++c) {
        const double ei =
            expected_improvement(means[c], std::sqrt(vars[c]), out.incumbent, cfg.xi);
        if (ei > best_ei) {
            best_ei = ei;
            best = c;
        }
    }

    out.unit.assign(candidates.begin() + best * d, candidates.begin() + (best + 1) * d);
    out.ei = best_ei;
    out.candidate_index = best;
    return out;
}

ThetaPoint propose_next(const GpModel& model, const ParameterSpace& space,
                        const AcquisitionConfig& cfg) {
    if (space.dim() != model.dim())
        throw DimensionMismatch("propose_next: space and model dimensions differ");
    return space.denormalize(propose_next(model, cfg).unit);
}

}  // namespace blindspot
