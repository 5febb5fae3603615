#pragma once

#include <cstdint>
#include <vector>

#include "blindspot/gp.hpp"
#include "blindspot/param_space.hpp"

namespace blindspot {

struct AcquisitionConfig {
    double xi = 0.01;             // exploration jitter on the loss scale
    std::size_t candidates = 4096;
    std::uint64_t rng_seed = 0;
};

// Standard normal CDF via the complementary error function (<= 1e-12
// absolute error) and PDF.
double normal_cdf(double z);
double normal_pdf(double z);

// E[max(L - incumbent - xi, 0)] for L ~ Normal(mean, stddev^2), closed form.
// At stddev = 0 this degenerates to max(mean - incumbent - xi, 0).
double expected_improvement(double mean, double stddev, double incumbent, double xi);

struct Proposal {
    std::vector<double> unit;    // coordinates in the unit cube
    double ei = 0.0;
    double incumbent = 0.0;
    std::size_t candidate_index = 0;
    std::size_t variance_clamps = 0;
};

// Picks the EI-maximizing point among `candidates` seeded uniform unit-cube
// draws. The incumbent is the maximum posterior mean over the model's
// training inputs (raw 0/1 observations would pin the classic incumbent at
// 1.0 after the first failure and kill exploration). Ties break to the
// lowest candidate index; deterministic per (model, cfg).
Proposal propose_next(const GpModel& model, const AcquisitionConfig& cfg);

// Convenience overload producing raw coordinates as well.
ThetaPoint propose_next(const GpModel& model, const ParameterSpace& space,
                        const AcquisitionConfig& cfg);

}  // namespace blindspot
