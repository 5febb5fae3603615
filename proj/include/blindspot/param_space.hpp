#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blindspot {

// One bounded continuous axis of the search domain, in raw units.
struct ParameterDef {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    std::string units;
};

// A parameter assignment in both views. `raw_i = lower_i + unit_i * (upper_i - lower_i)`
// holds by construction; all search-internal math uses `unit`, raw units
// appear only at target adapters and in reports.
struct ThetaPoint {
    std::vector<double> unit;
    std::vector<double> raw;
};

// Ordered list of parameter axes; the ordering defines the coordinate index
// of every ThetaPoint.
class ParameterSpace {
  public:
    // Validates d >= 1, lower < upper and nonempty unique names; throws
    // ConfigError otherwise.
    explicit ParameterSpace(std::vector<ParameterDef> params);

    std::size_t dim() const { return params_.size(); }
    const std::vector<ParameterDef>& params() const { return params_; }
    const ParameterDef& param(std::size_t i) const { return params_[i]; }

    // Index of the axis with this name; throws ParameterMismatch when absent.
    std::size_t index_of(const std::string& name) const;

    // Raw units -> unit cube. Out-of-range inputs are an error, not clamped;
    // silent clamping would hide adapter bugs.
    ThetaPoint normalize(std::span<const double> raw) const;

    // Unit cube -> raw units. Inverse of normalize.
    ThetaPoint denormalize(std::span<const double> unit) const;

    // Maximin-free Latin hypercube: one sample per stratum [k/n, (k+1)/n)
    // in every dimension, jittered uniformly within the stratum.
    std::vector<ThetaPoint> latin_hypercube(std::size_t n, std::uint64_t rng_seed) const;

    // n i.i.d. uniform draws on the unit cube, denormalized.
    std::vector<ThetaPoint> uniform_sample(std::size_t n, std::uint64_t rng_seed) const;

    // The six face-appearance axes used as the default search domain:
    // skin type and skin age on [0,1], head pitch/yaw in degrees, mouth
    // open and eyes closed in FACS intensities.
    static ParameterSpace default_face_space();

  private:
    std::vector<ParameterDef> params_;
};

}  // namespace blindspot
