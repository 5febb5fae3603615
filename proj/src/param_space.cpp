#include "blindspot/param_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "blindspot/errors.hpp"
#include "blindspot/rng.hpp"

namespace blindspot {

ParameterSpace::ParameterSpace(std::vector<ParameterDef> params) : params_(std::move(params)) {
    if (params_.empty()) throw ConfigError("parameter space must have at least one axis");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const ParameterDef& p = params_[i];
        if (p.name.empty()) throw ConfigError("parameter " + std::to_string(i) + " has no name");
        if (!seen.insert(p.name).second)
            throw ConfigError("duplicate parameter name '" + p.name + "'");
        if (!(p.lower < p.upper)) {
            std::ostringstream os;
            os << "parameter '" << p.name << "': lower (" << p.lower
               << ") must be strictly below upper (" << p.upper << ")";
            throw ConfigError(os.str());
        }
    }
}

std::size_t ParameterSpace::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name) return i;
    throw ParameterMismatch("no parameter named '" + name + "'");
}

ThetaPoint ParameterSpace::normalize(std::span<const double> raw) const {
    if (raw.size() != dim())
        throw DimensionMismatch("normalize: got " + std::to_string(raw.size()) +
                                " coordinates, space has " + std::to_string(dim()));
    ThetaPoint pt;
    pt.raw.assign(raw.begin(), raw.end());
    pt.unit.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        const ParameterDef& p = params_[i];
        if (!(raw[i] >= p.lower && raw[i] <= p.upper)) {
            std::ostringstream os;
            os << "parameter '" << p.name << "' value " << raw[i] << " outside [" << p.lower
               << ", " << p.upper << "]";
            throw OutOfBounds(i, raw[i], os.str());
        }
        const double u = (raw[i] - p.lower) / (p.upper - p.lower);
        pt.unit[i] = std::clamp(u, 0.0, 1.0);
    }
    return pt;
}

ThetaPoint ParameterSpace::denormalize(std::span<const double> unit) const {
    if (unit.size() != dim())
        throw DimensionMismatch("denormalize: got " + std::to_string(unit.size()) +
                                " coordinates, space has " + std::to_string(dim()));
    ThetaPoint pt;
    pt.unit.assign(unit.begin(), unit.end());
    pt.raw.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
        if (!(unit[i] >= 0.0 && unit[i] <= 1.0))
            throw OutOfUnitCube("unit coordinate " + std::to_string(i) + " = " +
                                std::to_string(unit[i]) + " outside [0, 1]");
        const ParameterDef& p = params_[i];
        pt.raw[i] = p.lower + unit[i] * (p.upper - p.lower);
    }
    return pt;
}

std::vector<ThetaPoint> ParameterSpace::latin_hypercube(std::size_t n,
                                                        std::uint64_t rng_seed) const {
    if (n < 1) throw ConfigError("latin_hypercube: n must be >= 1");
    Rng rng(rng_seed);
    const std::size_t d = dim();
    std::vector<std::vector<double>> unit(n, std::vector<double>(d));
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        // Fisher-Yates with the explicit generator so designs replay anywhere
        for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.index(i + 1)]);
        for (std::size_t i = 0; i < n; ++i)
            unit[i][k] = (static_cast<double>(perm[i]) + rng.unit()) / static_cast<double>(n);
    }
    std::vector<ThetaPoint> pts;
    pts.reserve(n);
    for (const auto& u : unit) pts.push_back(denormalize(u));
    return pts;
}

std::vector<ThetaPoint> ParameterSpace::uniform_sample(std::size_t n,
                                                       std::uint64_t rng_seed) const {
    if (n < 1) throw ConfigError("uniform_sample: n must be >= 1");
    Rng rng(rng_seed);
    const std::size_t d = dim();
    std::vector<ThetaPoint> pts;
    pts.reserve(n);
    std::vector<double> u(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d; ++k) u[k] = rng.unit();
        pts.push_back(denormalize(u));
    }
    return pts;
}

ParameterSpace ParameterSpace::default_face_space() {
    return ParameterSpace({
        {"skin_type", 0.0, 1.0, "fitzpatrick scale, normalized"},
        {"skin_age", 0.0, 1.0, "wrinkle level, normalized"},
        {"head_pitch", -85.0, 85.0, "degrees"},
        {"head_yaw", -145.0, 145.0, "degrees"},
        {"mouth_open", 0.0, 5.0, "FACS intensity"},
        {"eyes_closed", 0.0, 5.0, "FACS intensity"},
    });
}

}  // namespace blindspot
