#include <doctest.h>

#include <cmath>

#include "blindspot/errors.hpp"
#include "blindspot/param_space.hpp"
#include "blindspot/rng.hpp"

using namespace blindspot;

TEST_SUITE("param_space") {

TEST_CASE("construction validates axes") {
    CHECK_THROWS_AS(ParameterSpace({}), ConfigError);
    CHECK_THROWS_AS(ParameterSpace({{"a", 1.0, 1.0, ""}}), ConfigError);
    CHECK_THROWS_AS(ParameterSpace({{"a", 2.0, 1.0, ""}}), ConfigError);
    CHECK_THROWS_AS(ParameterSpace({{"", 0.0, 1.0, ""}}), ConfigError);
    CHECK_THROWS_AS(ParameterSpace({{"a", 0.0, 1.0, ""}, {"a", 0.0, 2.0, ""}}), ConfigError);
    const ParameterSpace space = ParameterSpace::default_face_space();
    CHECK(space.dim() == 6);
    CHECK(space.index_of("head_yaw") == 3);
    CHECK_THROWS_AS(space.index_of("nose"), ParameterMismatch);
}

TEST_CASE("normalize maps known raw values") {
    const ParameterSpace space = ParameterSpace::default_face_space();
    const ThetaPoint mid = space.normalize(std::vector<double>{0.2, 0.4, 0.0, 145.0, 1.25, 5.0});
    CHECK(mid.unit[2] == doctest::Approx(0.5).epsilon(1e-15));   // pitch 0 on [-85, 85]
    CHECK(mid.unit[3] == doctest::Approx(1.0).epsilon(1e-15));   // yaw at upper bound
    CHECK(mid.unit[4] == doctest::Approx(0.25).epsilon(1e-15));  // mouth 1.25 on [0, 5]
}

TEST_CASE("normalize rejects out-of-range and mis-sized input") {
    const ParameterSpace space = ParameterSpace::default_face_space();
    CHECK_THROWS_AS(space.normalize(std::vector<double>{0.5, 0.5}), DimensionMismatch);
    std::vector<double> raw = {0.5, 0.5, 86.0, 0.0, 2.5, 2.5};
    try {
        space.normalize(raw);
        FAIL("expected OutOfBounds");
    } catch (const OutOfBounds& e) {
        CHECK(e.index == 2);
        CHECK(e.value == 86.0);
    }
}

TEST_CASE("denormalize maps unit corners and midpoints") {
    const ParameterSpace space = ParameterSpace::default_face_space();
    const ThetaPoint mid = space.denormalize(std::vector<double>(6, 0.5));
    const std::vector<double> expect_mid = {0.5, 0.5, 0.0, 0.0, 2.5, 2.5};
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(mid.raw[i] == doctest::Approx(expect_mid[i]).epsilon(1e-15));

    const ThetaPoint lo = space.denormalize(std::vector<double>(6, 0.0));
    const std::vector<double> expect_lo = {0.0, 0.0, -85.0, -145.0, 0.0, 0.0};
    for (std::size_t i = 0; i < 6; ++i) CHECK(lo.raw[i] == expect_lo[i]);

    CHECK_THROWS_AS(space.denormalize(std::vector<double>{0.0, 0.0, 1.2, 0.0, 0.0, 0.0}),
                    OutOfUnitCube);
}

TEST_CASE("normalize/denormalize round trip on 1000 seeded points") {
    const ParameterSpace space = ParameterSpace::default_face_space();
    Rng rng(123);
    for (int t = 0; t < 1000; ++t) {
        std::vector<double> unit(space.dim());
        for (double& u : unit) u = rng.unit();
        const ThetaPoint p = space.denormalize(unit);
        const ThetaPoint back = space.normalize(p.raw);
        for (std::size_t i = 0; i < space.dim(); ++i)
            CHECK(std::abs(back.unit[i] - unit[i]) <= 1e-12 * std::max(1.0, std::abs(unit[i])));
    }
}

TEST_CASE("latin hypercube stratifies every dimension") {
    const ParameterSpace space({{"x", 0.0, 1.0, ""}, {"y", -3.0, 3.0, ""}});
    const std::size_t n = 4;
    const auto pts = space.latin_hypercube(n, 42);
    REQUIRE(pts.size() == n);
    for (std::size_t k = 0; k < 2; ++k) {
        std::vector<bool> occupied(n, false);
        for (const ThetaPoint& p : pts) {
            const auto stratum = static_cast<std::size_t>(p.unit[k] * n);
            REQUIRE(stratum < n);
            CHECK_FALSE(occupied[stratum]);
            occupied[stratum] = true;
        }
    }
}

TEST_CASE("latin hypercube is deterministic per seed and respects bounds") {
    const ParameterSpace space = ParameterSpace::default_face_space();
    const auto a = space.latin_hypercube(10, 7);
    const auto b = space.latin_hypercube(10, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].unit == b[i].unit);
        CHECK(a[i].raw == b[i].raw);
        for (std::size_t k = 0; k < space.dim(); ++k) {
            CHECK(a[i].raw[k] >= space.param(k).lower);
            CHECK(a[i].raw[k] <= space.param(k).upper);
        }
    }
    CHECK(space.latin_hypercube(10, 8).front().unit != a.front().unit);
}

TEST_CASE("uniform sampling: mean near 0.5, deterministic, n >= 1") {
    const ParameterSpace space = ParameterSpace::default_face_space();
    const auto pts = space.uniform_sample(1000, 99);
    for (std::size_t k = 0; k < space.dim(); ++k) {
        double mean = 0.0;
        for (const ThetaPoint& p : pts) mean += p.unit[k];
        mean /= 1000.0;
        CHECK(std::abs(mean - 0.5) < 0.05);  // ~5.5 sigma of the mean estimator
    }
    CHECK(space.uniform_sample(5, 99).front().unit == pts.front().unit);
    CHECK_THROWS_AS(space.uniform_sample(0, 1), ConfigError);
    CHECK_THROWS_AS(space.latin_hypercube(0, 1), ConfigError);
}

}  // TEST_SUITE(param_space)
