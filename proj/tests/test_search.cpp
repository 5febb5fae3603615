#include <doctest.h>

#include <cmath>

#include "blindspot/errors.hpp"
#include "blindspot/log_io.hpp"
#include "blindspot/search.hpp"
#include "blindspot/targets.hpp"

using namespace blindspot;

namespace {

CampaignConfig corner_config(std::size_t budget, Strategy strategy,
                             std::size_t candidates = 256) {
    CampaignConfig cfg{ParameterSpace::default_face_space(), {}, {}, {}};
    cfg.search.strategy = strategy;
    cfg.search.budget = budget;
    cfg.search.init_samples = 10;
    cfg.acquisition.candidates = candidates;
    cfg.gp.fit_evals = 60;  // keep unit-scale campaigns quick
    return cfg;
}

std::unique_ptr<Target> corner_target() {
    return make_target(SyntheticTargetConfig{OracleId::corner},
                       ParameterSpace::default_face_space());
}

std::vector<double> losses_of(const CampaignLog& log) {
    std::vector<double> out;
    for (const Observation& obs : log.observations)
        out.push_back(obs.loss ? *obs.loss : -1.0);
    return out;
}

// Synthetic target that errors on every k-th evaluation.
class FlakyTarget final : public Target {
  public:
    explicit FlakyTarget(int every) : every_(every) {}
    DetectionOutcome evaluate(const ThetaPoint& theta, std::uint64_t seed) override {
        if (++calls_ % every_ == 0) {
            DetectionOutcome out;
            out.error = "injected";
            return out;
        }
        return synthetic_evaluate(OracleId::corner, theta, seed);
    }

  private:
    int every_;
    int calls_ = 0;
};

}  // namespace

TEST_SUITE("search") {

TEST_CASE("count_failures counts strict threshold crossings of non-error records") {
    std::vector<Observation> log(5);
    log[0].loss = 0.0;
    log[1].loss = 1.0;
    log[2].loss = 1.0;
    log[3].loss = 0.0;
    log[4].loss.reset();  // evaluation error
    CHECK(count_failures(log, 0.5) == 2);
    CHECK(count_failures({}, 0.5) == 0);
}

TEST_CASE("run_random: determinism, budget and the corner binomial band") {
    const CampaignConfig cfg = corner_config(100, Strategy::random);
    auto target = corner_target();
    const CampaignLog a = run_random(cfg, *target, 7);
    const CampaignLog b = run_random(cfg, *target, 7);
    REQUIRE(a.observations.size() == 100);
    CHECK(losses_of(a) == losses_of(b));
    for (std::size_t i = 0; i < a.observations.size(); ++i) {
        CHECK(a.observations[i].index == i);
        CHECK(a.observations[i].theta.unit == b.observations[i].theta.unit);
        CHECK(a.observations[i].strategy == Strategy::random);
    }
    // binomial(100, 0.06): mean 6, far tail excluded
    const std::size_t fails = count_failures(a.observations, 0.5);
    CHECK(fails <= 18);

    CHECK(run_random(cfg, *target, 8).observations[0].theta.unit !=
          a.observations[0].theta.unit);
}

TEST_CASE("run_random with budget 0 returns an empty log") {
    CampaignConfig cfg = corner_config(0, Strategy::random);
    auto target = corner_target();
    CHECK(run_random(cfg, *target, 1).observations.empty());
}

TEST_CASE("run_bo at budget == init_samples is a pure Latin hypercube design") {
    CampaignConfig cfg = corner_config(10, Strategy::bo);
    auto target = corner_target();
    const CampaignLog log = run_bo(cfg, *target, 3);
    REQUIRE(log.observations.size() == 10);
    // every dimension stratified into 10 bins: the signature of the LHS
    for (std::size_t k = 0; k < cfg.space.dim(); ++k) {
        std::vector<bool> occupied(10, false);
        for (const Observation& obs : log.observations) {
            const auto stratum = static_cast<std::size_t>(obs.theta.unit[k] * 10);
            REQUIRE(stratum < 10);
            CHECK_FALSE(occupied[stratum]);
            occupied[stratum] = true;
        }
    }
}

TEST_CASE("run_bo trajectories are deterministic and stay in the unit cube") {
    CampaignConfig cfg = corner_config(40, Strategy::bo, 128);
    auto target = corner_target();
    const CampaignLog a = run_bo(cfg, *target, 11);
    const CampaignLog b = run_bo(cfg, *target, 11);
    REQUIRE(a.observations.size() == 40);
    CHECK(losses_of(a) == losses_of(b));
    for (std::size_t i = 0; i < 40; ++i) {
        CHECK(a.observations[i].theta.unit == b.observations[i].theta.unit);
        for (double u : a.observations[i].theta.unit) {
            CHECK(u >= 0.0);
            CHECK(u <= 1.0);
        }
    }
}

TEST_CASE("run_bo beats random on the corner oracle at modest budget") {
    const std::size_t budget = 150;
    std::size_t bo_total = 0, random_total = 0;
    for (std::uint64_t seed : {101, 102, 103}) {
        auto target = corner_target();
        bo_total +=
            count_failures(run_bo(corner_config(budget, Strategy::bo), *target, seed).observations,
                           0.5);
        random_total += count_failures(
            run_random(corner_config(budget, Strategy::random), *target, seed).observations, 0.5);
    }
    CHECK(bo_total > random_total);
}

TEST_CASE("run_bo validates its budget against the initial design") {
    CampaignConfig cfg = corner_config(5, Strategy::bo);  // init_samples = 10
    auto target = corner_target();
    CHECK_THROWS_AS(run_bo(cfg, *target, 1), ConfigError);
}

TEST_CASE("evaluation errors are logged, skipped by training and never abort") {
    CampaignConfig cfg = corner_config(30, Strategy::bo, 64);
    FlakyTarget flaky(3);  // every third evaluation errors
    const CampaignLog log = run_bo(cfg, flaky, 5);
    REQUIRE(log.observations.size() == 30);
    std::size_t errors = 0;
    for (const Observation& obs : log.observations) {
        if (obs.evaluation_error()) {
            ++errors;
            CHECK(obs.outcome.error.has_value());
            CHECK_FALSE(obs.loss.has_value());
        } else {
            CHECK(obs.loss.has_value());
        }
    }
    CHECK(errors == 10);
    CHECK(count_failures(log.observations, 0.5) <= 20);
}

TEST_CASE("run_bo falls back to uniform sampling when every evaluation errors") {
    CampaignConfig cfg = corner_config(12, Strategy::bo, 64);
    FlakyTarget always_fail(1);
    const CampaignLog log = run_bo(cfg, always_fail, 5);
    REQUIRE(log.observations.size() == 12);
    for (const Observation& obs : log.observations) CHECK(obs.evaluation_error());
}

TEST_CASE("cumulative failure counts are monotone along any log") {
    CampaignConfig cfg = corner_config(120, Strategy::random);
    auto target = corner_target();
    const CampaignLog log = run_random(cfg, *target, 17);
    std::size_t prev = 0;
    for (std::size_t b = 1; b <= log.observations.size(); ++b) {
        const std::size_t c =
            count_failures(std::span(log.observations.data(), b), cfg.search.failure_threshold);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("observation JSONL round trip preserves the record") {
    CampaignConfig cfg = corner_config(12, Strategy::bo, 64);
    auto target = corner_target();
    const CampaignLog log = run_bo(cfg, *target, 23);
    for (const Observation& obs : log.observations) {
        const auto j = observation_to_json(obs);
        const Observation back = observation_from_json(j);
        CHECK(back.index == obs.index);
        CHECK(back.theta.unit == obs.theta.unit);
        CHECK(back.theta.raw == obs.theta.raw);
        CHECK(back.loss == obs.loss);
        CHECK(back.strategy == obs.strategy);
        CHECK(back.replicate_seed == obs.replicate_seed);
        CHECK(observation_to_json(back).dump() == j.dump());
    }
}

}  // TEST_SUITE(search)
