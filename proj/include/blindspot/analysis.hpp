#pragma once

#include <span>
#include <string>
#include <vector>

#include "blindspot/param_space.hpp"
#include "blindspot/search.hpp"

namespace blindspot {

// Five-number summary of one parameter over one outcome group, raw units.
struct BoxStats {
    std::string parameter_name;
    std::string group;  // "true_positive" or "false_negative"
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::size_t n = 0;
};

// Cumulative failure counts per evaluation budget, averaged over replicate
// campaigns, with the standard error across replicates.
struct EfficiencyCurve {
    std::string strategy;
    std::vector<std::size_t> budgets;  // 1..B
    std::vector<double> mean_failures;
    std::vector<double> std_error;
    std::size_t replicates = 0;
};

struct TpFnSplit {
    std::vector<Observation> tp;  // detected (loss 0)
    std::vector<Observation> fn;  // missed (loss 1)
};

// Splits non-error observations into detected/missed; error records land in
// neither group.
TpFnSplit split_tp_fn(std::span<const Observation> log);

// Quartiles by linear interpolation between closest ranks: the p-quantile
// sits at fractional rank (n - 1) p of the sorted values. Throws EmptyGroup
// on empty input.
BoxStats box_stats(std::span<const Observation> group, const ParameterSpace& space,
                   const std::string& parameter_name, const std::string& group_label);

// Plain-vector flavor used by the observation overload and tests.
BoxStats box_stats_values(std::vector<double> values, const std::string& parameter_name,
                          const std::string& group_label);

// Mean/stderr cumulative-failure curve over replicate logs of one strategy.
// All logs must share strategy and budget (MismatchedBudgets otherwise);
// std_error is zero with a single replicate.
EfficiencyCurve efficiency_curve(std::span<const std::vector<Observation>> logs,
                                 double threshold);

// fn median minus tp median in raw units; positive means failures skew
// toward the upper end of the parameter's range.
double skew_report(const BoxStats& tp_stats, const BoxStats& fn_stats);

// ---- CSV outputs (column sets and order are part of the contract) -------

std::string boxstats_csv(std::span<const BoxStats> stats);
std::string efficiency_csv(std::span<const EfficiencyCurve> curves);
// budget,mean_bo,se_bo,mean_random,se_random,ratio with ratio empty on 0/0
std::string comparison_csv(const EfficiencyCurve& bo, const EfficiencyCurve& random);

// Shortest round-trip decimal rendering; all CSV numbers go through this so
// outputs are byte-comparable across runs.
std::string format_double(double v);

}  // namespace blindspot
