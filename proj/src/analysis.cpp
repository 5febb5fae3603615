#include "blindspot/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "blindspot/errors.hpp"

namespace blindspot {

TpFnSplit split_tp_fn(std::span<const Observation> log) {
    TpFnSplit split;
    for (const Observation& obs : log) {
        if (!obs.loss) continue;
        if (*obs.loss == 0.0)
            split.tp.push_back(obs);
        else
            split.fn.push_back(obs);
    }
    return split;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

BoxStats box_stats_values(std::vector<double> values, const std::string& parameter_name,
                          const std::string& group_label) {
    if (values.empty())
        throw EmptyGroup("box_stats: no observations in group '" + group_label + "'");
    std::sort(values.begin(), values.end());
    BoxStats s;
    s.parameter_name = parameter_name;
    s.group = group_label;
    s.n = values.size();
    s.min = values.front();
    s.q1 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.5);
    s.q3 = quantile_sorted(values, 0.75);
    s.max = values.back();
    return s;
}

BoxStats box_stats(std::span<const Observation> group, const ParameterSpace& space,
                   const std::string& parameter_name, const std::string& group_label) {
    const std::size_t idx = space.index_of(parameter_name);
    std::vector<double> values;
    values.reserve(group.size());
    for (const Observation& obs : group) values.push_back(obs.theta.raw[idx]);
    return box_stats_values(std::move(values), parameter_name, group_label);
}

EfficiencyCurve efficiency_curve(std::span<const std::vector<Observation>> logs,
                                 double threshold) {
    if (logs.empty()) throw MismatchedBudgets("efficiency_curve: no logs given");
    const std::size_t budget = logs.front().size();
    const std::size_t replicates = logs.size();
    Strategy strategy = Strategy::random;
    bool have_strategy = false;

    // cumulative failure counts per log
    std::vector<std::vector<double>> cumulative(replicates);
    for (std::size_t r = 0; r < replicates; ++r) {
        const auto& log = logs[r];
        if (log.size() != budget)
            throw MismatchedBudgets("efficiency_curve: log " + std::to_string(r) + " has budget " +
                                    std::to_string(log.size()) + ", expected " +
                                    std::to_string(budget));
        cumulative[r].resize(budget);
        std::size_t count = 0;
        for (std::size_t b = 0; b < budget; ++b) {
            const Observation& obs = log[b];
            if (!have_strategy) {
                strategy = obs.strategy;
                have_strategy = true;
            } else if (obs.strategy != strategy) {
                throw MismatchedBudgets("efficiency_curve: logs mix strategies");
            }
            if (obs.loss && *obs.loss > threshold) ++count;
            cumulative[r][b] = static_cast<double>(count);
        }
    }

    EfficiencyCurve curve;
    curve.strategy = have_strategy ? strategy_name(strategy) : "random";
    curve.replicates = replicates;
    curve.budgets.resize(budget);
    curve.mean_failures.resize(budget);
    curve.std_error.resize(budget);
    for (std::size_t b = 0; b < budget; ++b) {
        curve.budgets[b] = b + 1;
        double mean = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) mean += cumulative[r][b];
        mean /= static_cast<double>(replicates);
        curve.mean_failures[b] = mean;
        double se = 0.0;
        if (replicates > 1) {
            double ss = 0.0;
            for (std::size_t r = 0; r < replicates; ++r) {
                const double dev = cumulative[r][b] - mean;
                ss += dev * dev;
            }
            se = std::sqrt(ss / static_cast<double>(replicates - 1)) /
                 std::sqrt(static_cast<double>(replicates));
        }
        curve.std_error[b] = se;
    }
    return curve;
}

double skew_report(const BoxStats& tp_stats, const BoxStats& fn_stats) {
    if (tp_stats.parameter_name != fn_stats.parameter_name)
        throw ParameterMismatch("skew_report: comparing '" + tp_stats.parameter_name + "' to '" +
                                fn_stats.parameter_name + "'");
    return fn_stats.median - tp_stats.median;
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string boxstats_csv(std::span<const BoxStats> stats) {
    std::ostringstream os;
    os << "parameter,group,n,min,q1,median,q3,max\n";
    for (const BoxStats& s : stats) {
        os << s.parameter_name << ',' << s.group << ',' << s.n << ',' << format_double(s.min)
           << ',' << format_double(s.q1) << ',' << format_double(s.median) << ','
           << format_double(s.q3) << ',' << format_double(s.max) << '\n';
    }
    return os.str();
}

std::string efficiency_csv(std::span<const EfficiencyCurve> curves) {
    std::ostringstream os;
    os << "strategy,budget,mean_failures,std_error,replicates\n";
    for (const EfficiencyCurve& c : curves) {
        for (std::size_t b = 0; b < c.budgets.size(); ++b) {
            os << c.strategy << ',' << c.budgets[b] << ',' << format_double(c.mean_failures[b])
               << ',' << format_double(c.std_error[b]) << ',' << c.replicates << '\n';
        }
    }
    return os.str();
}

std::string comparison_csv(const EfficiencyCurve& bo, const EfficiencyCurve& random) {
    if (bo.budgets.size() != random.budgets.size())
        throw MismatchedBudgets("comparison_csv: strategies ran different budgets");
    std::ostringstream os;
    os << "budget,mean_bo,se_bo,mean_random,se_random,ratio\n";
    for (std::size_t b = 0; b < bo.budgets.size(); ++b) {
        os << bo.budgets[b] << ',' << format_double(bo.mean_failures[b]) << ','
           << format_double(bo.std_error[b]) << ',' << format_double(random.mean_failures[b])
           << ',' << format_double(random.std_error[b]) << ',';
        const double denom = random.mean_failures[b];
        const double numer = bo.mean_failures[b];
        if (denom == 0.0 && numer == 0.0) {
            // 0/0: leave the cell empty
        } else if (denom == 0.0) {
            os << "inf";
        } else {
            os << format_double(numer / denom);
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace blindspot
