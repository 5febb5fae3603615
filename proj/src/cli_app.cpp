#include "blindspot/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "blindspot/analysis.hpp"
#include "blindspot/config.hpp"
#include "blindspot/errors.hpp"
#include "blindspot/log_io.hpp"

namespace blindspot {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return j;
}

// Leftover tokens become dotted-path overrides: --search.budget 800
std::vector<std::pair<std::string, std::string>> parse_extras(
    const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0 || key.find('.') == std::string::npos)
            throw ConfigError("unrecognized argument '" + key +
                              "' (overrides look like --section.key value)");
        key = key.substr(2);
        std::string value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size())
                throw ConfigError("override '--" + key + "' is missing a value");
            value = extras[++i];
        }
        overrides.emplace_back(key, value);
    }
    return overrides;
}

struct ReplicateResult {
    std::uint64_t seed = 0;
    CampaignLog log;
    bool ok = false;
};

// Runs one strategy x replicates block, streaming each campaign to
// {strategy}_{seed}.jsonl (kept as .partial when the replicate aborts).
std::vector<ReplicateResult> run_replicates(const ResolvedConfig& cfg, Strategy strategy,
                                            const fs::path& out_dir) {
    std::vector<ReplicateResult> results;
    CampaignConfig campaign = cfg.campaign();
    campaign.search.strategy = strategy;

    for (std::size_t r = 0; r < cfg.search.replicates; ++r) {
        const std::uint64_t seed = cfg.search.seed + r;
        ReplicateResult result;
        result.seed = seed;

        // Each adapter instance is private to its replicate; the HTTP rate
        // limiter stays process-global by endpoint.
        RetryLogger retry_logger = [seed](const RetryEvent& ev) {
            std::fprintf(stderr, "[%llu] retry %d after %s (backoff %d ms)\n",
                         static_cast<unsigned long long>(seed), ev.attempt, ev.reason.c_str(),
                         ev.backoff_ms);
        };
        std::unique_ptr<Target> target = make_target(cfg.target, cfg.space, retry_logger);

        ResolvedConfig header_cfg = cfg;
        header_cfg.search.strategy = strategy;
        header_cfg.search.seed = seed;
        header_cfg.search.replicates = 1;

        const std::string base = strategy_name(strategy) + "_" + std::to_string(seed) + ".jsonl";
        const fs::path partial = out_dir / (base + ".partial");
        const fs::path final_path = out_dir / base;

        try {
            LogWriter writer(partial, header_cfg.to_json());
            result.log = run_campaign(campaign, *target, seed,
                                      [&](const Observation& obs) { writer.append(obs); });
            writer.close();
            fs::rename(partial, final_path);
            result.ok = true;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "[%llu] replicate aborted: %s\n",
                         static_cast<unsigned long long>(seed), e.what());
        }
        results.push_back(std::move(result));
    }
    return results;
}

std::vector<std::vector<Observation>> successful_logs(const std::vector<ReplicateResult>& results) {
    std::vector<std::vector<Observation>> logs;
    for (const ReplicateResult& r : results)
        if (r.ok) logs.push_back(r.log.observations);
    return logs;
}

// Pooled per-parameter TP/FN five-number summaries; groups with no
// observations are skipped.
std::vector<BoxStats> pooled_boxstats(const std::vector<std::vector<Observation>>& logs,
                                      const ParameterSpace& space) {
    std::vector<Observation> all;
    for (const auto& log : logs) all.insert(all.end(), log.begin(), log.end());
    const TpFnSplit split = split_tp_fn(all);
    std::vector<BoxStats> stats;
    for (const ParameterDef& p : space.params()) {
        if (!split.tp.empty()) stats.push_back(box_stats(split.tp, space, p.name, "true_positive"));
        if (!split.fn.empty())
            stats.push_back(box_stats(split.fn, space, p.name, "false_negative"));
    }
    return stats;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
}

void print_skew_summary(const std::vector<BoxStats>& stats) {
    std::map<std::string, const BoxStats*> tp, fn;
    for (const BoxStats& s : stats)
        (s.group == "true_positive" ? tp : fn)[s.parameter_name] = &s;
    std::cout << "skew (fn median - tp median, raw units):\n";
    for (const auto& [name, tp_stats] : tp) {
        const auto it = fn.find(name);
        if (it == fn.end()) continue;
        std::cout << "  " << name << ": " << format_double(skew_report(*tp_stats, *it->second))
                  << "\n";
    }
}

void warn_on_clamp_rate(const std::vector<ReplicateResult>& results) {
    for (const ReplicateResult& r : results) {
        if (!r.ok || r.log.posterior_points == 0) continue;
        const double rate = static_cast<double>(r.log.variance_clamps) /
                            static_cast<double>(r.log.posterior_points);
        if (rate > 0.01)
            std::fprintf(stderr,
                         "[%llu] warning: %.2f%% of posterior variances clamped at zero\n",
                         static_cast<unsigned long long>(r.seed), 100.0 * rate);
    }
}

int cmd_run(const ResolvedConfig& cfg) {
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);

    const std::vector<ReplicateResult> results =
        run_replicates(cfg, cfg.search.strategy, out_dir);
    const auto logs = successful_logs(results);
    warn_on_clamp_rate(results);

    if (!logs.empty()) {
        const std::vector<BoxStats> stats = pooled_boxstats(logs, cfg.space);
        write_file(out_dir / "boxstats.csv", boxstats_csv(stats));
        const EfficiencyCurve curve = efficiency_curve(logs, cfg.search.failure_threshold);
        write_file(out_dir / "efficiency.csv", efficiency_csv({&curve, 1}));
        print_skew_summary(stats);
        std::cout << "failures after " << curve.budgets.size() << " evaluations: mean "
                  << format_double(curve.mean_failures.empty() ? 0.0
                                                               : curve.mean_failures.back())
                  << " over " << curve.replicates << " replicate(s)\n";
    }
    return logs.size() == results.size() ? kExitOk : kExitAborted;
}

int cmd_compare(const ResolvedConfig& cfg) {
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);

    // Both strategies run the same replicate seed list for a paired
    // comparison.
    const auto random_results = run_replicates(cfg, Strategy::random, out_dir);
    const auto bo_results = run_replicates(cfg, Strategy::bo, out_dir);
    warn_on_clamp_rate(bo_results);

    const auto random_logs = successful_logs(random_results);
    const auto bo_logs = successful_logs(bo_results);
    if (random_logs.empty() || bo_logs.empty()) {
        std::fprintf(stderr, "compare: one strategy produced no successful replicates\n");
        return kExitAborted;
    }

    const EfficiencyCurve random_curve =
        efficiency_curve(random_logs, cfg.search.failure_threshold);
    const EfficiencyCurve bo_curve = efficiency_curve(bo_logs, cfg.search.failure_threshold);
    write_file(out_dir / "efficiency_random.csv", efficiency_csv({&random_curve, 1}));
    write_file(out_dir / "efficiency_bo.csv", efficiency_csv({&bo_curve, 1}));
    write_file(out_dir / "comparison.csv", comparison_csv(bo_curve, random_curve));

    const double bo_final = bo_curve.mean_failures.empty() ? 0.0 : bo_curve.mean_failures.back();
    const double random_final =
        random_curve.mean_failures.empty() ? 0.0 : random_curve.mean_failures.back();
    std::cout << "final mean failures: bo " << format_double(bo_final) << ", random "
              << format_double(random_final);
    if (random_final > 0.0)
        std::cout << ", ratio " << format_double(bo_final / random_final);
    std::cout << "\n";

    const bool all_ok = random_logs.size() == random_results.size() &&
                        bo_logs.size() == bo_results.size();
    return all_ok ? kExitOk : kExitAborted;
}

int cmd_report(const std::vector<std::string>& log_paths, const std::string& output_dir) {
    std::vector<LoadedLog> logs;
    for (const std::string& p : log_paths) logs.push_back(read_log_file(p));

    // All logs must describe the same parameter space.
    const json first_params = logs.front().config.at("parameters");
    for (std::size_t i = 1; i < logs.size(); ++i)
        if (logs[i].config.at("parameters") != first_params)
            throw ConfigError(log_paths[i] + ": parameter space differs from " + log_paths[0]);

    std::vector<ParameterDef> defs;
    for (const json& p : first_params)
        defs.push_back({p.at("name").get<std::string>(), p.at("min").get<double>(),
                        p.at("max").get<double>(), p.value("units", "")});
    const ParameterSpace space{defs};
    const double threshold =
        logs.front().config.at("search").value("failure_threshold", 0.5);

    // Efficiency curves per strategy; budgets must agree within a strategy.
    std::map<std::string, std::vector<std::vector<Observation>>> by_strategy;
    std::map<std::string, std::size_t> first_of_strategy;
    std::vector<std::vector<Observation>> all_logs;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        if (logs[i].observations.empty())
            throw ConfigError(log_paths[i] + ": log contains no observations");
        const std::string strat = strategy_name(logs[i].observations.front().strategy);
        auto [it, inserted] = first_of_strategy.try_emplace(strat, i);
        if (!inserted) {
            const std::size_t expected = logs[it->second].observations.size();
            if (logs[i].observations.size() != expected)
                throw ConfigError(log_paths[i] + ": budget " +
                                  std::to_string(logs[i].observations.size()) +
                                  " does not match " + log_paths[it->second] + " (" +
                                  std::to_string(expected) + ")");
        }
        by_strategy[strat].push_back(logs[i].observations);
        all_logs.push_back(logs[i].observations);
    }

    const fs::path out_dir(output_dir);
    fs::create_directories(out_dir);

    const std::vector<BoxStats> stats = pooled_boxstats(all_logs, space);
    write_file(out_dir / "boxstats.csv", boxstats_csv(stats));

    std::vector<EfficiencyCurve> curves;
    for (const auto& [strat, group] : by_strategy)
        curves.push_back(efficiency_curve(group, threshold));
    write_file(out_dir / "efficiency.csv", efficiency_csv(curves));

    print_skew_summary(stats);
    return kExitOk;
}

int cmd_oracle_info() {
    std::cout
        << "built-in synthetic oracles (thresholds over the default six-axis space):\n"
        << "  corner     deterministic  fails iff skin_type unit >= 0.8 and skin_age unit >= "
           "0.7; failure volume 0.06\n"
        << "  pose_band  deterministic  fails iff |head_pitch| >= 60 deg or |head_yaw| >= 100 "
           "deg\n"
        << "  mixed      stochastic     P(fail) = sigmoid(8*(skin_type_unit - 0.7) + "
           "6*(skin_age_unit - 0.6)); Bernoulli draw is seeded by (seed, quantized theta) and "
           "replays identically\n";
    return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"black-box failure-discovery toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string strategy;
    std::int64_t budget = -1;
    std::int64_t seed = -1;
    std::int64_t replicates = -1;
    std::vector<std::string> log_paths;
    std::string report_output = "./out";

    CLI::App* run = app.add_subcommand("run", "run one strategy's campaign set");
    run->add_option("--config", config_path, "campaign config JSON")->required();
    run->add_option("--output-dir", output_dir, "overrides output.dir");
    run->add_option("--strategy", strategy, "overrides search.strategy");
    run->add_option("--budget", budget, "overrides search.budget");
    run->add_option("--seed", seed, "overrides search.seed");
    run->add_option("--replicates", replicates, "overrides search.replicates");
    run->allow_extras();

    CLI::App* compare =
        app.add_subcommand("compare", "run random and bo with the same replicate seeds");
    compare->add_option("--config", config_path, "campaign config JSON")->required();
    compare->add_option("--output-dir", output_dir, "overrides output.dir");
    compare->add_option("--budget", budget, "overrides search.budget");
    compare->add_option("--seed", seed, "overrides search.seed");
    compare->add_option("--replicates", replicates, "overrides search.replicates");
    compare->allow_extras();

    CLI::App* report = app.add_subcommand("report", "recompute CSVs from stored logs");
    report->add_option("logs", log_paths, "campaign JSONL logs")->required();
    report->add_option("--output-dir", report_output, "directory for recomputed CSVs");

    CLI::App* oracle_info = app.add_subcommand("oracle-info", "describe built-in oracles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (oracle_info->parsed()) return cmd_oracle_info();
        if (report->parsed()) return cmd_report(log_paths, report_output);

        CLI::App* active = run->parsed() ? run : compare;
        json raw = load_config_file(config_path);
        std::vector<std::pair<std::string, std::string>> overrides =
            parse_extras(active->remaining());
        if (!strategy.empty()) overrides.emplace_back("search.strategy", strategy);
        if (budget >= 0) overrides.emplace_back("search.budget", std::to_string(budget));
        if (seed >= 0) overrides.emplace_back("search.seed", std::to_string(seed));
        if (replicates >= 0)
            overrides.emplace_back("search.replicates", std::to_string(replicates));
        if (!output_dir.empty()) overrides.emplace_back("output.dir", output_dir);
        raw = apply_overrides(raw, overrides);

        const ResolvedConfig cfg = parse_config(raw);
        return run->parsed() ? cmd_run(cfg) : cmd_compare(cfg);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

}  // namespace blindspot
