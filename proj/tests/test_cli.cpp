#include <doctest.h>

#include <json.hpp>

#include "blindspot/log_io.hpp"
#include "test_util.hpp"

using nlohmann::json;
using testutil::TempDir;
using testutil::read_file;
using testutil::run_cli;
using testutil::write_file;

namespace {

json base_config(const std::string& out_dir) {
    return json{
        {"target", {{"kind", "synthetic"}, {"oracle", "corner"}}},
        {"search",
         {{"strategy", "bo"},
          {"budget", 30},
          {"init_samples", 10},
          {"seed", 7},
          {"replicates", 1}}},
        {"gp", {{"fit_evals", 60}}},
        {"acquisition", {{"candidates", 128}}},
        {"output", {{"dir", out_dir}}},
    };
}

std::vector<std::string> loss_lines(const std::string& jsonl) {
    std::vector<std::string> out;
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        const json j = json::parse(line);
        if (j.value("type", "") == "config") continue;
        out.push_back(j.contains("loss") ? j.at("loss").dump() : "error");
    }
    return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("run produces logs, CSVs and exit 0") {
    TempDir tmp("cli_run");
    const auto out_dir = tmp.path() / "out";
    write_file(tmp.path() / "c.json", base_config(out_dir.string()).dump());

    const auto res = run_cli("run --config " + (tmp.path() / "c.json").string(), tmp.path());
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(out_dir / "bo_7.jsonl"));
    CHECK(std::filesystem::exists(out_dir / "boxstats.csv"));
    CHECK(std::filesystem::exists(out_dir / "efficiency.csv"));
    CHECK_FALSE(std::filesystem::exists(out_dir / "bo_7.jsonl.partial"));

    const auto log = blindspot::read_log_file(out_dir / "bo_7.jsonl");
    CHECK(log.observations.size() == 30);
    CHECK(log.config.at("search").at("seed") == 7);
}

TEST_CASE("flag overrides reach the config") {
    TempDir tmp("cli_override");
    const auto out_dir = tmp.path() / "out";
    write_file(tmp.path() / "c.json", base_config(out_dir.string()).dump());

    const auto res = run_cli("run --config " + (tmp.path() / "c.json").string() +
                                 " --strategy random --budget 12 --seed 9 --search.replicates 2",
                             tmp.path());
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(out_dir / "random_9.jsonl"));
    CHECK(std::filesystem::exists(out_dir / "random_10.jsonl"));
    CHECK(blindspot::read_log_file(out_dir / "random_9.jsonl").observations.size() == 12);
}

TEST_CASE("malformed config exits 2 without outputs") {
    TempDir tmp("cli_bad");
    const auto out_dir = tmp.path() / "out";
    write_file(tmp.path() / "c.json", "{ not json");
    const auto res = run_cli("run --config " + (tmp.path() / "c.json").string() +
                                 " --output-dir " + out_dir.string(),
                             tmp.path());
    CHECK(res.exit_code == 2);
    CHECK_FALSE(std::filesystem::exists(out_dir));
}

TEST_CASE("unknown target kind exits 2 and names the key") {
    TempDir tmp("cli_kind");
    json cfg = base_config((tmp.path() / "out").string());
    cfg["target"]["kind"] = "quantum";
    write_file(tmp.path() / "c.json", cfg.dump());
    const auto res = run_cli("run --config " + (tmp.path() / "c.json").string(), tmp.path());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("target.kind") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "out"));
}

TEST_CASE("bo budget below the initial design exits 2") {
    TempDir tmp("cli_budget");
    json cfg = base_config((tmp.path() / "out").string());
    cfg["search"]["budget"] = 5;
    write_file(tmp.path() / "c.json", cfg.dump());
    const auto res = run_cli("run --config " + (tmp.path() / "c.json").string(), tmp.path());
    CHECK(res.exit_code == 2);
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "out"));
}

TEST_CASE("two identical runs are byte-identical in losses and CSVs") {
    TempDir tmp("cli_det");
    const auto out_a = tmp.path() / "a";
    const auto out_b = tmp.path() / "b";
    json cfg = base_config(out_a.string());
    write_file(tmp.path() / "c.json", cfg.dump());

    REQUIRE(run_cli("run --config " + (tmp.path() / "c.json").string(), tmp.path()).exit_code ==
            0);
    REQUIRE(run_cli("run --config " + (tmp.path() / "c.json").string() + " --output-dir " +
                        out_b.string(),
                    tmp.path())
                .exit_code == 0);

    CHECK(loss_lines(read_file(out_a / "bo_7.jsonl")) ==
          loss_lines(read_file(out_b / "bo_7.jsonl")));
    CHECK(read_file(out_a / "boxstats.csv") == read_file(out_b / "boxstats.csv"));
    CHECK(read_file(out_a / "efficiency.csv") == read_file(out_b / "efficiency.csv"));
}

TEST_CASE("report reproduces run-time CSVs from the stored log") {
    TempDir tmp("cli_report");
    const auto out_dir = tmp.path() / "out";
    write_file(tmp.path() / "c.json", base_config(out_dir.string()).dump());
    REQUIRE(run_cli("run --config " + (tmp.path() / "c.json").string(), tmp.path()).exit_code ==
            0);

    const auto report_dir = tmp.path() / "report";
    const auto res = run_cli("report " + (out_dir / "bo_7.jsonl").string() + " --output-dir " +
                                 report_dir.string(),
                             tmp.path());
    CHECK(res.exit_code == 0);
    CHECK(read_file(report_dir / "boxstats.csv") == read_file(out_dir / "boxstats.csv"));
    CHECK(read_file(report_dir / "efficiency.csv") == read_file(out_dir / "efficiency.csv"));
    CHECK(res.output.find("skew") != std::string::npos);
}

TEST_CASE("report rejects empty and mismatched logs") {
    TempDir tmp("cli_report_bad");
    write_file(tmp.path() / "empty.jsonl", "");
    CHECK(run_cli("report " + (tmp.path() / "empty.jsonl").string(), tmp.path()).exit_code == 2);

    // two logs of the same strategy with different budgets
    const auto out_dir = tmp.path() / "out";
    json cfg = base_config(out_dir.string());
    cfg["search"]["strategy"] = "random";
    cfg["search"]["budget"] = 8;
    write_file(tmp.path() / "c8.json", cfg.dump());
    cfg["search"]["budget"] = 9;
    cfg["search"]["seed"] = 8;
    write_file(tmp.path() / "c9.json", cfg.dump());
    REQUIRE(run_cli("run --config " + (tmp.path() / "c8.json").string(), tmp.path()).exit_code ==
            0);
    REQUIRE(run_cli("run --config " + (tmp.path() / "c9.json").string(), tmp.path()).exit_code ==
            0);
    const auto res = run_cli("report " + (out_dir / "random_7.jsonl").string() + " " +
                                 (out_dir / "random_8.jsonl").string() + " --output-dir " +
                                 (tmp.path() / "rep").string(),
                             tmp.path());
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("random_8.jsonl") != std::string::npos);
}

TEST_CASE("compare writes per-strategy curves and the comparison table") {
    TempDir tmp("cli_compare");
    const auto out_dir = tmp.path() / "out";
    json cfg = base_config(out_dir.string());
    cfg["search"]["budget"] = 20;
    cfg["search"]["replicates"] = 1;
    write_file(tmp.path() / "c.json", cfg.dump());

    const auto res =
        run_cli("compare --config " + (tmp.path() / "c.json").string(), tmp.path());
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(out_dir / "random_7.jsonl"));
    CHECK(std::filesystem::exists(out_dir / "bo_7.jsonl"));
    CHECK(std::filesystem::exists(out_dir / "efficiency_random.csv"));
    CHECK(std::filesystem::exists(out_dir / "efficiency_bo.csv"));

    // replicates = 1: the standard-error columns are all zero
    const std::string cmp = read_file(out_dir / "comparison.csv");
    std::istringstream in(cmp);
    std::string line;
    std::getline(in, line);
    CHECK(line == "budget,mean_bo,se_bo,mean_random,se_random,ratio");
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() >= 5);
        CHECK(cells[2] == "0");
        CHECK(cells[4] == "0");
    }
}

TEST_CASE("oracle-info lists the built-in oracles") {
    TempDir tmp("cli_oracle");
    const auto res = run_cli("oracle-info", tmp.path());
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("corner") != std::string::npos);
    CHECK(res.output.find("pose_band") != std::string::npos);
    CHECK(res.output.find("mixed") != std::string::npos);
}

}  // TEST_SUITE(cli)
