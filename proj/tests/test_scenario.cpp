#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sievelab/poissonized.hpp"
#include "sievelab/scenario.hpp"
#include "sievelab/sieve_engine.hpp"

using namespace sievelab;

namespace {

std::string minimal_theorem1() {
    return R"({
        "scenario": "theorem1",
        "family": {"p": 0.3, "q": 0.3,
                   "left": {"kind": "pareto", "alpha": 0.5},
                   "right": {"kind": "pareto", "alpha": 0.5}}
    })";
}

}  // namespace

TEST_CASE("scenario names round-trip") {
    for (const auto& name : scenario_names()) {
        CHECK(scenario_name(scenario_from_name(name)) == name);
    }
    CHECK_THROWS_AS(scenario_from_name("theorem4"), ValidationError);
}

TEST_CASE("minimal config fills defaults") {
    const auto cfg = parse_config(minimal_theorem1());
    CHECK(cfg.scenario == ScenarioKind::theorem1);
    CHECK(cfg.t_grid == std::vector<double>{6.0, 9.0, 12.0});
    CHECK(cfg.u_grid == std::vector<double>{1.0});
    CHECK(cfg.replicates == 20'000);
    CHECK(cfg.master_seed == 1);
}

TEST_CASE("invalid configs are rejected with useful errors") {
    // theorem1 outside the heavy-tail range
    const std::string bad_alpha = R"({
        "scenario": "theorem1",
        "family": {"p": 0.3, "q": 0.3,
                   "left": {"kind": "pareto", "alpha": 1.5},
                   "right": {"kind": "pareto", "alpha": 1.5}}
    })";
    CHECK_THROWS_WITH_AS(parse_config(bad_alpha),
                         doctest::Contains("alpha must be in (0,1)"), ValidationError);

    CHECK_THROWS_AS(parse_config(R"({"scenario": "theorem1", "scenario": "theorem2"})"),
                    ParseError);
    CHECK_THROWS_AS(parse_config("{not json"), ParseError);

    std::string unknown = minimal_theorem1();
    unknown.insert(unknown.rfind('}'), R"(, "extra_key": 1)");
    CHECK_THROWS_AS(parse_config(unknown), ValidationError);

    std::string bad_grid = minimal_theorem1();
    bad_grid.insert(bad_grid.rfind('}'), R"(, "t_grid": [9, 6])");
    CHECK_THROWS_AS(parse_config(bad_grid), ValidationError);

    // ball-count cap u*t <= 13
    std::string too_big = minimal_theorem1();
    too_big.insert(too_big.rfind('}'), R"(, "t_grid": [14], "u_grid": [2])");
    CHECK_THROWS_AS(parse_config(too_big), ValidationError);
}

TEST_CASE("single-replicate run equals direct module calls") {
    std::string text = minimal_theorem1();
    text.insert(text.rfind('}'),
                R"(, "t_grid": [3], "u_grid": [1], "replicates": 1,
                   "limit_samples": 200, "master_seed": 9)");
    const auto cfg = parse_config(text);
    const auto report = run_scenario(cfg, 1);
    REQUIRE(report.occupancy.size() == 1);

    const std::uint64_t seed = derive_seed(9, 0);
    const FactorFamily fam = cfg.family.build();
    Environment env(fam, derive_seed(seed, 0));
    RandomStream balls(derive_seed(seed, 1));
    const auto n = static_cast<std::uint64_t>(std::floor(std::exp(3.0)));
    const auto snap = simulate_occupancy(env, {n}, balls).front();
    CHECK(report.occupancy[0].n == snap.n);
    CHECK(report.occupancy[0].K == snap.K);
    CHECK(report.occupancy[0].M == snap.M);
    CHECK(report.occupancy[0].L == snap.L);
}

TEST_CASE("reports are identical across worker counts") {
    std::string text = minimal_theorem1();
    text.insert(text.rfind('}'),
                R"(, "t_grid": [3, 4], "u_grid": [1, 2], "replicates": 400,
                   "limit_samples": 500, "master_seed": 5)");
    const auto cfg = parse_config(text);
    const auto r1 = run_scenario(cfg, 1);
    const auto r4 = run_scenario(cfg, 4);
    CHECK(r1.to_json(false).dump() == r4.to_json(false).dump());
}

TEST_CASE("gap scenarios report decreasing trends deterministically") {
    const std::string text = R"({
        "scenario": "depoisson",
        "family": {"p": 0.3, "q": 0.3,
                   "left": {"kind": "pareto", "alpha": 0.5},
                   "right": {"kind": "pareto", "alpha": 0.5}},
        "t_grid": [3, 5], "u_grid": [1], "replicates": 300, "master_seed": 2
    })";
    const auto report = run_scenario(parse_config(text), 2);
    CHECK(report.occupancy.size() == 600);
    bool has_trend_row = false;
    for (const auto& t : report.tests) has_trend_row |= t.test == "gap_trend_decreasing";
    CHECK(has_trend_row);
}

TEST_CASE("report files land on disk with the declared schemas") {
    std::string text = minimal_theorem1();
    text.insert(text.rfind('}'),
                R"(, "t_grid": [3], "u_grid": [1], "replicates": 50,
                   "limit_samples": 200, "master_seed": 4)");
    const auto cfg = parse_config(text);
    const auto report = run_scenario(cfg, 1);

    const auto dir = std::filesystem::temp_directory_path() / "sievelab_report_test";
    std::filesystem::remove_all(dir);
    write_report(report, dir.string());

    auto first_line = [&](const char* name) {
        std::ifstream in(dir / name);
        REQUIRE(in);
        std::string line;
        std::getline(in, line);
        return line;
    };
    CHECK(first_line("occupancy.csv") == "scenario,t,u,replicate,n,K,M,L,statistic");
    CHECK(first_line("limits.csv") == "scenario,u,sample_index,value");
    CHECK(first_line("tests.csv") == "scenario,test,statistic,p_value,threshold,pass");

    std::ifstream occ(dir / "occupancy.csv");
    std::size_t rows = 0;
    for (std::string line; std::getline(occ, line);) ++rows;
    CHECK(rows == 1 + 50);  // header + replicates x grid points

    std::ifstream rep(dir / "report.json");
    std::stringstream buf;
    buf << rep.rdbuf();
    const auto doc = nlohmann::json::parse(buf.str());
    CHECK(doc.at("config") == cfg.to_json());
    CHECK(doc.at("tests").size() == report.tests.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("oracle scenario reports zero mismatches") {
    const std::string text = R"({
        "scenario": "oracle_equiv",
        "family": {"p": 0.3, "q": 0.3,
                   "left": {"kind": "pareto", "alpha": 0.5},
                   "right": {"kind": "pareto", "alpha": 0.5}},
        "t_grid": [1], "u_grid": [1], "replicates": 200, "master_seed": 6
    })";
    const auto report = run_scenario(parse_config(text), 1);
    CHECK(report.all_passed());
}
