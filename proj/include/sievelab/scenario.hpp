#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sievelab/factor_models.hpp"
#include "sievelab/stat_tests.hpp"

namespace sievelab {

enum class ScenarioKind {
    theorem1,
    theorem2,
    theorem3a,
    theorem3b1,
    theorem3b2,
    theorem3c1,
    theorem3c2,
    lemma_red,
    depoisson,
    oracle_equiv,
    limit_calibration
};

const std::vector<std::string>& scenario_names();
ScenarioKind scenario_from_name(const std::string& name);
std::string scenario_name(ScenarioKind kind);

struct FamilyConfig {
    double p = 0.0, q = 0.0, w0 = 0.5;
    TailSpec left = TailSpec::point_mass_at(1.0);
    TailSpec right = TailSpec::point_mass_at(1.0);

    FactorFamily build() const { return FactorFamily(p, q, left, right, w0); }
    nlohmann::json to_json() const;
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::theorem1;
    FamilyConfig family;
    std::vector<double> t_grid{6.0, 9.0, 12.0};
    std::vector<double> u_grid{1.0};
    std::uint64_t replicates = 20'000;
    std::uint64_t limit_samples = 50'000;
    std::uint64_t master_seed = 1;

    nlohmann::json to_json() const;
};

// JSON text -> validated config; unknown and duplicate keys are rejected
ScenarioConfig parse_config(const std::string& text);

struct TestRow {
    std::string test;
    double statistic = 0.0;
    double p_value = 1.0;
    double threshold = 0.0;
    bool pass = true;
};

struct OccupancyRow {
    double t = 0.0, u = 0.0;
    std::uint64_t replicate = 0;
    std::uint64_t n = 0, K = 0, M = 0, L = 0;
    double statistic = 0.0;
};

struct LimitRow {
    double u = 0.0;
    std::uint64_t sample_index = 0;
    double value = 0.0;
};

struct ScenarioReport {
    ScenarioConfig config;
    std::map<std::string, double> norming;  // exact constants used by the run
    std::vector<OccupancyRow> occupancy;
    std::vector<LimitRow> limits;
    std::vector<TestRow> tests;
    double wall_seconds = 0.0;
    std::string version = "sievelab 0.1";

    bool all_passed() const;
    nlohmann::json to_json(bool include_timing = true) const;
};

// deterministic given (config, master_seed), independent of worker count
ScenarioReport run_scenario(const ScenarioConfig& config, unsigned workers = 1);

// report.json, occupancy.csv, limits.csv, tests.csv under dir
void write_report(const ScenarioReport& report, const std::string& dir);

}  // namespace sievelab
