#include "sievelab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "sievelab/limit_processes.hpp"
#include "sievelab/poissonized.hpp"
#include "sievelab/sieve_engine.hpp"

namespace sievelab {

namespace {

using nlohmann::json;

constexpr double kMaxLogBalls = 13.0;  // scenarios cap u*t, so n <= ~4.5e5

double normal_cdf(double x, double variance) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * variance));
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// --- config plumbing ------------------------------------------------------

const std::map<std::string, ScenarioKind>& scenario_map() {
    static const std::map<std::string, ScenarioKind> m = {
        {"theorem1", ScenarioKind::theorem1},
        {"theorem2", ScenarioKind::theorem2},
        {"theorem3a", ScenarioKind::theorem3a},
        {"theorem3b1", ScenarioKind::theorem3b1},
        {"theorem3b2", ScenarioKind::theorem3b2},
        {"theorem3c1", ScenarioKind::theorem3c1},
        {"theorem3c2", ScenarioKind::theorem3c2},
        {"lemma_red", ScenarioKind::lemma_red},
        {"depoisson", ScenarioKind::depoisson},
        {"oracle_equiv", ScenarioKind::oracle_equiv},
        {"limit_calibration", ScenarioKind::limit_calibration},
    };
    return m;
}

// SAX pass that only checks for duplicate object keys
struct DuplicateKeyChecker : json::json_sax_t {
    std::vector<std::set<std::string>> stack;
    std::string duplicate;

    bool key(string_t& val) override {
        if (!stack.empty() && !stack.back().insert(val).second) duplicate = val;
        return duplicate.empty();
    }
    bool start_object(std::size_t) override {
        stack.emplace_back();
        return true;
    }
    bool end_object() override {
        stack.pop_back();
        return true;
    }
    bool null() override { return true; }
    bool boolean(bool) override { return true; }
    bool number_integer(number_integer_t) override { return true; }
    bool number_unsigned(number_unsigned_t) override { return true; }
    bool number_float(number_float_t, const string_t&) override { return true; }
    bool string(string_t&) override { return true; }
    bool binary(binary_t&) override { return true; }
    bool start_array(std::size_t) override { return true; }
    bool end_array() override { return true; }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex)
        override {
        throw ParseError(ex.what());
    }
};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ValidationError("unknown key at " + path + "." + key);
        }
    }
}

TailSpec parse_tailspec(const json& obj, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path + " must be an object");
    reject_unknown_keys(obj, {"kind", "alpha", "value"}, path);
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "pareto") return TailSpec::pareto(obj.at("alpha").get<double>());
    if (kind == "pareto2_logvariance") return TailSpec::pareto2_logvariance();
    if (kind == "slow_logtail") return TailSpec::slow_logtail();
    if (kind == "slow_loglogtail") return TailSpec::slow_loglogtail();
    if (kind == "point_mass") return TailSpec::point_mass_at(obj.at("value").get<double>());
    throw ValidationError(path + ".kind: unknown tail kind '" + kind + "'");
}

json tailspec_json(const TailSpec& spec) {
    switch (spec.kind) {
        case TailKind::pareto:
            return {{"kind", "pareto"}, {"alpha", spec.alpha}};
        case TailKind::pareto2_logvariance:
            return {{"kind", "pareto2_logvariance"}};
        case TailKind::slow_logtail:
            return {{"kind", "slow_logtail"}};
        case TailKind::slow_loglogtail:
            return {{"kind", "slow_loglogtail"}};
        case TailKind::point_mass:
            return {{"kind", "point_mass"}, {"value", spec.value}};
    }
    return {};
}

bool is_sieve_scenario(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::oracle_equiv:
        case ScenarioKind::limit_calibration:
            return false;
        default:
            return true;
    }
}

void validate_scenario_family(const ScenarioConfig& cfg) {
    const auto& fam = cfg.family;
    const FactorFamily built = fam.build();  // throws on inconsistent weights
    const TailProfile pr = built.profile();
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ValidationError(msg);
    };
    switch (cfg.scenario) {
        case ScenarioKind::theorem1:
            require(fam.p > 0.0 && fam.q > 0.0, "family: theorem1 needs p > 0 and q > 0");
            require(fam.left.kind == TailKind::pareto && fam.right.kind == TailKind::pareto,
                    "family: theorem1 needs pareto branch tails");
            require(pr.alpha > 0.0 && pr.alpha < 1.0, "family.left.alpha: alpha must be in (0,1)");
            require(pr.alpha == pr.beta, "family: theorem1 needs equal left/right tail indexes");
            break;
        case ScenarioKind::theorem2:
            require(fam.p > 0.0 && fam.q > 0.0, "family: theorem2 needs p > 0 and q > 0");
            require(fam.left.kind == TailKind::pareto && pr.alpha < 1.0,
                    "family.left: theorem2 needs pareto alpha in (0,1)");
            require(pr.beta <= pr.alpha, "family.right: theorem2 needs beta <= alpha");
            require(pr.beta < pr.alpha,
                    "family: the alpha == beta subcase of theorem2 is not supported");
            break;
        case ScenarioKind::theorem3a:
            require(std::isfinite(pr.mu) && std::isfinite(pr.sigma2),
                    "family: theorem3a needs finite mean and variance of log W");
            require(fam.q > 0.0 && pr.beta < 1.0,
                    "family.right: theorem3a needs a tail index in [0,1)");
            break;
        case ScenarioKind::theorem3b1:
            require(fam.left.kind == TailKind::pareto2_logvariance,
                    "family.left: case (b) needs the pareto2_logvariance tail");
            require(fam.q > 0.0 && fam.right.kind == TailKind::pareto && pr.beta < 1.0,
                    "family.right: case (b1) needs pareto beta in (0,1)");
            break;
        case ScenarioKind::theorem3b2:
            require(fam.left.kind == TailKind::pareto2_logvariance,
                    "family.left: case (b) needs the pareto2_logvariance tail");
            require(fam.q > 0.0 && fam.right.kind == TailKind::slow_loglogtail,
                    "family.right: case (b2) needs the slow_loglogtail branch");
            break;
        case ScenarioKind::theorem3c1:
            require(fam.left.kind == TailKind::pareto && pr.alpha > 1.0 && pr.alpha < 2.0,
                    "family.left: case (c) needs pareto alpha in (1,2)");
            require(fam.q == 0.0 || pr.beta > 2.0 / pr.alpha - 1.0,
                    "family.right: case (c1) needs beta > 2/alpha - 1");
            break;
        case ScenarioKind::theorem3c2:
            require(fam.left.kind == TailKind::pareto && pr.alpha > 1.0 && pr.alpha < 2.0,
                    "family.left: case (c) needs pareto alpha in (1,2)");
            require(fam.q > 0.0 && pr.beta < 2.0 / pr.alpha - 1.0,
                    "family.right: case (c2) needs beta < 2/alpha - 1");
            break;
        default:
            break;
    }
    if (is_sieve_scenario(cfg.scenario)) {
        const double u_max = cfg.u_grid.empty() ? 1.0 : cfg.u_grid.back();
        const double t_max = cfg.t_grid.empty() ? 0.0 : cfg.t_grid.back();
        if (u_max * t_max > kMaxLogBalls) {
            throw ValidationError("t_grid/u_grid: u*t must stay below " +
                                  fmt(kMaxLogBalls) + " (ball-count cap)");
        }
    }
}

// --- deterministic replicate parallelism ----------------------------------

template <typename F>
void parallel_for(std::uint64_t n, unsigned workers, F&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto body = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
}

// --- shared sieve collection ----------------------------------------------

// L values (and snapshots) per (t, u) over all replicates, coupled within a
// replicate across the u grid
struct SieveSamples {
    // indexed [t_index][u_index][replicate]
    std::vector<std::vector<std::vector<OccupancySnapshot>>> snaps;
};

SieveSamples collect_sieve(const ScenarioConfig& cfg, const FactorFamily& family,
                           unsigned workers) {
    SieveSamples out;
    out.snaps.resize(cfg.t_grid.size());
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        const double t = cfg.t_grid[ti];
        std::vector<std::uint64_t> n_grid;
        for (double u : cfg.u_grid) {
            const auto n = static_cast<std::uint64_t>(std::floor(std::exp(u * t)));
            if (!n_grid.empty() && n <= n_grid.back()) {
                throw ValidationError("u_grid collapses to duplicate ball counts at t=" +
                                      fmt(t));
            }
            n_grid.push_back(n);
        }
        auto& slot = out.snaps[ti];
        slot.assign(cfg.u_grid.size(),
                    std::vector<OccupancySnapshot>(cfg.replicates));
        parallel_for(cfg.replicates, workers, [&](std::uint64_t rep) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, rep);
            Environment env(family, derive_seed(seed, 0));
            RandomStream balls(derive_seed(seed, 1));
            const auto snaps = simulate_occupancy(env, n_grid, balls);
            for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
                slot[ui][rep] = snaps[ui];
            }
        });
    }
    return out;
}

void emit_occupancy_rows(ScenarioReport& report, const ScenarioConfig& cfg,
                         const SieveSamples& sieve,
                         const std::function<double(const OccupancySnapshot&, double, double)>&
                             statistic) {
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
            for (std::uint64_t rep = 0; rep < cfg.replicates; ++rep) {
                const auto& s = sieve.snaps[ti][ui][rep];
                report.occupancy.push_back({cfg.t_grid[ti], cfg.u_grid[ui], rep, s.n, s.K,
                                            s.M, s.L,
                                            statistic(s, cfg.t_grid[ti], cfg.u_grid[ui])});
            }
        }
    }
}

std::vector<std::uint64_t> l_values(const SieveSamples& sieve, std::size_t ti,
                                    std::size_t ui) {
    std::vector<std::uint64_t> out;
    out.reserve(sieve.snaps[ti][ui].size());
    for (const auto& s : sieve.snaps[ti][ui]) out.push_back(s.L);
    return out;
}

// --- scenario runners -----------------------------------------------------

constexpr std::size_t kGeomSupport = 40;

// statistical machinery needs minimum sample/bin counts; tiny smoke configs
// still get a report, with the affected check marked failed
template <typename Fn>
void guarded_test(ScenarioReport& report, const std::string& name, double threshold, Fn&& fn) {
    try {
        fn();
    } catch (const DegenerateBinsError&) {
        report.tests.push_back({name + "_unavailable", 0.0, 0.0, threshold, false});
    } catch (const TooFewSamplesError&) {
        report.tests.push_back({name + "_unavailable", 0.0, 0.0, threshold, false});
    }
}

void run_theorem1(const ScenarioConfig& cfg, const FactorFamily& family, unsigned workers,
                  ScenarioReport& report) {
    const TailProfile pr = family.profile();
    const double c = pr.c_ratio;
    report.norming["c"] = c;
    const auto sieve = collect_sieve(cfg, family, workers);
    emit_occupancy_rows(report, cfg, sieve,
                        [](const OccupancySnapshot& s, double, double) {
                            return static_cast<double>(s.L);
                        });

    // limit side: coupled R over the u grid
    std::vector<std::vector<std::uint64_t>> r_joint(
        cfg.u_grid.size(), std::vector<std::uint64_t>(cfg.limit_samples));
    parallel_for(cfg.limit_samples, workers, [&](std::uint64_t i) {
        RandomStream rng(derive_seed(cfg.master_seed ^ 0x52aabbccULL, i));
        const auto counts = sample_R_joint(pr.alpha, c, cfg.u_grid, rng);
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) r_joint[ui][i] = counts[ui];
    });
    for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
        for (std::uint64_t i = 0; i < cfg.limit_samples; ++i) {
            report.limits.push_back({cfg.u_grid[ui], i, static_cast<double>(r_joint[ui][i])});
        }
    }

    const DiscretePMF geom = geometric_pmf(c, kGeomSupport);
    const std::size_t t_last = cfg.t_grid.size() - 1;
    for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
        std::vector<double> tvs;
        for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
            const auto l = l_values(sieve, ti, ui);
            const double tv = tv_distance(empirical_pmf(l, kGeomSupport), geom);
            tvs.push_back(tv);
            const bool last = ti == t_last;
            report.tests.push_back({"tv_L_vs_geometric(t=" + fmt(cfg.t_grid[ti]) +
                                        ",u=" + fmt(cfg.u_grid[ui]) + ")",
                                    tv, 0.0, 0.15, !last || tv < 0.15});
            if (last) {
                const std::string name = "chi2_L_vs_geometric(t=" + fmt(cfg.t_grid[ti]) +
                                         ",u=" + fmt(cfg.u_grid[ui]) + ")";
                guarded_test(report, name, 0.001, [&] {
                    const auto chi = chi2_gof(l, geom);
                    report.tests.push_back(
                        {name, chi.statistic, chi.p_value, 0.001, chi.p_value > 0.001});
                });
            }
        }
        bool decreasing = true;
        for (std::size_t i = 1; i < tvs.size(); ++i) decreasing &= tvs[i] < tvs[i - 1];
        if (tvs.size() > 1) {
            report.tests.push_back({"tv_decreasing(u=" + fmt(cfg.u_grid[ui]) + ")",
                                    tvs.back(), 0.0, 0.0, decreasing});
        }
    }

    // joint f.d.d. against the limit pairs, coarse 2d encoding
    if (cfg.u_grid.size() >= 2) {
        static constexpr std::uint64_t kJointCap = 12;
        auto encode = [](std::uint64_t a, std::uint64_t b) {
            return std::min(a, kJointCap) * (kJointCap + 1) + std::min(b, kJointCap);
        };
        std::vector<std::uint64_t> sieve_pairs, limit_pairs;
        for (std::uint64_t rep = 0; rep < cfg.replicates; ++rep) {
            sieve_pairs.push_back(encode(sieve.snaps[t_last][0][rep].L,
                                         sieve.snaps[t_last][1][rep].L));
        }
        for (std::uint64_t i = 0; i < cfg.limit_samples; ++i) {
            limit_pairs.push_back(encode(r_joint[0][i], r_joint[1][i]));
        }
        guarded_test(report, "joint_chi2_sieve_vs_R", 0.001, [&] {
            const auto chi = chi2_two_sample(sieve_pairs, limit_pairs);
            report.tests.push_back({"joint_chi2_sieve_vs_R", chi.statistic, chi.p_value,
                                    0.001, chi.p_value > 0.001});
        });
    }
}

void run_theorem2(const ScenarioConfig& cfg, const FactorFamily& family, unsigned workers,
                  ScenarioReport& report) {
    const TailProfile pr = family.profile();
    const auto sieve = collect_sieve(cfg, family, workers);
    emit_occupancy_rows(report, cfg, sieve,
                        [&](const OccupancySnapshot& s, double t, double) {
                            return family.theorem2_ratio(t) * static_cast<double>(s.L);
                        });
    for (double t : cfg.t_grid) {
        report.norming["ratio(t=" + fmt(t) + ")"] = family.theorem2_ratio(t);
    }

    std::vector<std::vector<double>> w_draws(cfg.u_grid.size(),
                                             std::vector<double>(cfg.limit_samples));
    parallel_for(cfg.limit_samples, workers, [&](std::uint64_t i) {
        RandomStream rng(derive_seed(cfg.master_seed ^ 0x7e22aa01ULL, i));
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
            w_draws[ui][i] =
                sample_frac_integral_inverse(pr.alpha, pr.beta, cfg.u_grid[ui], rng);
        }
    });
    for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
        for (std::uint64_t i = 0; i < cfg.limit_samples; ++i) {
            report.limits.push_back({cfg.u_grid[ui], i, w_draws[ui][i]});
        }
    }

    const std::size_t t_last = cfg.t_grid.size() - 1;
    const double t_max = cfg.t_grid[t_last];
    for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
        std::vector<double> stats;
        stats.reserve(cfg.replicates);
        const double ratio = family.theorem2_ratio(t_max);
        for (const auto& s : sieve.snaps[t_last][ui]) {
            stats.push_back(ratio * static_cast<double>(s.L));
        }
        double mean_sieve = 0.0, mean_limit = 0.0;
        for (double x : stats) mean_sieve += x;
        for (double x : w_draws[ui]) mean_limit += x;
        mean_sieve /= static_cast<double>(stats.size());
        mean_limit /= static_cast<double>(w_draws[ui].size());
        const double rel = std::fabs(mean_sieve - mean_limit) / mean_limit;
        report.tests.push_back({"mean_rel_error(u=" + fmt(cfg.u_grid[ui]) + ")", rel, 0.0,
                                0.15, rel < 0.15});
        const std::string ks_name = "ks_sieve_vs_limit(u=" + fmt(cfg.u_grid[ui]) + ")";
        guarded_test(report, ks_name, 0.2, [&] {
            const auto ks = ks_two_sample(stats, w_draws[ui]);
            report.tests.push_back(
                {ks_name, ks.statistic, ks.p_value, 0.2, ks.statistic < 0.2});
        });
    }
}

void run_theorem3(const ScenarioConfig& cfg, const FactorFamily& family, unsigned workers,
                  ScenarioReport& report, TheoremCase which) {
    const TailProfile pr = family.profile();
    report.norming["mu"] = pr.mu;
    report.norming["sigma2"] = pr.sigma2;
    for (double t : cfg.t_grid) {
        report.norming["q(t=" + fmt(t) + ")"] = family.norming_q(t);
        if (which == TheoremCase::t3b2) {
            report.norming["g(t=" + fmt(t) + ")"] = family.norming_g(t, Theorem3Case::b2);
        } else if (which == TheoremCase::t3c2) {
            report.norming["g(t=" + fmt(t) + ")"] = family.norming_g(t, Theorem3Case::c2);
        } else if (which == TheoremCase::t3a) {
            report.norming["g(t=" + fmt(t) + ")"] = family.norming_g(t, Theorem3Case::a);
        }
    }
    const auto sieve = collect_sieve(cfg, family, workers);
    emit_occupancy_rows(report, cfg, sieve,
                        [&](const OccupancySnapshot& s, double t, double u) {
                            return centered_L_statistic(static_cast<double>(s.L), family,
                                                        which, t, u);
                        });

    const bool gaussian_limit = which == TheoremCase::t3a || which == TheoremCase::t3b1 ||
                                which == TheoremCase::t3c1;
    const std::size_t t_last = cfg.t_grid.size() - 1;
    if (gaussian_limit) {
        const double beta = std::isfinite(pr.beta) ? pr.beta : 0.0;
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
            const double u = cfg.u_grid[ui];
            const double variance = std::pow(u, 1.0 - beta);  // E V(u)^2
            std::vector<double> kss;
            for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
                std::vector<double> stats;
                for (const auto& s : sieve.snaps[ti][ui]) {
                    stats.push_back(centered_L_statistic(static_cast<double>(s.L), family,
                                                         which, cfg.t_grid[ti], u));
                }
                const std::string name =
                    "ks_vs_normal(t=" + fmt(cfg.t_grid[ti]) + ",u=" + fmt(u) + ")";
                guarded_test(report, name, 0.15, [&] {
                    const double d = ks_distance(
                        std::move(stats), [&](double x) { return normal_cdf(x, variance); });
                    kss.push_back(d);
                    const bool last = ti == t_last;
                    report.tests.push_back({name, d, 0.0, 0.15, !last || d < 0.15});
                });
            }
            bool decreasing = true;
            for (std::size_t i = 1; i < kss.size(); ++i) decreasing &= kss[i] < kss[i - 1];
            if (kss.size() > 1) {
                report.tests.push_back(
                    {"ks_decreasing(u=" + fmt(u) + ")", kss.back(), 0.0, 0.0, decreasing});
            }
        }
    } else {
        // b2/c2: sieve-side convergence is glacial; the comparison with the
        // simulated limit is reported but does not gate
        const Driver driver = which == TheoremCase::t3b2 ? Driver::brownian : Driver::stable;
        const double beta = std::isfinite(pr.beta) ? pr.beta : 0.0;
        for (std::size_t ui = 0; ui < cfg.u_grid.size(); ++ui) {
            const double u = cfg.u_grid[ui];
            std::vector<double> limit_draws(cfg.limit_samples);
            parallel_for(cfg.limit_samples, workers, [&](std::uint64_t i) {
                RandomStream rng(derive_seed(cfg.master_seed ^ 0x91f00baaULL,
                                             i + ui * cfg.limit_samples));
                limit_draws[i] =
                    sample_frac_integral_levy(driver, pr.alpha, beta, u, 1e-3 * u, rng);
            });
            for (std::uint64_t i = 0; i < cfg.limit_samples; ++i) {
                report.limits.push_back({u, i, limit_draws[i]});
            }
            std::vector<double> stats;
            for (const auto& s : sieve.snaps[t_last][ui]) {
                stats.push_back(centered_L_statistic(static_cast<double>(s.L), family, which,
                                                     cfg.t_grid[t_last], u));
            }
            guarded_test(report, "info_ks_sieve_vs_limit(u=" + fmt(u) + ")", 0.0, [&] {
                const auto ks = ks_two_sample(std::move(stats), std::move(limit_draws));
                report.tests.push_back({"info_ks_sieve_vs_limit(u=" + fmt(u) + ")",
                                        ks.statistic, ks.p_value, 0.0, true});
            });
        }
    }
}

void run_gap_scenario(const ScenarioConfig& cfg, const FactorFamily& family, unsigned workers,
                      ScenarioReport& report, bool poissonization) {
    const TailProfile pr = family.profile();
    std::vector<std::vector<std::int64_t>> gaps(cfg.t_grid.size(),
                                                std::vector<std::int64_t>(cfg.replicates));
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        const double t = cfg.t_grid[ti];
        parallel_for(cfg.replicates, workers, [&](std::uint64_t rep) {
            const std::uint64_t seed = derive_seed(cfg.master_seed, rep);
            Environment env(family, derive_seed(seed, 0));
            RandomStream balls(derive_seed(seed, 1));
            gaps[ti][rep] = poissonization ? poissonization_gap(env, t, balls)
                                           : depoisson_gap(env, std::exp(t), balls);
        });
        for (std::uint64_t rep = 0; rep < cfg.replicates; ++rep) {
            report.occupancy.push_back({t, 1.0, rep,
                                        static_cast<std::uint64_t>(std::exp(t)), 0, 0, 0,
                                        static_cast<double>(gaps[ti][rep])});
        }
    }
    std::vector<double> trend;
    for (std::size_t ti = 0; ti < cfg.t_grid.size(); ++ti) {
        double acc = 0.0;
        std::uint64_t nonzero = 0, big = 0;
        for (auto g : gaps[ti]) {
            acc += std::fabs(static_cast<double>(g));
            if (g != 0) ++nonzero;
            if (std::llabs(g) > 25) ++big;
        }
        const double n = static_cast<double>(cfg.replicates);
        const double value = poissonization ? acc / n : static_cast<double>(nonzero) / n;
        trend.push_back(value);
        report.tests.push_back({std::string(poissonization ? "mean_abs_gap" : "p_gap_nonzero") +
                                    "(t=" + fmt(cfg.t_grid[ti]) + ")",
                                value, 0.0, 0.0, true});
        if (poissonization && std::isfinite(pr.mu)) {
            const double p_big = static_cast<double>(big) / n;
            report.tests.push_back({"p_abs_gap_gt25(t=" + fmt(cfg.t_grid[ti]) + ")", p_big,
                                    0.0, 0.05, p_big < 0.05});
        }
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < trend.size(); ++i) decreasing &= trend[i] < trend[i - 1];
    if (trend.size() > 1) {
        report.tests.push_back({"gap_trend_decreasing", trend.back(), 0.0, 0.0, decreasing});
    }
}

void run_oracle_equiv(const ScenarioConfig& cfg, const FactorFamily& family, unsigned workers,
                      ScenarioReport& report) {
    std::vector<std::uint8_t> ok(cfg.replicates, 0);
    parallel_for(cfg.replicates, workers, [&](std::uint64_t rep) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, rep);
        RandomStream wrng(derive_seed(seed, 0));
        RandomStream balls(derive_seed(seed, 1));
        const std::size_t n = 1 + wrng.next_u64() % 50;

        std::vector<double> u_list;
        RandomStream balls_for_sim = balls;  // identical draw sequence
        for (std::size_t i = 0; i < n; ++i) u_list.push_back(balls.uniform());
        const double u_min = *std::min_element(u_list.begin(), u_list.end());

        std::vector<double> w_list;
        double product = 1.0;
        while (product >= u_min) {
            w_list.push_back(family.sample_factor(wrng));
            product *= w_list.back();
        }
        const auto expect = occupancy_oracle(w_list, u_list);

        Environment env = Environment::from_factors(family, derive_seed(seed, 2), w_list);
        const auto got = simulate_occupancy(env, {n}, balls_for_sim).front();
        ok[rep] = expect == got ? 1 : 0;
    });
    std::uint64_t failures = 0;
    for (auto v : ok) failures += v == 0;
    report.tests.push_back({"oracle_equivalence_failures", static_cast<double>(failures), 0.0,
                            0.0, failures == 0});
}

void run_limit_calibration(const ScenarioConfig& cfg, const FactorFamily& family,
                           unsigned workers, ScenarioReport& report) {
    const TailProfile pr = family.profile();
    const double alpha = (pr.alpha > 0.0 && pr.alpha < 1.0) ? pr.alpha : 0.5;
    const std::uint64_t n = cfg.limit_samples;

    // subordinator Laplace transform at t = 1
    std::vector<double> x1(n);
    parallel_for(n, workers, [&](std::uint64_t i) {
        RandomStream rng(derive_seed(cfg.master_seed ^ 0x11aa22bbULL, i));
        x1[i] = std::pow(std::tgamma(1.0 - alpha), 1.0 / alpha) *
                sample_positive_stable(alpha, rng);
    });
    for (double z : {0.5, 1.0, 2.0}) {
        double emp = 0.0;
        for (double x : x1) emp += std::exp(-z * x);
        emp /= static_cast<double>(n);
        const double expect = std::exp(-std::tgamma(1.0 - alpha) * std::pow(z, alpha));
        const double rel = std::fabs(emp / expect - 1.0);
        report.tests.push_back({"subordinator_laplace(z=" + fmt(z) + ")", rel, 0.0, 0.02,
                                rel < 0.02});
    }

    // PRM count and mark laws
    {
        RandomStream rng(derive_seed(cfg.master_seed, 0x77));
        const double delta = 0.01, T = 1.0, c = 1.0;
        const std::uint64_t reps = std::min<std::uint64_t>(n, 10'000);
        double count_sum = 0.0, big_marks = 0.0, marks_total = 0.0;
        for (std::uint64_t i = 0; i < reps; ++i) {
            const auto set = sample_prm(alpha, c, delta, T, rng);
            count_sum += static_cast<double>(set.points.size());
            for (const auto& ptn : set.points) {
                marks_total += 1.0;
                if (ptn.j > 2.0 * delta) big_marks += 1.0;
            }
        }
        const double mean_expect = T * std::pow(delta, -alpha) / c;
        const double mean = count_sum / static_cast<double>(reps);
        const double se = std::sqrt(mean_expect / static_cast<double>(reps));
        report.tests.push_back({"prm_count_mean", mean, 0.0, 4.0,
                                std::fabs(mean - mean_expect) < 4.0 * se});
        const double frac = big_marks / marks_total;
        const double expect_frac = std::pow(2.0, -alpha);
        const double se_frac = std::sqrt(expect_frac * (1.0 - expect_frac) / marks_total);
        report.tests.push_back({"prm_mark_tail", frac, 0.0, 4.0,
                                std::fabs(frac - expect_frac) < 4.0 * se_frac});
    }

    // V covariance on (1,2) at beta = 0.4
    {
        const double beta = 0.4;
        GaussianProcessSampler sampler(beta, {1.0, 2.0});
        const std::uint64_t reps = std::min<std::uint64_t>(n, 20'000);
        std::vector<std::vector<double>> draws(reps);
        parallel_for(reps, workers, [&](std::uint64_t i) {
            RandomStream rng(derive_seed(cfg.master_seed ^ 0x5544ffeeULL, i));
            draws[i] = sampler.sample(rng).values;
        });
        const auto est = empirical_cov(draws);
        const double t2 = std::pow(2.0, 0.6);
        const double expect[3] = {1.0, t2 - 1.0, t2};
        const double got[3] = {est.cov_at(0, 0), est.cov_at(0, 1), est.cov_at(1, 1)};
        const double se[3] = {est.se_at(0, 0), est.se_at(0, 1), est.se_at(1, 1)};
        bool pass = true;
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double dev = std::fabs(got[i] - expect[i]) / se[i];
            worst = std::max(worst, dev);
            pass &= dev < 4.0;
        }
        report.tests.push_back({"gaussian_V_covariance_max_dev", worst, 0.0, 4.0, pass});
    }

    // stable characteristic function at alpha = 1.5
    {
        const double a = 1.5;
        std::vector<double> z1(n);
        parallel_for(n, workers, [&](std::uint64_t i) {
            RandomStream rng(derive_seed(cfg.master_seed ^ 0x0badf00dULL, i));
            z1[i] = sample_stable_levy_increment(a, 1.0, rng);
        });
        const std::vector<double> zs{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
        const auto emp = empirical_char_fn(z1, zs);
        double worst = 0.0;
        for (const auto& ptn : emp) {
            const auto expect = stable_levy_char_fn(a, ptn.z);
            worst = std::max(worst, std::fabs(ptn.value.real() - expect.real()));
            worst = std::max(worst, std::fabs(ptn.value.imag() - expect.imag()));
        }
        report.tests.push_back({"stable_cf_max_abs_error", worst, 0.0, 0.02, worst < 0.02});
    }
}

}  // namespace

// --- public surface -------------------------------------------------------

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, _] : scenario_map()) out.push_back(name);
        return out;
    }();
    return names;
}

ScenarioKind scenario_from_name(const std::string& name) {
    const auto it = scenario_map().find(name);
    if (it == scenario_map().end()) {
        throw ValidationError("scenario: unknown scenario '" + name + "'");
    }
    return it->second;
}

std::string scenario_name(ScenarioKind kind) {
    for (const auto& [name, k] : scenario_map()) {
        if (k == kind) return name;
    }
    return "?";
}

json FamilyConfig::to_json() const {
    return {{"p", p},
            {"q", q},
            {"w0", w0},
            {"left", tailspec_json(left)},
            {"right", tailspec_json(right)}};
}

json ScenarioConfig::to_json() const {
    return {{"scenario", scenario_name(scenario)},
            {"family", family.to_json()},
            {"t_grid", t_grid},
            {"u_grid", u_grid},
            {"replicates", replicates},
            {"limit_samples", limit_samples},
            {"master_seed", master_seed}};
}

ScenarioConfig parse_config(const std::string& text) {
    DuplicateKeyChecker checker;
    json::sax_parse(text, &checker);
    if (!checker.duplicate.empty()) {
        throw ParseError("duplicate key '" + checker.duplicate + "'");
    }
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(ex.what());
    }
    if (!doc.is_object()) throw ParseError("config must be a JSON object");
    reject_unknown_keys(doc,
                        {"scenario", "family", "t_grid", "u_grid", "replicates",
                         "limit_samples", "master_seed"},
                        "config");
    ScenarioConfig cfg;
    try {
        cfg.scenario = scenario_from_name(doc.at("scenario").get<std::string>());
        if (doc.contains("family")) {
            const json& fam = doc["family"];
            reject_unknown_keys(fam, {"p", "q", "w0", "left", "right"}, "config.family");
            cfg.family.p = fam.value("p", 0.0);
            cfg.family.q = fam.value("q", 0.0);
            cfg.family.w0 = fam.value("w0", 0.5);
            if (fam.contains("left")) cfg.family.left = parse_tailspec(fam["left"], "config.family.left");
            if (fam.contains("right")) {
                cfg.family.right = parse_tailspec(fam["right"], "config.family.right");
            }
        }
        if (doc.contains("t_grid")) cfg.t_grid = doc["t_grid"].get<std::vector<double>>();
        if (doc.contains("u_grid")) cfg.u_grid = doc["u_grid"].get<std::vector<double>>();
        cfg.replicates = doc.value("replicates", cfg.replicates);
        cfg.limit_samples = doc.value("limit_samples", cfg.limit_samples);
        cfg.master_seed = doc.value("master_seed", cfg.master_seed);
    } catch (const json::exception& ex) {
        throw ParseError(ex.what());
    }
    if (cfg.replicates < 1) throw ValidationError("replicates: must be >= 1");
    for (const auto* grid : {&cfg.t_grid, &cfg.u_grid}) {
        for (std::size_t i = 0; i < grid->size(); ++i) {
            if ((*grid)[i] <= 0.0 || (i > 0 && (*grid)[i] <= (*grid)[i - 1])) {
                throw ValidationError("grids must be positive and strictly ascending");
            }
        }
    }
    if (cfg.t_grid.empty()) throw ValidationError("t_grid: must not be empty");
    if (cfg.u_grid.empty()) throw ValidationError("u_grid: must not be empty");
    validate_scenario_family(cfg);
    return cfg;
}

bool ScenarioReport::all_passed() const {
    for (const auto& t : tests) {
        if (!t.pass) return false;
    }
    return true;
}

json ScenarioReport::to_json(bool include_timing) const {
    json tests_json = json::array();
    for (const auto& t : tests) {
        tests_json.push_back({{"test", t.test},
                              {"statistic", t.statistic},
                              {"p_value", t.p_value},
                              {"threshold", t.threshold},
                              {"pass", t.pass}});
    }
    json out = {{"config", config.to_json()},
                {"norming", norming},
                {"tests", tests_json},
                {"version", version},
                {"occupancy_rows", occupancy.size()},
                {"limit_rows", limits.size()},
                {"all_passed", all_passed()}};
    if (include_timing) out["wall_seconds"] = wall_seconds;
    return out;
}

ScenarioReport run_scenario(const ScenarioConfig& config, unsigned workers) {
    validate_scenario_family(config);
    const auto start = std::chrono::steady_clock::now();
    const FactorFamily family = config.family.build();
    ScenarioReport report;
    report.config = config;
    switch (config.scenario) {
        case ScenarioKind::theorem1:
            run_theorem1(config, family, workers, report);
            break;
        case ScenarioKind::theorem2:
            run_theorem2(config, family, workers, report);
            break;
        case ScenarioKind::theorem3a:
            run_theorem3(config, family, workers, report, TheoremCase::t3a);
            break;
        case ScenarioKind::theorem3b1:
            run_theorem3(config, family, workers, report, TheoremCase::t3b1);
            break;
        case ScenarioKind::theorem3b2:
            run_theorem3(config, family, workers, report, TheoremCase::t3b2);
            break;
        case ScenarioKind::theorem3c1:
            run_theorem3(config, family, workers, report, TheoremCase::t3c1);
            break;
        case ScenarioKind::theorem3c2:
            run_theorem3(config, family, workers, report, TheoremCase::t3c2);
            break;
        case ScenarioKind::lemma_red:
            run_gap_scenario(config, family, workers, report, true);
            break;
        case ScenarioKind::depoisson:
            run_gap_scenario(config, family, workers, report, false);
            break;
        case ScenarioKind::oracle_equiv:
            run_oracle_equiv(config, family, workers, report);
            break;
        case ScenarioKind::limit_calibration:
            run_limit_calibration(config, family, workers, report);
            break;
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

void write_report(const ScenarioReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    const std::string name = scenario_name(report.config.scenario);
    {
        std::ofstream out(fs::path(dir) / "report.json");
        if (!out) throw Error("cannot write report.json under " + dir);
        out << report.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(dir) / "occupancy.csv");
        out << "scenario,t,u,replicate,n,K,M,L,statistic\n";
        out.precision(12);
        for (const auto& r : report.occupancy) {
            out << name << ',' << r.t << ',' << r.u << ',' << r.replicate << ',' << r.n << ','
                << r.K << ',' << r.M << ',' << r.L << ',' << r.statistic << '\n';
        }
    }
    {
        std::ofstream out(fs::path(dir) / "limits.csv");
        out << "scenario,u,sample_index,value\n";
        out.precision(12);
        for (const auto& r : report.limits) {
            out << name << ',' << r.u << ',' << r.sample_index << ',' << r.value << '\n';
        }
    }
    {
        std::ofstream out(fs::path(dir) / "tests.csv");
        out << "scenario,test,statistic,p_value,threshold,pass\n";
        out.precision(12);
        for (const auto& t : report.tests) {
            out << name << ',' << t.test << ',' << t.statistic << ',' << t.p_value << ','
                << t.threshold << ',' << (t.pass ? 1 : 0) << '\n';
        }
    }
}

}  // namespace sievelab
