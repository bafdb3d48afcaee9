#include <doctest.h>

#include <cmath>
#include <vector>

#include "sievelab/poissonized.hpp"

using namespace sievelab;

namespace {

const FactorFamily& mix_family() {
    static const FactorFamily fam(0.3, 0.3, TailSpec::pareto(0.5), TailSpec::pareto(0.5));
    return fam;
}

const FactorFamily& finite_family() {
    static const FactorFamily fam(0.0, 0.3, TailSpec::point_mass_at(1.0),
                                  TailSpec::pareto(0.4));
    return fam;
}

}  // namespace

TEST_CASE("poissonized ball counts have the right mean and coupling") {
    const double t = 25.0;
    const int reps = 20'000;
    double sum_n = 0.0;
    int matched = 0, matched_equal = 0;
    RandomStream seeds(41);
    for (int i = 0; i < reps; ++i) {
        Environment env(mix_family(), seeds.next_u64());
        RandomStream balls(seeds.next_u64());
        const auto run = poissonized_occupancy(env, t, balls);
        sum_n += static_cast<double>(run.N);
        CHECK(run.snapshot.n == run.N);
        CHECK(run.coupled_snapshot.n == static_cast<std::uint64_t>(t));
        if (run.N == static_cast<std::uint64_t>(t)) {
            ++matched;
            if (run.snapshot == run.coupled_snapshot) ++matched_equal;
        }
    }
    CHECK(std::fabs(sum_n / reps - t) < 4.0 * std::sqrt(t / reps));
    CHECK(matched > 0);
    CHECK(matched == matched_equal);
}

TEST_CASE("zero realized count gives the empty-allocation convention") {
    // t small enough that Poisson(t) = 0 happens quickly
    RandomStream seeds(43);
    bool saw_zero = false;
    for (int i = 0; i < 200 && !saw_zero; ++i) {
        Environment env(mix_family(), seeds.next_u64());
        RandomStream balls(seeds.next_u64());
        const auto run = poissonized_occupancy(env, 0.5, balls);
        if (run.N == 0) {
            saw_zero = true;
            CHECK(run.snapshot == OccupancySnapshot{0, 0, 0, 0});
        }
    }
    CHECK(saw_zero);
}

TEST_CASE("gap statistics are deterministic per seed") {
    Environment e1(mix_family(), 11), e2(mix_family(), 11);
    RandomStream b1(12), b2(12);
    CHECK(depoisson_gap(e1, 50.0, b1) == depoisson_gap(e2, 50.0, b2));

    Environment e3(mix_family(), 13), e4(mix_family(), 13);
    RandomStream b3(14), b4(14);
    CHECK(poissonization_gap(e3, 4.0, b3) == poissonization_gap(e4, 4.0, b4));
}

TEST_CASE("poissonization gap respects the ball capacity") {
    Environment env(mix_family(), 15);
    RandomStream balls(16);
    CHECK_THROWS_AS(poissonization_gap(env, 30.0, balls), CapacityExceededError);
}

TEST_CASE("renewal function estimate") {
    RandomStream rng(45);
    CHECK(renewal_U_estimate(mix_family(), 0.0, 50, rng) == doctest::Approx(1.0));

    // deterministic walk S_k = k ln 2: nu(t) = floor(t/ln 2) + 1 exactly
    const FactorFamily fixed(0.0, 0.0, TailSpec::point_mass_at(1.0),
                             TailSpec::point_mass_at(1.0), 0.5);
    const double t = 1000.0;
    const double est = renewal_U_estimate(fixed, t, 10, rng);
    CHECK(est == doctest::Approx(std::floor(t / std::log(2.0)) + 1.0));

    // elementary renewal theorem as the oracle: U(t)/t -> 1/mu
    const double mu = finite_family().mean_log_factor();
    const double est2 = renewal_U_estimate(finite_family(), t, 400, rng);
    CHECK(std::fabs(est2 / t - 1.0 / mu) < 0.02 / mu);
}
