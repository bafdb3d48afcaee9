#include <doctest.h>

#include <cmath>
#include <vector>

#include "sievelab/random.hpp"
#include "sievelab/stat_tests.hpp"

using namespace sievelab;

TEST_CASE("streams are deterministic per seed and distinct across seeds") {
    RandomStream a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        all_equal &= x == b.next_u64();
        any_diff |= x != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("derive_seed separates replicate streams") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(7, 5) == derive_seed(7, 5));
}

TEST_CASE("uniform stays inside the open unit interval with mean 1/2") {
    RandomStream rng(11);
    const int n = 100'000;
    double sum = 0.0;
    bool in_range = true;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        in_range &= u > 0.0 && u < 1.0;
        sum += u;
    }
    CHECK(in_range);
    const double se = std::sqrt(1.0 / 12.0 / n);
    CHECK(std::fabs(sum / n - 0.5) < 4.0 * se);
}

TEST_CASE("exponential and normal match their first two moments") {
    RandomStream rng(12);
    const int n = 100'000;
    double se_sum = 0.0, nm = 0.0, nv = 0.0;
    for (int i = 0; i < n; ++i) se_sum += rng.exponential();
    CHECK(std::fabs(se_sum / n - 1.0) < 4.0 / std::sqrt(n));
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        nm += x;
        nv += x * x;
    }
    CHECK(std::fabs(nm / n) < 4.0 / std::sqrt(n));
    CHECK(std::fabs(nv / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

namespace {

DiscretePMF poisson_pmf(double mean, std::size_t k_max) {
    DiscretePMF pmf;
    pmf.probs.resize(k_max + 1);
    double term = std::exp(-mean), acc = 0.0;
    for (std::size_t k = 0; k < k_max; ++k) {
        pmf.probs[k] = term;
        acc += term;
        term *= mean / static_cast<double>(k + 1);
    }
    pmf.probs[k_max] = std::max(0.0, 1.0 - acc);
    return pmf;
}

}  // namespace

TEST_CASE("poisson sampling is exact in both regimes") {
    // inversion regime
    {
        RandomStream rng(13);
        std::vector<std::uint64_t> draws(100'000);
        for (auto& d : draws) d = rng.poisson(4.0);
        const auto res = chi2_gof(draws, poisson_pmf(4.0, 20));
        CHECK(res.p_value > 1e-4);
    }
    // rejection regime
    {
        RandomStream rng(14);
        std::vector<std::uint64_t> draws(100'000);
        for (auto& d : draws) d = rng.poisson(60.0);
        const auto res = chi2_gof(draws, poisson_pmf(60.0, 140));
        CHECK(res.p_value > 1e-4);
    }
    RandomStream z(15);
    CHECK(z.poisson(0.0) == 0);
}
