#include <doctest.h>

#include <cmath>
#include <vector>

#include "sievelab/factor_models.hpp"
#include "sievelab/random.hpp"

using namespace sievelab;

TEST_CASE("tail spec inverse-transform identities") {
    const auto par = TailSpec::pareto(0.5);
    for (double u : {0.9, 0.5, 0.1, 1e-6}) {
        CHECK(par.quantile(u) == doctest::Approx(std::pow(u, -2.0)).epsilon(1e-12));
        CHECK(par.tail(par.quantile(u)) == doctest::Approx(u).epsilon(1e-12));
    }
    const auto slow = TailSpec::slow_logtail();
    for (double u : {0.9, 0.3, 0.05}) {
        CHECK(slow.tail(slow.quantile(u)) == doctest::Approx(u).epsilon(1e-10));
    }
    CHECK(TailSpec::pareto2_logvariance().tail(10.0) == doctest::Approx(0.01));
    CHECK(par.tail(0.5) == doctest::Approx(1.0));
}

TEST_CASE("degenerate mixture returns the filler factor") {
    const FactorFamily fam(0.0, 0.0, TailSpec::point_mass_at(1.0),
                           TailSpec::point_mass_at(1.0), 0.5);
    RandomStream rng(31);
    for (int i = 0; i < 10; ++i) CHECK(fam.sample_factor(rng) == doctest::Approx(0.5));
    CHECK(fam.mean_log_factor() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("analytic branch tails") {
    const FactorFamily f1(0.3, 0.0, TailSpec::pareto(0.5), TailSpec::point_mass_at(1.0));
    CHECK(f1.tail_F(4.0) == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(f1.tail_F(0.0) == doctest::Approx(1.0));

    const FactorFamily f2(0.0, 0.1, TailSpec::point_mass_at(1.0), TailSpec::pareto(0.3));
    CHECK(f2.tail_G(10.0) == doctest::Approx(0.1 * std::pow(10.0, -0.3)).epsilon(1e-12));

    const FactorFamily f3(0.3, 0.3, TailSpec::pareto(0.5), TailSpec::pareto(0.5));
    for (double x : {1.0, 2.0, 7.5, 100.0}) {
        CHECK(f3.tail_F(x) / f3.tail_G(x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("empirical log tails match the analytic tails") {
    const FactorFamily fam(1.0, 0.0, TailSpec::pareto(0.5), TailSpec::point_mass_at(1.0));
    RandomStream rng(32);
    const int n = 200'000;
    int over = 0;
    for (int i = 0; i < n; ++i) {
        if (-std::log(fam.sample_factor(rng)) > 4.0) ++over;
    }
    const double freq = static_cast<double>(over) / n;
    const double expect = 0.5;
    CHECK(std::fabs(freq - expect) < 4.0 * std::sqrt(expect * (1.0 - expect) / n));
}

TEST_CASE("log-pair draws agree with the mixture tails on both sides") {
    const FactorFamily fam(0.3, 0.3, TailSpec::pareto(0.6), TailSpec::pareto(0.3));
    RandomStream rng(33);
    const int n = 200'000;
    int f_over = 0, g_over = 0;
    for (int i = 0; i < n; ++i) {
        const auto lp = fam.sample_log_pair(rng);
        if (lp.vlog > 2.0) ++f_over;
        if (lp.eta > 2.0) ++g_over;
    }
    const double pf = fam.tail_F(2.0), pg = fam.tail_G(2.0);
    CHECK(std::fabs(f_over / double(n) - pf) < 4.0 * std::sqrt(pf * (1 - pf) / n));
    CHECK(std::fabs(g_over / double(n) - pg) < 4.0 * std::sqrt(pg * (1 - pg) / n));
}

TEST_CASE("mean and variance of the log factor") {
    const FactorFamily heavy(1.0, 0.0, TailSpec::pareto(1.5), TailSpec::point_mass_at(1.0));
    CHECK(heavy.mean_log_factor() == doctest::Approx(3.0).epsilon(1e-10));

    const FactorFamily infinite(1.0, 0.0, TailSpec::pareto(0.5), TailSpec::point_mass_at(1.0));
    CHECK(infinite.mean_log_factor() == kInf);

    // finite-variance family: checked against empirical moments
    const FactorFamily fam(0.4, 0.3, TailSpec::pareto(5.0), TailSpec::pareto(4.5));
    const double mu = fam.mean_log_factor();
    const double s2 = fam.variance_log_factor();
    RandomStream rng(34);
    const int n = 400'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = fam.sample_log_pair(rng).vlog;
        sum += v;
        sum2 += v * v;
    }
    const double emp_mu = sum / n;
    const double emp_s2 = sum2 / n - emp_mu * emp_mu;
    // heavy-ish tails: generous 4-sigma bands from the empirical fourth moment
    CHECK(std::fabs(emp_mu - mu) < 4.0 * std::sqrt(s2 / n));
    CHECK(std::fabs(emp_s2 - s2) / s2 < 0.05);
}

TEST_CASE("truncated second moment of the log factor") {
    const FactorFamily pure(1.0, 0.0, TailSpec::pareto2_logvariance(),
                            TailSpec::point_mass_at(1.0));
    CHECK(pure.trunc_second_moment(std::exp(1.0)) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(pure.trunc_second_moment(1.0) == doctest::Approx(0.0).epsilon(1e-12));

    const FactorFamily half(0.5, 0.0, TailSpec::pareto2_logvariance(),
                            TailSpec::point_mass_at(1.0), 0.5);
    const double filler = 0.5 * std::log(2.0) * std::log(2.0);
    CHECK(half.trunc_second_moment(std::exp(2.0)) ==
          doctest::Approx(0.5 * 4.0 + filler).epsilon(1e-9));
}

TEST_CASE("norming function c(t)") {
    const FactorFamily f05(1.0, 0.0, TailSpec::pareto(0.5), TailSpec::point_mass_at(1.0));
    CHECK(f05.norming_c(100.0) == doctest::Approx(10000.0).epsilon(1e-9));
    const FactorFamily f15(1.0, 0.0, TailSpec::pareto(1.5), TailSpec::point_mass_at(1.0));
    CHECK(f15.norming_c(8.0) == doctest::Approx(4.0).epsilon(1e-9));

    // pareto2 branch: c(t) solves c^2 = t * truncated-second-moment(c)
    const FactorFamily f2(0.6, 0.2, TailSpec::pareto2_logvariance(), TailSpec::pareto(0.5));
    for (double t = 10.0; t <= 1e8; t *= 10.0) {
        const double c = f2.norming_c(t);
        const double residual = std::fabs(t * f2.trunc_second_moment(c) / (c * c) - 1.0);
        CHECK(residual < 1e-9);
    }
}

TEST_CASE("norming function q(t)") {
    const FactorFamily fam(0.0, 0.3, TailSpec::point_mass_at(1.0), TailSpec::pareto(0.4));
    CHECK(fam.norming_q(0.0) == doctest::Approx(0.0));
    for (double t : {2.0, 5.0, 40.0}) {
        const double analytic = 0.3 * (std::pow(t, 0.6) - 1.0) / 0.6;
        CHECK(fam.integral_tail_G(t) - fam.integral_tail_G(1.0) ==
              doctest::Approx(analytic).epsilon(1e-8));
    }
    double prev = 0.0;
    for (double t = 0.5; t < 30.0; t += 0.5) {
        const double q = fam.norming_q(t);
        CHECK(q >= prev);
        prev = q;
    }
}

TEST_CASE("norming function g(t)") {
    // case a: direct product sqrt(sigma^2 mu^{-3} t) * tail_G(t)
    const FactorFamily fa(0.0, 0.3, TailSpec::point_mass_at(1.0), TailSpec::pareto(0.4));
    const double mu = fa.mean_log_factor(), s2 = fa.variance_log_factor();
    for (double t : {4.0, 16.0}) {
        CHECK(fa.norming_g(t, Theorem3Case::a) ==
              doctest::Approx(std::sqrt(s2 * t / (mu * mu * mu)) * fa.tail_G(t))
                  .epsilon(1e-10));
    }

    // case c2 closed form: mu^{-1-1/alpha} (p t)^{1/alpha} * q t^{-beta}
    const FactorFamily fc(0.5, 0.2, TailSpec::pareto(1.5), TailSpec::pareto(0.2));
    const double muc = fc.mean_log_factor();
    for (double t : {8.0, 64.0}) {
        const double expect = std::pow(muc, -1.0 - 2.0 / 3.0) * std::pow(0.5 * t, 2.0 / 3.0) *
                              0.2 * std::pow(t, -0.2);
        CHECK(fc.norming_g(t, Theorem3Case::c2) == doctest::Approx(expect).epsilon(1e-8));
        CHECK(fc.norming_g(t, Theorem3Case::c2) > 0.0);
    }
}

TEST_CASE("tail ratio used by the intermediate regime") {
    const FactorFamily fam(0.3, 0.3, TailSpec::pareto(0.6), TailSpec::pareto(0.3));
    CHECK(fam.theorem2_ratio(16.0) == doctest::Approx(std::pow(16.0, -0.3)).epsilon(1e-12));
    double prev = 1e300;
    for (double t = 1.0; t < 100.0; t *= 1.7) {
        const double r = fam.theorem2_ratio(t);
        CHECK(r <= prev);
        prev = r;
    }
    const FactorFamily eq(0.3, 0.3, TailSpec::pareto(0.5), TailSpec::pareto(0.5));
    CHECK(eq.theorem2_ratio(7.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("family validation") {
    CHECK_THROWS_AS(FactorFamily(0.7, 0.7, TailSpec::pareto(0.5), TailSpec::pareto(0.5)),
                    ValidationError);
    CHECK_THROWS_AS(FactorFamily(0.0, 0.0, TailSpec::point_mass_at(1.0),
                                 TailSpec::point_mass_at(1.0), 1.5),
                    ValidationError);
    CHECK_THROWS_AS(TailSpec::point_mass_at(0.5), ValidationError);
    CHECK_THROWS_AS(TailSpec::pareto(-1.0), ValidationError);
}

TEST_CASE("profile summarizes the family") {
    const FactorFamily fam(0.3, 0.3, TailSpec::pareto(0.5), TailSpec::pareto(0.5));
    const auto pr = fam.profile();
    CHECK(pr.alpha == doctest::Approx(0.5));
    CHECK(pr.beta == doctest::Approx(0.5));
    CHECK(pr.c_ratio == doctest::Approx(1.0));
    CHECK(pr.mu == kInf);
}
