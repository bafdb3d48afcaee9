#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sievelab/errors.hpp"
#include "sievelab/random.hpp"

namespace sievelab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class TailKind {
    pareto,               // P{V > x} = x^{-alpha},            x >= 1
    pareto2_logvariance,  // P{V > x} = x^{-2}; truncated second moment ~ 2 ln x
    slow_logtail,         // P{V > x} = 1/(1 + ln x)
    slow_loglogtail,      // P{V > x} = 1/(1 + ln(1 + ln x))
    point_mass            // V == value >= 1
};

// Law of a branch variable V supported on [1, inf).
struct TailSpec {
    TailKind kind = TailKind::point_mass;
    double alpha = 0.0;  // pareto index
    double value = 1.0;  // point mass location

    static TailSpec pareto(double a);
    static TailSpec pareto2_logvariance();
    static TailSpec slow_logtail();
    static TailSpec slow_loglogtail();
    static TailSpec point_mass_at(double v);

    double tail(double x) const;          // P{V > x}; 1 for x < 1
    double quantile(double u) const;      // inverse tail on (0,1)
    double index() const;                 // regular variation index of the tail
    double mean() const;                  // +inf when divergent
    double second_moment() const;         // +inf when divergent
    double trunc_second_moment(double x) const;  // E[V^2 1{V <= x}], x >= 1
};

struct TailProfile {
    double alpha;    // index of the |log W| tail; +inf when bounded
    double beta;     // index of the |log(1-W)| tail; +inf when bounded
    double c_ratio;  // lim tail_F / tail_G, when alpha == beta
    double mu;       // E|log W|, +inf possible
    double sigma2;   // Var(log W), +inf possible
};

enum class Theorem3Case { a, b1, b2, c1, c2 };

struct LogPair {
    double vlog;  // |log W|
    double eta;   // |log(1 - W)|
};

// Three-branch mixture for the factor W on (0,1):
// with prob p,  W = exp(-V1), V1 ~ left tail;
// with prob q,  W = 1 - exp(-V2), V2 ~ right tail;
// otherwise     W = w0.
// Both branch variables live on [1, inf), so for x >= 1 the tails of
// |log W| and |log(1-W)| are exactly p*tail_left(x) and q*tail_right(x).
class FactorFamily {
public:
    FactorFamily(double p, double q, TailSpec left, TailSpec right, double w0 = 0.5);

    double p() const { return p_; }
    double q() const { return q_; }
    double w0() const { return w0_; }
    const TailSpec& left() const { return left_; }
    const TailSpec& right() const { return right_; }

    double sample_factor(RandomStream& rng) const;
    // same draw in log space; immune to underflow of W itself
    LogPair sample_log_pair(RandomStream& rng) const;

    double tail_F(double x) const;  // P{|log W| > x}
    double tail_G(double x) const;  // P{|log(1-W)| > x}

    double mean_log_factor() const;      // mu, +inf possible
    double variance_log_factor() const;  // sigma^2, +inf possible

    double trunc_second_moment(double x) const;  // E[(log W)^2 1{|log W| <= x}]

    // c(t) solving t * l(c) / c^alpha = 1 where l is the exact slowly varying
    // part of the family (tail form, or truncated second moment when the left
    // branch is pareto2_logvariance)
    double norming_c(double t) const;

    double integral_tail_G(double t) const;  // int_0^t P{|log(1-W)| > y} dy
    double norming_q(double t) const;        // sqrt(mu^{-1} * integral_tail_G(t))
    double norming_g(double t, Theorem3Case c) const;

    double theorem2_ratio(double t) const;  // tail_F(t) / tail_G(t), t >= 1

    TailProfile profile() const;

private:
    double cross_expect(const TailSpec& spec, bool squared) const;

    double p_, q_, w0_;
    TailSpec left_, right_;
    // constants cached at construction (family is immutable afterwards)
    double cross_mean_right_ = 0.0;  // E|log(1 - exp(-V2))| over the right branch
    double cross_m2_right_ = 0.0;
    double integral_tail_G_01_ = 0.0;
};

}  // namespace sievelab
