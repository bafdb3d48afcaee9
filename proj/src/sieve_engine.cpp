#include "sievelab/sieve_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sievelab {

namespace {

void append_step(std::vector<double>& sums, std::vector<double>& marks,
                 const FactorFamily& family, RandomStream& rng) {
    const LogPair lp = family.sample_log_pair(rng);
    // |log W| can underflow for extreme right-branch draws; keep S strictly
    // increasing even when the increment vanishes at this magnitude
    double next = sums.back() + lp.vlog;
    if (!(next > sums.back())) {
        next = std::nextafter(sums.back(), std::numeric_limits<double>::infinity());
    }
    sums.push_back(next);
    marks.push_back(lp.eta);
}

}  // namespace

Environment Environment::from_factors(const FactorFamily& family, std::uint64_t seed,
                                      const std::vector<double>& w_prefix) {
    Environment env(family, seed);
    for (double w : w_prefix) {
        if (!(w > 0.0 && w < 1.0)) throw ValidationError("factors must lie in (0,1)");
        double next = env.sums_.back() - std::log(w);
        if (!(next > env.sums_.back())) {
            next = std::nextafter(env.sums_.back(), std::numeric_limits<double>::infinity());
        }
        env.sums_.push_back(next);
        env.marks_.push_back(-std::log1p(-w));
    }
    return env;
}

void Environment::extend_to_count(std::size_t k) {
    while (marks_.size() < k) append_step(sums_, marks_, *family_, rng_);
}

void Environment::extend_to_level(double t) {
    while (sums_.back() <= t) append_step(sums_, marks_, *family_, rng_);
}

std::size_t Environment::box_index(double e) {
    extend_to_level(e);
    // min{k : S_k > e}; sums_ is sorted
    return static_cast<std::size_t>(
        std::upper_bound(sums_.begin(), sums_.end(), e) - sums_.begin());
}

std::size_t Environment::nu(double t) { return box_index(t); }

std::uint64_t Environment::renewal_functional(double t) {
    extend_to_level(t);
    std::uint64_t count = 0;
    for (std::size_t k = 0; sums_[k] <= t; ++k) {
        if (t < sums_[k] + marks_[k]) ++count;
    }
    return count;
}

std::vector<OccupancySnapshot> simulate_occupancy(Environment& env,
                                                  const std::vector<std::uint64_t>& n_grid,
                                                  RandomStream& rng, std::uint64_t capacity) {
    std::vector<OccupancySnapshot> out;
    out.reserve(n_grid.size());
    if (n_grid.empty()) return out;
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
        if (n_grid[i] >= n_grid[i + 1]) {
            throw ValidationError("n_grid must be strictly ascending");
        }
    }
    const std::uint64_t n_max = n_grid.back();
    if (n_max > capacity) throw CapacityExceededError("ball count beyond configured bound");

    std::vector<std::uint8_t> occupied;  // sparse in n, dense in box index
    std::uint64_t K = 0, M = 0;
    std::size_t next = 0;
    while (next < n_grid.size() && n_grid[next] == 0) {
        out.push_back({0, 0, 0, 0});
        ++next;
    }
    for (std::uint64_t ball = 1; ball <= n_max; ++ball) {
        const std::size_t k = env.box_index(rng.exponential());
        if (k > occupied.size()) occupied.resize(k, 0);
        if (!occupied[k - 1]) {
            occupied[k - 1] = 1;
            ++K;
        }
        M = std::max<std::uint64_t>(M, k);
        if (next < n_grid.size() && ball == n_grid[next]) {
            out.push_back({ball, K, M, M - K});
            ++next;
        }
    }
    return out;
}

OccupancySnapshot occupancy_oracle(const std::vector<double>& w_list,
                                   const std::vector<double>& u_list) {
    for (double w : w_list) {
        if (!(w > 0.0 && w < 1.0)) throw ValidationError("factors must lie in (0,1)");
    }
    for (double u : u_list) {
        if (!(u > 0.0 && u < 1.0)) throw ValidationError("uniforms must lie in (0,1)");
    }
    const double u_min = *std::min_element(u_list.begin(), u_list.end());
    std::vector<double> T{1.0};  // T_0, T_1, ...
    for (double w : w_list) {
        T.push_back(T.back() * w);
        if (T.back() < u_min) break;
    }
    if (T.back() >= u_min) {
        throw InsufficientEnvironmentError("factor list too short to cover min(u)");
    }
    std::vector<std::size_t> boxes;
    for (double u : u_list) {
        // u in (T_k, T_{k-1}] gets box k
        for (std::size_t k = 1; k < T.size(); ++k) {
            if (u > T[k] && u <= T[k - 1]) {
                boxes.push_back(k);
                break;
            }
        }
    }
    std::uint64_t M = 0;
    std::vector<std::size_t> sorted = boxes;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::size_t k : boxes) M = std::max<std::uint64_t>(M, k);
    const std::uint64_t K = sorted.size();
    return {u_list.size(), K, M, M - K};
}

double centered_L_statistic(double L, const FactorFamily& family, TheoremCase which, double t,
                            double u) {
    switch (which) {
        case TheoremCase::theorem1:
            return L;
        case TheoremCase::theorem2:
            return family.theorem2_ratio(t) * L;
        case TheoremCase::t3a:
        case TheoremCase::t3b1:
        case TheoremCase::t3c1: {
            const double center = family.integral_tail_G(u * t) / family.mean_log_factor();
            return (L - center) / family.norming_q(t);
        }
        case TheoremCase::t3b2:
        case TheoremCase::t3c2: {
            const double center = family.integral_tail_G(u * t) / family.mean_log_factor();
            const auto c3 = which == TheoremCase::t3b2 ? Theorem3Case::b2 : Theorem3Case::c2;
            return (L - center) / family.norming_g(t, c3);
        }
    }
    return L;
}

}  // namespace sievelab
