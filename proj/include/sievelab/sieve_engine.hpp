#pragma once

#include <cstdint>
#include <vector>

#include "sievelab/factor_models.hpp"
#include "sievelab/random.hpp"

namespace sievelab {

struct OccupancySnapshot {
    std::uint64_t n = 0;  // ball count
    std::uint64_t K = 0;  // occupied boxes
    std::uint64_t M = 0;  // index of the last occupied box
    std::uint64_t L = 0;  // M - K, empty boxes within the occupancy range

    bool operator==(const OccupancySnapshot&) const = default;
};

// Lazily extended realization of the random walk S_k = sum |log W_i| together
// with the aligned marks eta_k = |log(1 - W_k)|; both come from the same W
// draw. Extension is deterministic given (family, seed).
class Environment {
public:
    Environment(const FactorFamily& family, std::uint64_t seed)
        : family_(&family), rng_(seed) {}

    const FactorFamily& family() const { return *family_; }

    // environment whose first steps come from the given factors; extension
    // past the prefix draws from the family as usual
    static Environment from_factors(const FactorFamily& family, std::uint64_t seed,
                                    const std::vector<double>& w_prefix);

    // ensure S_1 .. S_k exist
    void extend_to_count(std::size_t k);
    // ensure the walk has passed level t
    void extend_to_level(double t);

    // S_0 = 0, S_1, ..., strictly increasing
    const std::vector<double>& partial_sums() const { return sums_; }
    // marks_[k] = eta_{k+1}, aligned with S_k
    const std::vector<double>& marks() const { return marks_; }

    // box of a ball with exponential energy e: min{k >= 1 : S_k > e}
    std::size_t box_index(double e);

    // first passage index nu(t) = inf{k >= 1 : S_k > t}
    std::size_t nu(double t);

    // rho(t) = sum_k 1{S_k <= t < S_k + eta_{k+1}}
    std::uint64_t renewal_functional(double t);

private:
    const FactorFamily* family_;
    RandomStream rng_;
    std::vector<double> sums_{0.0};
    std::vector<double> marks_;
};

inline constexpr std::uint64_t kDefaultBallCapacity = 100'000'000;

// One pass over n_max balls on a shared environment; snapshots are prefix
// statistics emitted at each count in the ascending n_grid.
std::vector<OccupancySnapshot> simulate_occupancy(Environment& env,
                                                  const std::vector<std::uint64_t>& n_grid,
                                                  RandomStream& rng,
                                                  std::uint64_t capacity = kDefaultBallCapacity);

// Naive reference: builds the interval partition T_k explicitly and assigns
// each uniform by linear scan. Quadratic on purpose.
OccupancySnapshot occupancy_oracle(const std::vector<double>& w_list,
                                   const std::vector<double>& u_list);

enum class TheoremCase { theorem1, theorem2, t3a, t3b1, t3b2, t3c1, t3c2 };

// (L - center(u,t)) / scale(t) with center and scale dictated by the case
double centered_L_statistic(double L, const FactorFamily& family, TheoremCase which, double t,
                            double u);

}  // namespace sievelab
