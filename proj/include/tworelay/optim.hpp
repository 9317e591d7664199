#pragma once
// Input-distribution optimization: maximize the achievable message rate over
// the seven free factors (the channel is fixed) subject to region
// feasibility. Multi-restart local search with Dirichlet row perturbations at
// a shrinking scale; a move is accepted only if it stays feasible and
// improves the rate. Fully deterministic per seed.

#include <cstdint>
#include <string>
#include <vector>

#include "tworelay/pmf.hpp"
#include "tworelay/region.hpp"
#include "tworelay/rng.hpp"

namespace tworelay {

struct OptimizerConfig {
    int restarts = 16;
    int iterations = 400;
    double step_start = 0.5;  // perturbation scale, geometric schedule
    double step_end = 0.02;
    std::uint64_t seed = 1;
    double improve_tol = 1e-12;  // accepted moves must gain more than this
};

struct OptimizeResult {
    bool any_feasible = false;
    NetworkDist best;       // meaningful when any_feasible
    RegionVerdict verdict;  // evaluated at best
    double best_rate = 0.0;
    int best_restart = -1;
    // Per-restart final rates (NaN where a restart never reached feasibility).
    std::vector<double> restart_rates;
    // Accepted-move rate trajectory of the winning restart (nondecreasing).
    std::vector<double> best_trace;
};

// Fresh factored distribution with every free conditional row drawn from a
// flat Dirichlet. The channel table is adopted as-is.
NetworkDist random_dist(const AlphabetSizes& alpha, const ConditionalTable& channel,
                        std::uint64_t seed);
NetworkDist random_dist(const AlphabetSizes& alpha, const ConditionalTable& channel,
                        Rng& rng);

OptimizeResult maximize_rate(const ConditionalTable& channel, const AlphabetSizes& alpha,
                             const OptimizerConfig& config);

// Exhaustive search over all free rows on the simplex grid with the given
// number of steps per coordinate (entries are multiples of 1/steps). Total
// point count is guarded; exceeding the cap throws std::invalid_argument.
// Practical only when most alphabets are degenerate.
struct GridResult {
    bool any_feasible = false;
    NetworkDist best;
    double best_rate = 0.0;
    std::uint64_t points = 0;  // grid points evaluated
};
GridResult grid_search(const ConditionalTable& channel, const AlphabetSizes& alpha,
                       int steps = 8, std::uint64_t max_points = 2000000);

} // namespace tworelay
