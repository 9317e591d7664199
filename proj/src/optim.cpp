#include "tworelay/optim.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tworelay {

namespace {

// The seven free factors, in the fixed draw/perturbation order.
std::vector<ConditionalTable*> free_tables(NetworkDist& d) {
    return {&d.p_v1, &d.p_v2, &d.p_x1, &d.p_x2, &d.p_x0, &d.q1, &d.q2};
}

// Proposal direction for one hill-climb move. Usually a full-support
// Dirichlet point; one time in four (on rows with at least two outputs) the
// support is restricted to a random proper subset, with zeros elsewhere.
// The move keeps only the coordinates the proposal supports (see the blend
// in maximize_rate), so a sparse proposal lands exactly on a simplex face.
// Without that, optima with a zero coordinate — e.g. channel inputs whose
// capacity-achieving law drops a letter — stay out of reach: convex blends
// toward interior points shrink a coordinate geometrically but never to
// zero. Full-support proposals reintroduce mass, so no face traps the walk.
std::vector<double> propose_direction(std::size_t size, Rng& rng) {
    if (size >= 2 && rng.next_index(4) == 0) {
        const std::size_t support = 1 + static_cast<std::size_t>(rng.next_index(size - 1));
        std::vector<std::size_t> outs(size);
        std::iota(outs.begin(), outs.end(), std::size_t{0});
        for (std::size_t i = 0; i < support; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rng.next_index(outs.size() - i));
            std::swap(outs[i], outs[j]);
        }
        const std::vector<double> weights = rng.next_dirichlet(support);
        std::vector<double> dir(size, 0.0);
        for (std::size_t i = 0; i < support; ++i) dir[outs[i]] = weights[i];
        return dir;
    }
    return rng.next_dirichlet(size);
}

void fill_dirichlet(ConditionalTable& t, Rng& rng) {
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
        const std::vector<double> row = rng.next_dirichlet(t.row_size());
        for (std::size_t o = 0; o < t.row_size(); ++o) t.entry(r, o) = row[o];
    }
}

// Blend every row of the concentration targets into d: auxiliaries and
// quantizer outputs move toward point masses (at gamma = 1 both coverage
// requirements vanish identically, which is always feasible).
void blend_to_degenerate(NetworkDist& d, double gamma) {
    auto to_point = [&](ConditionalTable& t) {
        for (std::size_t r = 0; r < t.num_rows(); ++r)
            for (std::size_t o = 0; o < t.row_size(); ++o)
                t.entry(r, o) = (1.0 - gamma) * t.entry(r, o) + (o == 0 ? gamma : 0.0);
    };
    to_point(d.p_v1);
    to_point(d.p_v2);
    to_point(d.p_x1);
    to_point(d.p_x2);
    to_point(d.q1);
    to_point(d.q2);
    // p_x0 stays: the direct input keeps carrying rate.
}

} // namespace

NetworkDist random_dist(const AlphabetSizes& alpha, const ConditionalTable& channel,
                        Rng& rng) {
    NetworkDist d = NetworkDist::uniform(alpha);
    d.channel = channel;
    for (ConditionalTable* t : free_tables(d)) fill_dirichlet(*t, rng);
    {
        const ValidationReport rep = validate(d);
        if (!rep.ok()) throw ShapeError("random_dist: " + rep.to_string());
    }
    return d;
}

NetworkDist random_dist(const AlphabetSizes& alpha, const ConditionalTable& channel,
                        std::uint64_t seed) {
    Rng rng(seed);
    return random_dist(alpha, channel, rng);
}

OptimizeResult maximize_rate(const ConditionalTable& channel, const AlphabetSizes& alpha,
                             const OptimizerConfig& config) {
    if (config.restarts < 1) throw std::invalid_argument("maximize_rate: restarts must be >= 1");
    if (config.iterations < 0) throw std::invalid_argument("maximize_rate: negative iterations");

    OptimizeResult result;
    result.restart_rates.assign(static_cast<std::size_t>(config.restarts),
                                std::numeric_limits<double>::quiet_NaN());

    for (int r = 0; r < config.restarts; ++r) {
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(r)));
        NetworkDist cur = random_dist(alpha, channel, rng);
        RegionVerdict cur_verdict = evaluate_region(cur);

        // Walk toward the degenerate point-mass configuration until feasible;
        // gamma = 1 reaches it exactly.
        if (!cur_verdict.feasible) {
            for (double gamma : {0.5, 0.75, 0.875, 0.9375, 1.0}) {
                NetworkDist cand = cur;
                blend_to_degenerate(cand, gamma);
                RegionVerdict v = evaluate_region(cand);
                if (v.feasible) {
                    cur = std::move(cand);
                    cur_verdict = v;
                    break;
                }
            }
        }
        if (!cur_verdict.feasible) continue;  // defensive; gamma = 1 is feasible

        std::vector<double> trace = {cur_verdict.achieved_rate};
        const double ratio = config.step_start > 0.0 && config.iterations > 1
                                 ? std::pow(config.step_end / config.step_start,
                                            1.0 / static_cast<double>(config.iterations - 1))
                                 : 1.0;
        double step = config.step_start;
        std::vector<ConditionalTable*> tables = free_tables(cur);
        for (int it = 0; it < config.iterations; ++it, step *= ratio) {
            const std::size_t ti = static_cast<std::size_t>(rng.next_index(tables.size()));
            ConditionalTable& table = *tables[ti];
            const std::size_t row = static_cast<std::size_t>(rng.next_index(table.num_rows()));
            const std::vector<double> dir = propose_direction(table.row_size(), rng);

            // Blend within the proposal's support and renormalize; outside
            // it the candidate is exactly zero (sparse proposals are how the
            // walk reaches faces). The sum stays positive: dir sums to one.
            std::vector<double> saved(table.row_size());
            double sum = 0.0;
            for (std::size_t o = 0; o < table.row_size(); ++o) {
                saved[o] = table.entry(row, o);
                const double x =
                    dir[o] > 0.0 ? (1.0 - step) * saved[o] + step * dir[o] : 0.0;
                table.entry(row, o) = x;
                sum += x;
            }
            for (std::size_t o = 0; o < table.row_size(); ++o)
                table.entry(row, o) /= sum;

            const RegionVerdict v = evaluate_region(cur);
            if (v.feasible &&
                v.achieved_rate > cur_verdict.achieved_rate + config.improve_tol) {
                cur_verdict = v;
                trace.push_back(v.achieved_rate);
            } else {
                for (std::size_t o = 0; o < table.row_size(); ++o)
                    table.entry(row, o) = saved[o];
            }
        }

        result.restart_rates[static_cast<std::size_t>(r)] = cur_verdict.achieved_rate;
        if (!result.any_feasible || cur_verdict.achieved_rate > result.best_rate) {
            result.any_feasible = true;
            result.best = cur;
            result.verdict = cur_verdict;
            result.best_rate = cur_verdict.achieved_rate;
            result.best_restart = r;
            result.best_trace = std::move(trace);
        }
    }
    return result;
}

namespace {

// Simplex grid rows: all length-m compositions of `steps`, lexicographic.
void compositions(int steps, int m, std::vector<std::vector<double>>& out) {
    std::vector<int> c(static_cast<std::size_t>(m), 0);
    std::vector<double> row(static_cast<std::size_t>(m));
    const double inv = 1.0 / static_cast<double>(steps);
    // Iterate all placements recursively.
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == m - 1) {
            c[static_cast<std::size_t>(pos)] = left;
            for (int i = 0; i < m; ++i)
                row[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)] * inv;
            out.push_back(row);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            c[static_cast<std::size_t>(pos)] = k;
            rec(pos + 1, left - k);
        }
    };
    rec(0, steps);
}

} // namespace

GridResult grid_search(const ConditionalTable& channel, const AlphabetSizes& alpha,
                       int steps, std::uint64_t max_points) {
    if (steps < 1) throw std::invalid_argument("grid_search: steps must be >= 1");
    NetworkDist base = NetworkDist::uniform(alpha);
    base.channel = channel;
    std::vector<ConditionalTable*> tables = free_tables(base);

    // One entry per (table, row): the menu of grid rows for that row size.
    struct Slot {
        ConditionalTable* table;
        std::size_t row;
        const std::vector<std::vector<double>>* menu;
    };
    std::map<std::size_t, std::vector<std::vector<double>>> menus;
    std::vector<Slot> slots;
    double log_points = 0.0;
    for (ConditionalTable* t : tables) {
        auto& menu = menus[t->row_size()];
        if (menu.empty()) compositions(steps, static_cast<int>(t->row_size()), menu);
        for (std::size_t r = 0; r < t->num_rows(); ++r) {
            slots.push_back({t, r, &menu});
            log_points += std::log2(static_cast<double>(menu.size()));
        }
    }
    if (log_points > std::log2(static_cast<double>(max_points)))
        throw std::invalid_argument(
            "grid_search: grid would exceed the evaluation cap; "
            "use fewer steps or smaller alphabets");

    GridResult result;
    std::vector<std::size_t> pick(slots.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const auto& row = (*slots[i].menu)[pick[i]];
            for (std::size_t o = 0; o < row.size(); ++o)
                slots[i].table->entry(slots[i].row, o) = row[o];
        }
        ++result.points;
        const RegionVerdict v = evaluate_region(base);
        if (v.feasible && (!result.any_feasible || v.achieved_rate > result.best_rate)) {
            result.any_feasible = true;
            result.best = base;
            result.best_rate = v.achieved_rate;
        }
        // Odometer increment.
        std::size_t i = 0;
        for (; i < slots.size(); ++i) {
            if (++pick[i] < slots[i].menu->size()) break;
            pick[i] = 0;
        }
        if (i == slots.size()) break;
    }
    return result;
}

} // namespace tworelay
