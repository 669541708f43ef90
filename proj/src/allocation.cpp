#include "acsbayes/allocation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "acsbayes/errors.hpp"

namespace acsbayes {

namespace {

// weighted pick over cells with avail[c]; returns -1 when no mass remains
int weighted_pick(std::span<const double> weights, const std::vector<bool>& avail,
                  Rng& rng) {
    double total = 0.0;
    for (std::size_t c = 0; c < weights.size(); ++c)
        if (avail[c]) total += weights[c];
    if (total <= 0.0) return -1;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int last = -1;
    for (std::size_t c = 0; c < weights.size(); ++c) {
        if (!avail[c] || weights[c] <= 0.0) continue;
        cum += weights[c];
        last = static_cast<int>(c);
        if (u < cum) return last;
    }
    return last;
}

int weighted_pick_list(const std::vector<int>& cells, std::span<const double> weights,
                       Rng& rng) {
    double total = 0.0;
    for (int c : cells) total += weights[c];
    if (total <= 0.0) return -1;
    const double u = rng.uniform() * total;
    double cum = 0.0;
    int last = -1;
    for (int c : cells) {
        if (weights[c] <= 0.0) continue;
        cum += weights[c];
        last = c;
        if (u < cum) return last;
    }
    return last;
}

} // namespace

std::vector<std::vector<int>> allocate_networks(const std::vector<int>& sizes,
                                                std::span<const double> weights,
                                                const std::vector<bool>& forbidden,
                                                const GridSpec& grid, int retry_budget,
                                                Rng& rng) {
    const int m = grid.cell_count();
    if (static_cast<int>(weights.size()) != m || static_cast<int>(forbidden.size()) != m)
        throw std::invalid_argument("allocate_networks: weights/forbidden length != cell count");
    for (int s : sizes)
        if (s < 1) throw std::invalid_argument("allocate_networks: sizes must be >= 1");

    std::vector<std::vector<int>> result(sizes.size());
    if (sizes.empty()) return result;

    // biggest first; ties keep input order
    std::vector<int> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return sizes[a] > sizes[b]; });

    std::vector<bool> avail(m);
    for (int c = 0; c < m; ++c) avail[c] = !forbidden[c] && weights[c] > 0.0;

    std::array<int, 4> nbr;
    std::vector<int> component;
    std::vector<int> frontier;
    std::vector<bool> in_component(m, false);

    for (int idx : order) {
        const int target = sizes[idx];
        bool placed = false;
        for (int attempt = 0; attempt < retry_budget && !placed; ++attempt) {
            const int seed = weighted_pick(weights, avail, rng);
            if (seed < 0)
                throw AllocationFailure(target,
                                        "allocate_networks: no available cell to seed a network of size " +
                                            std::to_string(target));
            component.assign(1, seed);
            in_component[seed] = true;
            while (static_cast<int>(component.size()) < target) {
                frontier.clear();
                for (int cell : component) {
                    const int n = neighbors(cell, grid, nbr);
                    for (int i = 0; i < n; ++i) {
                        const int nb = nbr[i];
                        if (avail[nb] && !in_component[nb] &&
                            std::find(frontier.begin(), frontier.end(), nb) == frontier.end())
                            frontier.push_back(nb);
                    }
                }
                const int next = weighted_pick_list(frontier, weights, rng);
                if (next < 0) break; // dead end, restart this network
                component.push_back(next);
                in_component[next] = true;
            }
            if (static_cast<int>(component.size()) == target) {
                placed = true;
            } else {
                for (int cell : component) in_component[cell] = false;
            }
        }
        if (!placed)
            throw AllocationFailure(sizes[idx],
                                    "allocate_networks: growth dead-ended " +
                                        std::to_string(retry_budget) +
                                        " times for a network of size " +
                                        std::to_string(sizes[idx]));
        // retire members and their lattice neighbours so later networks
        // cannot touch this one
        for (int cell : component) {
            avail[cell] = false;
            in_component[cell] = false;
            const int n = neighbors(cell, grid, nbr);
            for (int i = 0; i < n; ++i) avail[nbr[i]] = false;
        }
        std::sort(component.begin(), component.end());
        result[idx] = component;
    }
    return result;
}

} // namespace acsbayes
