#include "acsbayes/model_state.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace acsbayes {

bool ModelParams::valid() const {
    if (theta.empty()) return false;
    for (double t : theta)
        if (!std::isfinite(t)) return false;
    for (double r : rho)
        if (!std::isfinite(r)) return false;
    return alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0;
}

std::string check_latent_state(const LatentState& state,
                               const std::vector<bool>& forbidden,
                               const GridSpec& grid) {
    if (state.p_bar != static_cast<int>(state.sizes.size()) ||
        state.p_bar != static_cast<int>(state.cells.size()) ||
        state.p_bar != static_cast<int>(state.counts.size()))
        return "latent network count mismatch";
    long total = 0;
    for (int s : state.sizes) total += s;
    if (total != state.x_bar) return "latent sizes do not sum to x_bar";
    if ((state.x_bar == 0) != (state.p_bar == 0)) return "x_bar/p_bar zero mismatch";

    std::set<int> seen;
    std::array<int, 4> nbr;
    for (int i = 0; i < state.p_bar; ++i) {
        const auto& net = state.cells[i];
        if (static_cast<int>(net.size()) != state.sizes[i])
            return "allocated cell count differs from network size";
        if (state.counts[i].size() != net.size()) return "count vector length mismatch";
        for (int c : state.counts[i])
            if (c < 1) return "latent count below 1";
        std::set<int> members(net.begin(), net.end());
        if (members.size() != net.size()) return "duplicate cell within a network";
        for (int cell : net) {
            if (cell < 0 || cell >= grid.cell_count()) return "cell outside grid";
            if (forbidden[cell]) return "allocated cell is forbidden";
            if (!seen.insert(cell).second) return "cell shared between networks";
        }
        // connectivity by flood fill within the member set
        std::vector<int> stack{net.front()};
        std::set<int> reached{net.front()};
        while (!stack.empty()) {
            const int cur = stack.back();
            stack.pop_back();
            const int n = neighbors(cur, grid, nbr);
            for (int j = 0; j < n; ++j)
                if (members.count(nbr[j]) && reached.insert(nbr[j]).second)
                    stack.push_back(nbr[j]);
        }
        if (reached.size() != members.size()) return "network not connected";
    }
    // mutual non-adjacency (maximality of each component)
    for (int i = 0; i < state.p_bar; ++i) {
        for (int cell : state.cells[i]) {
            const int n = neighbors(cell, grid, nbr);
            for (int j = 0; j < n; ++j) {
                const int nb = nbr[j];
                if (!seen.count(nb)) continue;
                const auto& own = state.cells[i];
                if (std::find(own.begin(), own.end(), nb) == own.end())
                    return "two latent networks are adjacent";
            }
        }
    }
    return {};
}

} // namespace acsbayes
