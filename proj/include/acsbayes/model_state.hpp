#ifndef ACSBAYES_MODEL_STATE_HPP
#define ACSBAYES_MODEL_STATE_HPP

#include <string>
#include <vector>

#include "acsbayes/grid.hpp"

namespace acsbayes {

// Regression coefficients and structural probabilities of the count model.
// rho is empty unless the occupancy extension is active.
struct ModelParams {
    std::vector<double> theta; // length k+1, intercept first
    double alpha = 0.1;        // cell nonempty probability
    double beta = 0.1;         // network formation probability
    std::vector<double> rho;   // occupancy logistic coefficients, optional

    bool valid() const;
};

// Hypothesised out-of-sample component: sizes, placed cells and counts of the
// unobserved nonempty networks. x_bar == 0 means the empty hypothesis.
struct LatentState {
    int x_bar = 0;                        // unobserved nonempty cells
    int p_bar = 0;                        // unobserved nonempty networks
    std::vector<int> sizes;               // length p_bar
    std::vector<std::vector<int>> cells;  // placed cells per network
    std::vector<std::vector<int>> counts; // counts per placed cell, each >= 1

    bool empty_hypothesis() const { return x_bar == 0; }
};

// Structural checks: sizes sum to x_bar, networks are connected, mutually
// non-adjacent, disjoint from forbidden cells, counts >= 1.
// Returns an empty string when valid, else a description of the violation.
std::string check_latent_state(const LatentState& state,
                               const std::vector<bool>& forbidden,
                               const GridSpec& grid);

} // namespace acsbayes

#endif
