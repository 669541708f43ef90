#ifndef ACSBAYES_POPULATION_HPP
#define ACSBAYES_POPULATION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "acsbayes/covariates.hpp"
#include "acsbayes/grid.hpp"
#include "acsbayes/model_state.hpp"

namespace acsbayes {

// A complete population: covariates and counts on every cell, with the
// network partition kept alongside.
struct PopulationGrid {
    GridSpec grid;
    CovariateField covariates;
    std::vector<int> counts;
    long true_total = 0;
    std::optional<ModelParams> true_params;
    NetworkPartition partition;

    void rebuild_derived();
    bool usable_for_sampling() const { return partition.nonempty_cells >= 1; }
};

// Draw a population from the hierarchical count model:
//   X ~ truncated Binomial(M, alpha) on {1..M}
//   P | X ~ truncated Binomial(X, beta) on {1..X}
//   Y | X, P ~ 1 + Multinomial(X - P, uniform)
//   networks placed spatially with the allocation procedure (alloc_weights;
//   empty span means lambda(c) = exp(v_c' theta))
//   eta(c) ~ zero-truncated Poisson(lambda(c)) on each nonempty cell
// Deterministic given (inputs, seed).
PopulationGrid generate_population(const GridSpec& grid, const CovariateField& covariates,
                                   const ModelParams& params,
                                   std::span<const double> alloc_weights,
                                   std::uint64_t seed);

} // namespace acsbayes

#endif
