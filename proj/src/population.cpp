#include "acsbayes/population.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "acsbayes/allocation.hpp"
#include "acsbayes/distributions.hpp"
#include "acsbayes/errors.hpp"

namespace acsbayes {

void PopulationGrid::rebuild_derived() {
    partition = extract_networks(counts, grid);
    true_total = 0;
    for (int c : counts) true_total += c;
}

PopulationGrid generate_population(const GridSpec& grid, const CovariateField& covariates,
                                   const ModelParams& params,
                                   std::span<const double> alloc_weights,
                                   std::uint64_t seed) {
    const int m = grid.cell_count();
    if (!params.valid()) throw std::invalid_argument("generate_population: invalid params");
    if (static_cast<int>(covariates.values.size()) != m * covariates.dim())
        throw std::invalid_argument("generate_population: covariates do not match grid");
    if (static_cast<int>(params.theta.size()) != covariates.dim())
        throw std::invalid_argument("generate_population: theta length != covariate dim");

    std::vector<double> lambda(m);
    for (int c = 0; c < m; ++c) {
        lambda[c] = std::exp(covariates.linear(c, params.theta));
        if (!std::isfinite(lambda[c]) || lambda[c] <= 0.0)
            throw std::invalid_argument("generate_population: non-finite intensity at cell " +
                                        std::to_string(c));
    }
    std::vector<double> weights(alloc_weights.begin(), alloc_weights.end());
    if (weights.empty()) weights = lambda;
    if (static_cast<int>(weights.size()) != m)
        throw std::invalid_argument("generate_population: weight length != cell count");
    double wtotal = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("generate_population: negative weight");
        wtotal += w;
    }
    if (wtotal <= 0.0) throw std::invalid_argument("generate_population: all weights zero");

    Rng rng(seed);
    const int x = TruncatedBinomial(m, params.alpha).sample(rng);
    int p = TruncatedBinomial(x, params.beta).sample(rng);
    std::vector<int> sizes = ShiftedMultinomial(x - p, p).sample(rng);

    const std::vector<bool> forbidden(m, false);
    std::vector<std::vector<int>> placed;
    int size_resamples = 0;
    for (;;) {
        bool ok = false;
        int failing_size = 0;
        for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
            try {
                placed = allocate_networks(sizes, weights, forbidden, grid, 10, rng);
                ok = true;
            } catch (const AllocationFailure& e) {
                failing_size = e.network_size;
            }
        }
        if (ok) break;
        if (++size_resamples > 100)
            throw GenerationError("generate_population: allocation infeasible, "
                                  "failing network size " + std::to_string(failing_size));
        // the drawn size vector cannot be placed on this grid; redraw it
        p = TruncatedBinomial(x, params.beta).sample(rng);
        sizes = ShiftedMultinomial(x - p, p).sample(rng);
    }

    PopulationGrid pop;
    pop.grid = grid;
    pop.covariates = covariates;
    pop.counts.assign(m, 0);
    for (const auto& net : placed)
        for (int cell : net)
            pop.counts[cell] = static_cast<int>(TruncatedPoisson(lambda[cell]).sample(rng));
    pop.true_params = params;
    pop.rebuild_derived();
    return pop;
}

} // namespace acsbayes
