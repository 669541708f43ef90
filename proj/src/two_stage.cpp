#include "acsbayes/two_stage.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "acsbayes/errors.hpp"

namespace acsbayes {

std::pair<int, int> split_stage_sizes(int m, double stage1_fraction) {
    if (m < 2) throw std::invalid_argument("split_stage_sizes: m must be >= 2");
    if (!(stage1_fraction > 0.0) || stage1_fraction > 1.0)
        throw std::invalid_argument("split_stage_sizes: fraction must be in (0,1]");
    const double exact = stage1_fraction * m;
    double rounded = std::floor(exact);
    const double frac = exact - rounded;
    if (frac > 0.5)
        rounded += 1.0;
    else if (frac == 0.5 && std::fmod(rounded, 2.0) != 0.0)
        rounded += 1.0; // ties to even
    int m1 = static_cast<int>(rounded);
    m1 = std::max(1, std::min(m1, m));
    return {m1, m - m1};
}

TwoStageResult two_stage_sample(const PopulationGrid& pop, int m1, int m2,
                                SamplingMode mode, const WeightFitter& fitter,
                                std::uint64_t seed, int retry_budget) {
    if (m1 < 1) throw std::invalid_argument("two_stage_sample: m1 must be >= 1");
    if (m2 < 0) throw std::invalid_argument("two_stage_sample: m2 must be >= 0");
    if (!pop.usable_for_sampling())
        throw std::invalid_argument("two_stage_sample: population has no nonempty cell");

    const int cells = pop.grid.cell_count();
    WeightField stage1;
    stage1.stage = 1;
    stage1.values.assign(cells, 1.0);

    Rng rng(seed);
    TwoStageResult result;
    for (int attempt = 0;; ++attempt) {
        if (attempt >= retry_budget)
            throw SamplingExhausted(0, "two_stage_sample: no nonempty network in stage 1 "
                                       "after " + std::to_string(retry_budget) + " attempts");
        SampleLog log;
        log.grid = pop.grid;
        log.mode = mode;
        acs_continue(pop, stage1, m1, rng, log);
        if (log.observed_nonempty_networks() >= 1) {
            result.log = std::move(log);
            result.stage1_retries = attempt;
            break;
        }
    }

    if (m2 == 0) return result;

    WeightField stage2;
    stage2.stage = 2;
    stage2.values = fitter(result.log);
    if (static_cast<int>(stage2.values.size()) != cells)
        throw std::invalid_argument("two_stage_sample: fitter returned wrong weight length");
    // the stage-1 sample must not be drawn again, and its visited borders are
    // known empty
    const auto sampled = result.log.sampled_cells();
    const auto borders = result.log.visited_borders();
    for (int c = 0; c < cells; ++c)
        if (sampled[c] || borders[c]) stage2.values[c] = 0.0;

    acs_continue(pop, stage2, m2, rng, result.log);
    return result;
}

TwoStageResult two_stage_sample(const PopulationGrid& pop, int m1, int m2,
                                SamplingMode mode, const McmcConfig& fit_config,
                                std::uint64_t seed, int retry_budget) {
    const CovariateField& cov = pop.covariates;
    const std::uint64_t fit_seed = mix_seed(seed, 0x5741474554ULL);
    WeightFitter fitter = [&cov, &fit_config, fit_seed](const SampleLog& stage1_log) {
        const auto chains = run_chains(stage1_log, cov, fit_config, fit_seed);
        return pooled_mean_eta(chains);
    };
    return two_stage_sample(pop, m1, m2, mode, fitter, seed, retry_budget);
}

} // namespace acsbayes
