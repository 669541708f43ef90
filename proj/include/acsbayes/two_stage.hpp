#ifndef ACSBAYES_TWO_STAGE_HPP
#define ACSBAYES_TWO_STAGE_HPP

#include <cstdint>
#include <functional>

#include "acsbayes/mcmc.hpp"
#include "acsbayes/sampling.hpp"

namespace acsbayes {

// Maps a stage-1 log to the per-cell stage-2 weights. The default fitter runs
// the model and returns the posterior mean count surface.
using WeightFitter = std::function<std::vector<double>(const SampleLog&)>;

struct TwoStageResult {
    SampleLog log;
    int stage1_retries = 0;
};

// Two-stage adaptive survey: stage 1 draws m1 networks with constant weights
// (redrawn until it holds a nonempty network, up to retry_budget times), the
// fitter turns that log into weights, and stage 2 draws m2 networks with
// them. Weights on stage-1 sampled cells and visited borders are forced to
// zero before stage 2.
TwoStageResult two_stage_sample(const PopulationGrid& pop, int m1, int m2,
                                SamplingMode mode, const WeightFitter& fitter,
                                std::uint64_t seed, int retry_budget = 1000);

// Convenience overload: the fitter is a model fit with the given settings.
TwoStageResult two_stage_sample(const PopulationGrid& pop, int m1, int m2,
                                SamplingMode mode, const McmcConfig& fit_config,
                                std::uint64_t seed, int retry_budget = 1000);

// Split a total size m into (m1, m2) from the stage-1 fraction; the fraction
// of m is rounded half-to-even.
std::pair<int, int> split_stage_sizes(int m, double stage1_fraction);

} // namespace acsbayes

#endif
