#ifndef ACSBAYES_ESTIMATORS_HPP
#define ACSBAYES_ESTIMATORS_HPP

#include <span>
#include <utility>
#include <vector>

#include "acsbayes/mcmc.hpp"
#include "acsbayes/sampling.hpp"

namespace acsbayes {

struct PosteriorSummary {
    double mean = 0.0;
    double median = 0.0;
    double ci_low = 0.0;  // equal-tailed 95% bounds
    double ci_high = 0.0;
    long n_draws = 0;
};

PosteriorSummary summarize_draws(std::span<const double> draws);

// pooled across chains
PosteriorSummary total_posterior(std::span<const ChainOutput> chains);

// Draw-by-draw unbiased total estimator for sequential without-replacement
// selection proportional to size. Only meaningful for single-stage,
// constant-weight, network-mode logs; anything else raises a design mismatch.
struct RajEstimate {
    double estimate = 0.0;
    double variance = 0.0;
    double ci_low = 0.0; // normal-approximation 95% interval
    double ci_high = 0.0;
};

RajEstimate raj_estimator(const SampleLog& log, const GridSpec& grid);

// Geweke convergence score: difference of early and late segment means over
// the spectral-density-at-zero standard error (Bartlett lag window).
double geweke_z(std::span<const double> draws, double frac_a = 0.1, double frac_b = 0.5);

struct MetricsSummary {
    double rrmse = 0.0;
    double rae = 0.0;
    double rb = 0.0;
    double rw = 0.0;
    double coverage = 0.0; // percent of intervals containing the truth
};

// Frequentist comparison criteria over replications; each entry pairs a
// posterior summary with the true value it estimates.
MetricsSummary summarize_metrics(
    std::span<const std::pair<PosteriorSummary, double>> estimates);

} // namespace acsbayes

#endif
