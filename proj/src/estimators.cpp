#include "acsbayes/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "acsbayes/errors.hpp"

namespace acsbayes {

namespace {

// type-7 empirical quantile (linear interpolation) on sorted data
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * (n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double w = h - lo;
    return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

} // namespace

PosteriorSummary summarize_draws(std::span<const double> draws) {
    if (draws.empty()) throw std::invalid_argument("summarize_draws: no draws");
    std::vector<double> sorted(draws.begin(), draws.end());
    std::sort(sorted.begin(), sorted.end());
    PosteriorSummary s;
    s.n_draws = static_cast<long>(sorted.size());
    double mean = 0.0;
    for (double v : sorted) mean += v;
    s.mean = mean / sorted.size();
    s.median = quantile_sorted(sorted, 0.5);
    s.ci_low = quantile_sorted(sorted, 0.025);
    s.ci_high = quantile_sorted(sorted, 0.975);
    return s;
}

PosteriorSummary total_posterior(std::span<const ChainOutput> chains) {
    std::vector<double> pooled;
    for (const auto& ch : chains)
        for (long t : ch.total_draws) pooled.push_back(static_cast<double>(t));
    if (pooled.empty()) throw std::invalid_argument("total_posterior: no retained draws");
    return summarize_draws(pooled);
}

RajEstimate raj_estimator(const SampleLog& log, const GridSpec& grid) {
    if (log.mode != SamplingMode::network)
        throw std::invalid_argument("raj_estimator: requires network-mode sampling");
    if (log.m2 != 0)
        throw std::invalid_argument("raj_estimator: requires a single-stage constant-weight design");
    if (log.draws.empty()) throw std::invalid_argument("raj_estimator: empty log");
    const int m_cells = grid.cell_count();

    // Sequential PPS without replacement over networks with mass proportional
    // to size (constant cell weights). With W the total mass and R_j the mass
    // removed before draw j,
    //   d_j = sum_{k<j} t_k + t_j (W - R_j) / w_j
    // is unbiased for the total at every j; the estimate averages the d_j.
    const int m = log.draw_count();
    std::vector<double> d(m);
    double running_total = 0.0;
    double removed = 0.0;
    for (int j = 0; j < m; ++j) {
        const auto& rec = log.draws[j];
        const double w_j = static_cast<double>(rec.size());
        const double t_j = static_cast<double>(rec.total());
        d[j] = running_total + t_j * (m_cells - removed) / w_j;
        running_total += t_j;
        removed += static_cast<double>(rec.removed.size());
    }
    RajEstimate est;
    for (double v : d) est.estimate += v;
    est.estimate /= m;
    if (m > 1) {
        double ss = 0.0;
        for (double v : d) ss += (v - est.estimate) * (v - est.estimate);
        est.variance = ss / (m - 1) / m;
    }
    const double half = 1.959963984540054 * std::sqrt(est.variance);
    est.ci_low = est.estimate - half;
    est.ci_high = est.estimate + half;
    return est;
}

namespace {

// spectral density at frequency zero via Bartlett-windowed autocovariances,
// bandwidth 0.1 of the segment length
double spectral_variance(std::span<const double> x) {
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    const int bandwidth = std::max<int>(1, static_cast<int>(0.1 * n));
    double s = 0.0;
    for (int lag = 0; lag <= bandwidth; ++lag) {
        double acov = 0.0;
        for (std::size_t i = lag; i < n; ++i) acov += (x[i] - mean) * (x[i - lag] - mean);
        acov /= n;
        if (lag == 0)
            s += acov;
        else
            s += 2.0 * (1.0 - static_cast<double>(lag) / (bandwidth + 1)) * acov;
    }
    return s;
}

} // namespace

double geweke_z(std::span<const double> draws, double frac_a, double frac_b) {
    const std::size_t n = draws.size();
    if (n < 100) throw std::invalid_argument("geweke_z: need at least 100 draws");
    if (!(frac_a > 0.0) || !(frac_b > 0.0) || !(frac_a + frac_b < 1.0))
        throw std::invalid_argument("geweke_z: fractions must be positive with sum < 1");
    const std::size_t n_a = static_cast<std::size_t>(frac_a * n);
    const std::size_t n_b = static_cast<std::size_t>(frac_b * n);
    const auto seg_a = draws.first(n_a);
    const auto seg_b = draws.last(n_b);

    double mean_a = 0.0, mean_b = 0.0;
    for (double v : seg_a) mean_a += v;
    for (double v : seg_b) mean_b += v;
    mean_a /= n_a;
    mean_b /= n_b;
    const double var_a = spectral_variance(seg_a);
    const double var_b = spectral_variance(seg_b);
    const double se2 = var_a / n_a + var_b / n_b;
    if (!(se2 > 0.0))
        throw NumericalError("geweke_z: zero-variance segment, diagnostic undefined");
    return (mean_a - mean_b) / std::sqrt(se2);
}

MetricsSummary summarize_metrics(
    std::span<const std::pair<PosteriorSummary, double>> estimates) {
    if (estimates.empty()) throw std::invalid_argument("summarize_metrics: no replications");
    MetricsSummary ms;
    double sq = 0.0;
    long covered = 0;
    for (const auto& [summary, truth] : estimates) {
        if (!(truth > 0.0))
            throw std::invalid_argument("summarize_metrics: true value must be positive");
        const double rel = (summary.mean - truth) / truth;
        ms.rb += rel;
        ms.rae += std::fabs(rel);
        sq += rel * rel;
        ms.rw += (summary.ci_high - summary.ci_low) / truth;
        covered += (summary.ci_low <= truth && truth <= summary.ci_high) ? 1 : 0;
    }
    const double n = static_cast<double>(estimates.size());
    ms.rb /= n;
    ms.rae /= n;
    ms.rw /= n;
    ms.rrmse = std::sqrt(sq / n);
    ms.coverage = 100.0 * covered / n;
    return ms;
}

} // namespace acsbayes
