#include "acsbayes/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace acsbayes {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log1m_exp_neg(double x) {
    // x > 0; branch keeps precision for tiny and large x alike
    if (x > 0.693147180559945) return std::log1p(-std::exp(-x));
    return std::log(-std::expm1(-x));
}

double log_choose(long n, long k) {
    if (k < 0 || k > n) return kNegInf;
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

TruncatedPoisson::TruncatedPoisson(double lambda) : lambda_(lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::domain_error("TruncatedPoisson: lambda must be positive and finite");
    log_norm_ = log1m_exp_neg(lambda);
}

double TruncatedPoisson::log_pmf(long k) const {
    if (k < 1) return kNegInf;
    return -lambda_ + static_cast<double>(k) * std::log(lambda_) -
           std::lgamma(static_cast<double>(k) + 1.0) - log_norm_;
}

long TruncatedPoisson::sample(Rng& rng) const {
    if (lambda_ >= 0.1) {
        // expected retries 1/(1-e^{-lambda}) <= ~10.5
        for (;;) {
            const long k = rng.poisson(lambda_);
            if (k >= 1) return k;
        }
    }
    // small lambda: inverse cdf on a capped support; tail beyond the cap is
    // far below 2^-60 for lambda < 0.1
    const double u = rng.uniform();
    double cum = 0.0;
    for (long k = 1; k <= 64; ++k) {
        cum += std::exp(log_pmf(k));
        if (u < cum) return k;
    }
    return 64;
}

TruncatedBinomial::TruncatedBinomial(int n, double p) : n_(n), p_(p) {
    if (n < 1) throw std::domain_error("TruncatedBinomial: n must be >= 1");
    if (!(p > 0.0) || !(p < 1.0) || !std::isfinite(p))
        throw std::domain_error("TruncatedBinomial: p must lie in (0,1)");
    // log(1 - (1-p)^n) via log((1-p)^n) = n log1p(-p)
    log_norm_ = log1m_exp_neg(-static_cast<double>(n) * std::log1p(-p));
}

double TruncatedBinomial::log_pmf(int k) const {
    if (k < 1 || k > n_) return kNegInf;
    return log_choose(n_, k) + k * std::log(p_) + (n_ - k) * std::log1p(-p_) - log_norm_;
}

int TruncatedBinomial::sample(Rng& rng) const {
    if (n_ == 1) return 1;
    const double u = rng.uniform();
    double cum = 0.0;
    for (int k = 1; k <= n_; ++k) {
        cum += std::exp(log_pmf(k));
        if (u < cum) return k;
    }
    return n_;
}

ShiftedMultinomial::ShiftedMultinomial(int total, int bins) : total_(total), bins_(bins) {
    if (total < 0) throw std::domain_error("ShiftedMultinomial: total must be >= 0");
    if (bins < 1) throw std::domain_error("ShiftedMultinomial: bins must be >= 1");
}

double ShiftedMultinomial::log_pmf(std::span<const int> y) const {
    if (static_cast<int>(y.size()) != bins_) return kNegInf;
    long sum = 0;
    for (int v : y) {
        if (v < 1) return kNegInf;
        sum += v;
    }
    if (sum != static_cast<long>(total_) + bins_) return kNegInf;
    double lp = std::lgamma(static_cast<double>(total_) + 1.0);
    for (int v : y) lp -= std::lgamma(static_cast<double>(v));
    lp -= static_cast<double>(total_) * std::log(static_cast<double>(bins_));
    return lp;
}

std::vector<int> ShiftedMultinomial::sample(Rng& rng) const {
    std::vector<int> y(bins_, 1);
    for (int t = 0; t < total_; ++t) ++y[rng.uniform_int(bins_)];
    return y;
}

void PriorConfig::validate() const {
    const bool ok = sigma2_theta > 0 && a_alpha > 0 && b_alpha > 0 && a_beta > 0 &&
                    b_beta > 0 && sigma2_rho > 0;
    if (!ok) throw std::invalid_argument("PriorConfig: all hyperparameters must be positive");
}

double beta_log_pdf(double x, double a, double b) {
    if (!(x > 0.0) || !(x < 1.0)) return kNegInf;
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
           (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double normal_iid_log_pdf(std::span<const double> x, double sigma2) {
    double q = 0.0;
    for (double v : x) q += v * v;
    const double n = static_cast<double>(x.size());
    return -0.5 * q / sigma2 -
           0.5 * n * std::log(6.283185307179586476925286766559 * sigma2);
}

} // namespace acsbayes
