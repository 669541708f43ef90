#ifndef ACSBAYES_DISTRIBUTIONS_HPP
#define ACSBAYES_DISTRIBUTIONS_HPP

#include <span>
#include <vector>

#include "acsbayes/rng.hpp"

namespace acsbayes {

// log(1 - exp(-x)) for x > 0, stable near both ends
double log1m_exp_neg(double x);

// log of the binomial coefficient C(n, k)
double log_choose(long n, long k);

// Poisson(lambda) conditioned on k >= 1.
// pmf(k) = e^{-lambda} lambda^k / (k! (1 - e^{-lambda}))
class TruncatedPoisson {
public:
    explicit TruncatedPoisson(double lambda);

    double lambda() const { return lambda_; }
    double log_pmf(long k) const;
    long sample(Rng& rng) const;

private:
    double lambda_;
    double log_norm_; // log(1 - e^{-lambda})
};

// Binomial(n, p) conditioned on k >= 1, support {1..n}.
class TruncatedBinomial {
public:
    TruncatedBinomial(int n, double p);

    int n() const { return n_; }
    double p() const { return p_; }
    double log_pmf(int k) const;
    // exact inverse-cdf over the finite support
    int sample(Rng& rng) const;

private:
    int n_;
    double p_;
    double log_norm_; // log(1 - (1-p)^n)
};

// 1 + Multinomial(total, uniform over bins): vectors of length `bins`,
// entries >= 1, summing to total + bins.
class ShiftedMultinomial {
public:
    ShiftedMultinomial(int total, int bins);

    int total() const { return total_; }
    int bins() const { return bins_; }
    double log_pmf(std::span<const int> y) const;
    std::vector<int> sample(Rng& rng) const;

private:
    int total_;
    int bins_;
};

// Hyperparameters of the independent priors.
struct PriorConfig {
    double sigma2_theta = 100.0;
    double a_alpha = 3.0;
    double b_alpha = 15.0;
    double a_beta = 1.0;
    double b_beta = 9.0;
    double sigma2_rho = 100.0;

    void validate() const;
};

// Beta(a, b) log density at x in (0,1)
double beta_log_pdf(double x, double a, double b);

// zero-mean isotropic normal log density up to the usual constant included
double normal_iid_log_pdf(std::span<const double> x, double sigma2);

} // namespace acsbayes

#endif
