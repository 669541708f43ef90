#ifndef ACSBAYES_COVARIATES_HPP
#define ACSBAYES_COVARIATES_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "acsbayes/grid.hpp"

namespace acsbayes {

// Per-cell design rows v_c = (1, v_1(c), ..., v_k(c)), stored row-major.
struct CovariateField {
    int k = 0;                     // covariates, excluding the intercept
    std::vector<double> values;    // M x (k+1)
    std::vector<double> centering; // offset subtracted per covariate (0 = raw)

    int dim() const { return k + 1; }
    std::span<const double> row(int cell) const {
        return {values.data() + static_cast<std::size_t>(cell) * dim(),
                static_cast<std::size_t>(dim())};
    }
    double linear(int cell, std::span<const double> coef) const {
        const auto v = row(cell);
        double s = 0.0;
        for (int j = 0; j < dim(); ++j) s += v[j] * coef[j];
        return s;
    }
};

// Assemble a field from covariate columns (each of length M); the leading
// intercept column is added here. center=true subtracts each column's mean
// and records the offsets for reuse on prediction grids.
CovariateField make_covariate_field(const GridSpec& grid,
                                    const std::vector<std::vector<double>>& columns,
                                    bool center = false);

// Stationary Gaussian random field on the lattice cell centers.
struct GpConfig {
    double length_scale = 3.0; // in cell units
    double variance = 1.0;
    double mean = 0.0;

    void validate() const;
};

// One draw of the field: mean + L z with covariance
// variance * exp(-d^2 / (2 length_scale^2)), d the Euclidean distance between
// cell centers. Dense Cholesky; factorization failures retry with growing
// jitter and report the ladder if all attempts fail.
std::vector<double> simulate_covariate(const GridSpec& grid, const GpConfig& cfg,
                                       std::uint64_t seed);

} // namespace acsbayes

#endif
