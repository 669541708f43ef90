#include "acsbayes/covariates.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "acsbayes/errors.hpp"
#include "acsbayes/rng.hpp"

namespace acsbayes {

CovariateField make_covariate_field(const GridSpec& grid,
                                    const std::vector<std::vector<double>>& columns,
                                    bool center) {
    const int m = grid.cell_count();
    CovariateField field;
    field.k = static_cast<int>(columns.size());
    field.centering.assign(field.k, 0.0);
    for (int j = 0; j < field.k; ++j) {
        if (static_cast<int>(columns[j].size()) != m)
            throw std::invalid_argument("make_covariate_field: column length != cell count");
        for (double v : columns[j])
            if (!std::isfinite(v))
                throw std::invalid_argument("make_covariate_field: non-finite covariate");
        if (center) {
            double mean = 0.0;
            for (double v : columns[j]) mean += v;
            field.centering[j] = mean / m;
        }
    }
    field.values.assign(static_cast<std::size_t>(m) * field.dim(), 0.0);
    for (int c = 0; c < m; ++c) {
        double* row = field.values.data() + static_cast<std::size_t>(c) * field.dim();
        row[0] = 1.0;
        for (int j = 0; j < field.k; ++j) row[j + 1] = columns[j][c] - field.centering[j];
    }
    return field;
}

void GpConfig::validate() const {
    if (!(length_scale > 0.0) || !std::isfinite(length_scale))
        throw std::invalid_argument("GpConfig: length_scale must be positive");
    if (!(variance >= 0.0) || !std::isfinite(variance))
        throw std::invalid_argument("GpConfig: variance must be >= 0");
    if (!std::isfinite(mean)) throw std::invalid_argument("GpConfig: mean must be finite");
}

namespace {

// in-place lower Cholesky; returns false on a non-positive pivot
bool cholesky(std::vector<double>& a, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[static_cast<std::size_t>(i) * n + k] *
                     a[static_cast<std::size_t>(j) * n + k];
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return false;
                a[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
            } else {
                a[static_cast<std::size_t>(i) * n + j] =
                    s / a[static_cast<std::size_t>(j) * n + j];
            }
        }
    }
    return true;
}

} // namespace

std::vector<double> simulate_covariate(const GridSpec& grid, const GpConfig& cfg,
                                       std::uint64_t seed) {
    cfg.validate();
    const int m = grid.cell_count();
    if (m > 10000)
        throw std::invalid_argument(
            "simulate_covariate: dense factorization is limited to 10000 cells");

    if (cfg.variance == 0.0) return std::vector<double>(m, cfg.mean);

    Rng rng(seed);
    std::vector<double> z(m);
    for (int i = 0; i < m; ++i) z[i] = rng.normal();

    const double inv2l2 = 1.0 / (2.0 * cfg.length_scale * cfg.length_scale);
    std::vector<double> cov;
    std::ostringstream attempts;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const double jitter = attempt == 0 ? 0.0
                                           : 1e-10 * cfg.variance * std::pow(10.0, attempt - 1);
        cov.assign(static_cast<std::size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double ri = grid.row_of(i), ci = grid.col_of(i);
            for (int j = 0; j <= i; ++j) {
                const double dr = ri - grid.row_of(j);
                const double dc = ci - grid.col_of(j);
                const double v = cfg.variance * std::exp(-(dr * dr + dc * dc) * inv2l2);
                cov[static_cast<std::size_t>(i) * m + j] = v;
            }
            cov[static_cast<std::size_t>(i) * m + i] += jitter;
        }
        if (cholesky(cov, m)) {
            std::vector<double> field(m, cfg.mean);
            for (int i = 0; i < m; ++i) {
                double s = 0.0;
                for (int j = 0; j <= i; ++j)
                    s += cov[static_cast<std::size_t>(i) * m + j] * z[j];
                field[i] += s;
            }
            return field;
        }
        attempts << (attempt ? ", " : "") << jitter;
    }
    throw NumericalError("simulate_covariate: covariance factorization failed after "
                         "jitter ladder [" + attempts.str() + "]");
}

} // namespace acsbayes
