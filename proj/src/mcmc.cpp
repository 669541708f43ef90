#include "acsbayes/mcmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "acsbayes/allocation.hpp"
#include "acsbayes/errors.hpp"

namespace acsbayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// proposal support cap: hypotheses with per-cell intensity above e^9.2 (~1e4
// expected individuals in one cell) are rejected outright instead of sampled
constexpr double kMaxLatentLinear = 9.21;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double trunc_pois_log_pmf(double lambda, long k) {
    if (!(lambda > 0.0) || !std::isfinite(lambda) || k < 1) return kNegInf;
    return -lambda + static_cast<double>(k) * std::log(lambda) -
           std::lgamma(static_cast<double>(k) + 1.0) - log1m_exp_neg(lambda);
}

// lower Cholesky of a dense symmetric matrix; ridge added on failure
std::vector<double> chol_or_ridge(std::vector<double> a, int n) {
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> l = a;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            for (int j = 0; j <= i && ok; ++j) {
                double s = l[static_cast<std::size_t>(i) * n + j];
                for (int k = 0; k < j; ++k)
                    s -= l[static_cast<std::size_t>(i) * n + k] *
                         l[static_cast<std::size_t>(j) * n + k];
                if (i == j) {
                    if (s <= 0.0 || !std::isfinite(s)) {
                        ok = false;
                        break;
                    }
                    l[static_cast<std::size_t>(i) * n + j] = std::sqrt(s);
                } else {
                    l[static_cast<std::size_t>(i) * n + j] =
                        s / l[static_cast<std::size_t>(j) * n + j];
                }
            }
        }
        if (ok) {
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) l[static_cast<std::size_t>(i) * n + j] = 0.0;
            return l;
        }
        double trace = 0.0;
        for (int i = 0; i < n; ++i) trace += a[static_cast<std::size_t>(i) * n + i];
        for (int i = 0; i < n; ++i)
            a[static_cast<std::size_t>(i) * n + i] += 1e-8 * (trace > 0 ? trace : 1.0);
    }
    throw NumericalError("proposal covariance factorization failed");
}

// Cholesky factor of (V'V)^{-1} for the block proposals
std::vector<double> inverse_gram_chol(std::span<const int> cells, const CovariateField& cov) {
    const int d = cov.dim();
    std::vector<double> gram(static_cast<std::size_t>(d) * d, 0.0);
    for (int c : cells) {
        const auto v = cov.row(c);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) gram[static_cast<std::size_t>(i) * d + j] += v[i] * v[j];
    }
    // invert via Cholesky of the Gram matrix, then L_inv' L_inv
    std::vector<double> lg = chol_or_ridge(gram, d);
    // forward-solve for the inverse of lg
    std::vector<double> linv(static_cast<std::size_t>(d) * d, 0.0);
    for (int col = 0; col < d; ++col) {
        linv[static_cast<std::size_t>(col) * d + col] = 1.0 / lg[static_cast<std::size_t>(col) * d + col];
        for (int i = col + 1; i < d; ++i) {
            double s = 0.0;
            for (int k = col; k < i; ++k)
                s -= lg[static_cast<std::size_t>(i) * d + k] * linv[static_cast<std::size_t>(k) * d + col];
            linv[static_cast<std::size_t>(i) * d + col] = s / lg[static_cast<std::size_t>(i) * d + i];
        }
    }
    // (V'V)^{-1} = linv' linv
    std::vector<double> inv(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int k = std::max(i, j); k < d; ++k)
                s += linv[static_cast<std::size_t>(k) * d + i] * linv[static_cast<std::size_t>(k) * d + j];
            inv[static_cast<std::size_t>(i) * d + j] = s;
        }
    return chol_or_ridge(std::move(inv), d);
}

void block_step(std::vector<double>& out, std::span<const double> cur, double scale,
                std::span<const double> chol_lower, Rng& rng) {
    const int d = static_cast<int>(cur.size());
    out.assign(cur.begin(), cur.end());
    if (chol_lower.empty()) {
        for (int i = 0; i < d; ++i) out[i] += scale * rng.normal();
        return;
    }
    std::vector<double> z(d);
    for (int i = 0; i < d; ++i) z[i] = rng.normal();
    for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += chol_lower[static_cast<std::size_t>(i) * d + j] * z[j];
        out[i] += scale * s;
    }
}

} // namespace

void McmcConfig::validate() const {
    if (iterations <= burn_in || burn_in < 0) throw ConfigError("mcmc: iterations must exceed burn_in >= 0");
    if (thin < 1) throw ConfigError("mcmc: thin must be >= 1");
    if (n_chains < 1) throw ConfigError("mcmc: n_chains must be >= 1");
    if (x_window < 1) throw ConfigError("mcmc: x_window must be >= 1");
    if (latent_moves_per_sweep < 1)
        throw ConfigError("mcmc: latent_moves_per_sweep must be >= 1");
    if (!(prop_scale_theta > 0.0) || !(prop_scale_rho > 0.0))
        throw ConfigError("mcmc: proposal scales must be positive");
    if (alloc_retry_budget < 1) throw ConfigError("mcmc: alloc_retry_budget must be >= 1");
    priors.validate();
}

FitContext make_fit_context(const SampleLog& log, const CovariateField& cov) {
    FitContext ctx;
    ctx.log = &log;
    ctx.cov = &cov;
    ctx.grid = log.grid;
    if (static_cast<int>(cov.values.size()) != log.grid.cell_count() * cov.dim())
        throw std::invalid_argument("make_fit_context: covariates do not match the log's grid");
    ctx.sel = make_selection_context(log);
    ctx.forbidden = log.forbidden_cells();
    for (const auto& d : log.draws) {
        if (d.nonempty) {
            ctx.obs_cells.insert(ctx.obs_cells.end(), d.members.begin(), d.members.end());
            ctx.obs_counts.insert(ctx.obs_counts.end(), d.counts.begin(), d.counts.end());
            ctx.obs_sizes.push_back(d.size());
        }
        for (int c : d.removed) {
            ctx.sampled_list.push_back(c);
            ctx.sampled_phi.push_back(static_cast<char>(d.nonempty ? 1 : 0));
        }
    }
    // cluster-mode removals include border cells, which are empty
    if (log.mode == SamplingMode::cluster) {
        std::size_t i = 0;
        for (const auto& d : log.draws)
            for (int c : d.removed) {
                const bool is_member =
                    std::find(d.members.begin(), d.members.end(), c) != d.members.end();
                ctx.sampled_phi[i++] = static_cast<char>(d.nonempty && is_member ? 1 : 0);
            }
    }
    ctx.x_s = log.observed_nonempty_cells();
    ctx.p_s = log.observed_nonempty_networks();
    ctx.obs_total = log.observed_total();
    return ctx;
}

double theta_log_target(std::span<const double> theta, std::span<const int> cells,
                        std::span<const int> counts, const CovariateField& cov,
                        double sigma2_theta) {
    double ll = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double lin = cov.linear(cells[i], theta);
        if (lin > 700.0) return kNegInf;
        const double lambda = std::exp(lin);
        ll += -lambda + counts[i] * lin - log1m_exp_neg(lambda);
        if (!std::isfinite(ll)) return kNegInf;
    }
    double q = 0.0;
    for (double t : theta) q += t * t;
    return ll - 0.5 * q / sigma2_theta;
}

bool update_theta(std::vector<double>& theta, std::span<const int> cells,
                  std::span<const int> counts, const CovariateField& cov,
                  double sigma2_theta, double scale,
                  std::span<const double> chol_lower, Rng& rng) {
    std::vector<double> prop;
    block_step(prop, theta, scale, chol_lower, rng);
    const double cur_lt = theta_log_target(theta, cells, counts, cov, sigma2_theta);
    const double prop_lt = theta_log_target(prop, cells, counts, cov, sigma2_theta);
    if (prop_lt == kNegInf) return false;
    if (std::log(rng.uniform_pos()) < prop_lt - cur_lt) {
        theta = std::move(prop);
        return true;
    }
    return false;
}

bool update_alpha(double& alpha, int x, int m_cells, const PriorConfig& priors, Rng& rng) {
    if (x < 1 || x > m_cells) throw std::invalid_argument("update_alpha: x outside 1..M");
    const double prop = rng.beta(x + priors.a_alpha, m_cells - x + priors.b_alpha);
    if (!(prop > 0.0) || !(prop < 1.0)) return false;
    const double cur_trunc = log1m_exp_neg(-m_cells * std::log1p(-alpha));
    const double prop_trunc = log1m_exp_neg(-m_cells * std::log1p(-prop));
    if (std::log(rng.uniform_pos()) < cur_trunc - prop_trunc) {
        alpha = prop;
        return true;
    }
    return false;
}

bool update_beta(double& beta, int p, int x, const PriorConfig& priors, Rng& rng) {
    if (p < 1 || p > x) throw std::invalid_argument("update_beta: p outside 1..x");
    const double prop = rng.beta(p + priors.a_beta, x - p + priors.b_beta);
    if (!(prop > 0.0) || !(prop < 1.0)) return false;
    const double cur_trunc = log1m_exp_neg(-x * std::log1p(-beta));
    const double prop_trunc = log1m_exp_neg(-x * std::log1p(-prop));
    if (std::log(rng.uniform_pos()) < cur_trunc - prop_trunc) {
        beta = prop;
        return true;
    }
    return false;
}

double rho_log_target(std::span<const double> rho, std::span<const int> cells,
                      std::span<const char> phi, const CovariateField& cov,
                      double sigma2_rho) {
    double ll = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double lin = cov.linear(cells[i], rho);
        ll += phi[i] ? -softplus(-lin) : -softplus(lin);
    }
    double q = 0.0;
    for (double r : rho) q += r * r;
    return ll - 0.5 * q / sigma2_rho;
}

bool update_rho(std::vector<double>& rho, std::span<const int> cells,
                std::span<const char> phi, const CovariateField& cov, double sigma2_rho,
                double scale, std::span<const double> chol_lower, Rng& rng) {
    std::vector<double> prop;
    block_step(prop, rho, scale, chol_lower, rng);
    const double cur_lt = rho_log_target(rho, cells, phi, cov, sigma2_rho);
    const double prop_lt = rho_log_target(prop, cells, phi, cov, sigma2_rho);
    if (std::log(rng.uniform_pos()) < prop_lt - cur_lt) {
        rho = std::move(prop);
        return true;
    }
    return false;
}

double latent_log_target(const FitContext& ctx, const ModelParams& params,
                         const LatentState& state, double sel_log) {
    if (sel_log == kNegInf) return kNegInf;
    const int m_cells = ctx.grid.cell_count();
    const int x = ctx.x_s + state.x_bar;
    const int p = ctx.p_s + state.p_bar;

    double lt = sel_log;
    // counts on the hypothesised nonempty cells
    for (std::size_t i = 0; i < state.cells.size(); ++i)
        for (std::size_t j = 0; j < state.cells[i].size(); ++j) {
            const double lin = ctx.cov->linear(state.cells[i][j], params.theta);
            lt += trunc_pois_log_pmf(std::exp(lin), state.counts[i][j]);
        }
    // size layer over all networks, observed and hypothesised
    lt += std::lgamma(static_cast<double>(x - p) + 1.0) -
          static_cast<double>(x - p) * std::log(static_cast<double>(p));
    for (int y : ctx.obs_sizes) lt -= std::lgamma(static_cast<double>(y));
    for (int y : state.sizes) lt -= std::lgamma(static_cast<double>(y));
    // network count layer
    lt += log_choose(x, p) + p * std::log(params.beta) +
          (x - p) * std::log1p(-params.beta) -
          log1m_exp_neg(-static_cast<double>(x) * std::log1p(-params.beta));
    // nonempty cell count layer
    lt += log_choose(m_cells, x) + x * std::log(params.alpha) +
          (m_cells - x) * std::log1p(-params.alpha) -
          log1m_exp_neg(-static_cast<double>(m_cells) * std::log1p(-params.alpha));
    return lt;
}

double latent_log_proposal(const FitContext& ctx, const ModelParams& params,
                           const LatentState& state, int x_window) {
    double lq = -std::log(2.0 * x_window);
    if (state.empty_hypothesis()) return lq;
    lq += TruncatedBinomial(state.x_bar, params.beta).log_pmf(state.p_bar);
    lq += ShiftedMultinomial(state.x_bar - state.p_bar, state.p_bar).log_pmf(state.sizes);
    for (std::size_t i = 0; i < state.cells.size(); ++i)
        for (std::size_t j = 0; j < state.cells[i].size(); ++j) {
            const double lin = ctx.cov->linear(state.cells[i][j], params.theta);
            lq += trunc_pois_log_pmf(std::exp(lin), state.counts[i][j]);
        }
    return lq;
}

double joint_log_density(const FitContext& ctx, const ModelParams& params,
                         const LatentState& state, double sel_log) {
    double lp = latent_log_target(ctx, params, state, sel_log);
    // observed count terms; priors and the occupancy layer are added by callers
    for (std::size_t i = 0; i < ctx.obs_cells.size(); ++i) {
        const double lin = ctx.cov->linear(ctx.obs_cells[i], params.theta);
        lp += trunc_pois_log_pmf(std::exp(lin), ctx.obs_counts[i]);
    }
    return lp;
}

LatentMove update_latent(LatentState& state, double& sel_log_cached,
                         const FitContext& ctx, const ModelParams& params,
                         std::span<const double> alloc_weights, const McmcConfig& cfg,
                         Rng& rng) {
    const int m_cells = ctx.grid.cell_count();
    const int x_cur = ctx.x_s + state.x_bar;
    const int off = rng.uniform_int(2 * cfg.x_window) + 1;
    const int delta = off <= cfg.x_window ? off : -(off - cfg.x_window);
    const int x_prop = x_cur + delta;
    // proposals beyond the support are rejected, not reflected
    if (x_prop < ctx.x_s || x_prop >= m_cells) return LatentMove::rejected;

    LatentState prop;
    prop.x_bar = x_prop - ctx.x_s;
    if (prop.x_bar > 0) {
        prop.p_bar = TruncatedBinomial(prop.x_bar, params.beta).sample(rng);
        prop.sizes = ShiftedMultinomial(prop.x_bar - prop.p_bar, prop.p_bar).sample(rng);
        try {
            prop.cells = allocate_networks(prop.sizes, alloc_weights, ctx.forbidden,
                                           ctx.grid, cfg.alloc_retry_budget, rng);
        } catch (const AllocationFailure&) {
            return LatentMove::alloc_failed;
        }
        prop.counts.resize(prop.p_bar);
        for (int i = 0; i < prop.p_bar; ++i) {
            prop.counts[i].reserve(prop.cells[i].size());
            for (int cell : prop.cells[i]) {
                const double lin = ctx.cov->linear(cell, params.theta);
                if (lin > kMaxLatentLinear) return LatentMove::rejected;
                prop.counts[i].push_back(
                    static_cast<int>(TruncatedPoisson(std::exp(lin)).sample(rng)));
            }
        }
    }

    const double sel_prop = selection_log_prob(ctx.sel, prop);
    if (sel_prop == kNegInf) return LatentMove::rejected;

    const double num = latent_log_target(ctx, params, prop, sel_prop) -
                       latent_log_proposal(ctx, params, prop, cfg.x_window);
    const double den = latent_log_target(ctx, params, state, sel_log_cached) -
                       latent_log_proposal(ctx, params, state, cfg.x_window);
    if (!std::isfinite(num)) return LatentMove::rejected;
    if (std::log(rng.uniform_pos()) < num - den) {
        state = std::move(prop);
        sel_log_cached = sel_prop;
        return LatentMove::accepted;
    }
    return LatentMove::rejected;
}

namespace {

std::vector<double> initial_theta(const FitContext& ctx, const McmcConfig& cfg,
                                  int chain_index) {
    const int d = ctx.cov->dim();
    std::vector<double> theta(d, 0.0);
    const double mean_obs =
        static_cast<double>(ctx.obs_total) / std::max(ctx.x_s, 1);
    const double center = std::log(std::max(mean_obs, 1.05));
    double best = kNegInf;
    double best_t0 = center;
    for (int step = -20; step <= 20; ++step) {
        theta[0] = center + 0.1 * step;
        const double lt = theta_log_target(theta, ctx.obs_cells, ctx.obs_counts,
                                           *ctx.cov, cfg.priors.sigma2_theta);
        if (lt > best) {
            best = lt;
            best_t0 = theta[0];
        }
    }
    std::fill(theta.begin(), theta.end(), 0.0);
    theta[0] = best_t0;
    for (double& t : theta) t += chain_index; // distinct starting points per chain
    return theta;
}

struct AdaptState {
    double scale;
    int attempts = 0;
    int accepts = 0;

    void record(bool accepted, bool adapting) {
        if (!adapting) return;
        ++attempts;
        accepts += accepted ? 1 : 0;
        if (attempts >= 50) {
            const double rate = static_cast<double>(accepts) / attempts;
            if (rate < 0.25) scale *= 0.7;
            if (rate > 0.45) scale *= 1.4;
            scale = std::clamp(scale, 1e-4, 1e3);
            attempts = 0;
            accepts = 0;
        }
    }
};

} // namespace

ChainOutput run_chain(const SampleLog& log, const CovariateField& cov,
                      const McmcConfig& cfg, std::uint64_t seed, int chain_index) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    FitContext ctx = make_fit_context(log, cov);
    if (ctx.p_s < 1)
        throw ChainError("run_chain: the sample must contain at least one nonempty network");

    const int m_cells = ctx.grid.cell_count();
    const int d = cov.dim();
    Rng rng(seed);

    ModelParams params;
    if (cfg.init_theta.empty()) {
        params.theta = initial_theta(ctx, cfg, chain_index);
    } else {
        if (static_cast<int>(cfg.init_theta.size()) != d)
            throw ConfigError("run_chain: init_theta length != covariate dimension");
        params.theta = cfg.init_theta;
    }
    params.alpha = cfg.init_alpha > 0.0
                       ? cfg.init_alpha
                       : std::clamp(static_cast<double>(ctx.x_s) / m_cells, 0.01, 0.5);
    params.beta = cfg.init_beta > 0.0
                      ? cfg.init_beta
                      : std::clamp(static_cast<double>(ctx.p_s) / std::max(ctx.x_s, 1), 0.01, 0.5);
    const bool occupancy = cfg.alloc_weight_source == AllocWeightSource::occupancy;
    if (occupancy) params.rho.assign(d, 0.0);

    std::vector<double> theta_chol; // empty: identity proposal
    if (cfg.theta_proposal == ThetaProposal::inverse_gram)
        theta_chol = inverse_gram_chol(ctx.obs_cells, cov);
    std::vector<double> rho_chol;
    if (occupancy) rho_chol = inverse_gram_chol(ctx.sampled_list, cov);

    // Warm start: draw the initial unobserved component from the model at the
    // starting parameters. Starting from the empty hypothesis instead leaves a
    // visible climb through the first retained draws at short burn-ins.
    LatentState latent;
    {
        std::vector<double> warm_weights(m_cells, 0.0);
        for (int c = 0; c < m_cells; ++c) {
            const double lin = std::min(cov.linear(c, params.theta), 50.0);
            warm_weights[c] = ctx.forbidden[c] ? 0.0 : std::exp(lin);
        }
        for (int attempt = 0; attempt < 20; ++attempt) {
            const int x = TruncatedBinomial(m_cells, params.alpha).sample(rng);
            const int x_bar = std::min(std::max(x, ctx.x_s), m_cells - 1) - ctx.x_s;
            if (x_bar == 0) break;
            LatentState candidate;
            candidate.x_bar = x_bar;
            candidate.p_bar = TruncatedBinomial(x_bar, params.beta).sample(rng);
            candidate.sizes =
                ShiftedMultinomial(x_bar - candidate.p_bar, candidate.p_bar).sample(rng);
            try {
                candidate.cells = allocate_networks(candidate.sizes, warm_weights,
                                                    ctx.forbidden, ctx.grid,
                                                    cfg.alloc_retry_budget, rng);
            } catch (const AllocationFailure&) {
                continue;
            }
            bool ok = true;
            candidate.counts.resize(candidate.p_bar);
            for (int i = 0; i < candidate.p_bar && ok; ++i)
                for (int cell : candidate.cells[i]) {
                    const double lin = cov.linear(cell, params.theta);
                    if (lin > 9.21) {
                        ok = false;
                        break;
                    }
                    candidate.counts[i].push_back(
                        static_cast<int>(TruncatedPoisson(std::exp(lin)).sample(rng)));
                }
            if (!ok || selection_log_prob(ctx.sel, candidate) == kNegInf) continue;
            latent = std::move(candidate);
            break;
        }
    }
    double sel_cur = selection_log_prob(ctx.sel, latent);
    if (sel_cur == kNegInf)
        throw ChainError("run_chain: the log has zero probability under its own record");

    AdaptState theta_adapt{std::sqrt(cfg.prop_scale_theta)};
    AdaptState rho_adapt{std::sqrt(cfg.prop_scale_rho)};

    ChainOutput out;
    out.seed = seed;
    const int retained = cfg.retained_per_chain();
    out.theta_draws.reserve(retained);
    out.total_draws.reserve(retained);
    out.posterior_mean_eta.assign(m_cells, 0.0);

    long acc_theta = 0, acc_alpha = 0, acc_beta = 0, acc_latent = 0, acc_rho = 0;
    long n_theta = 0, n_alpha = 0, n_beta = 0, n_latent = 0, n_rho = 0;

    std::vector<double> alloc_weights(m_cells, 0.0);

    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        const bool adapting = cfg.adapt_scales && iter <= cfg.burn_in;

        if (cfg.move_theta) {
            const bool acc = update_theta(params.theta, ctx.obs_cells, ctx.obs_counts, cov,
                                          cfg.priors.sigma2_theta, theta_adapt.scale,
                                          theta_chol, rng);
            acc_theta += acc;
            ++n_theta;
            theta_adapt.record(acc, adapting);
        }
        if (cfg.move_alpha) {
            const bool acc =
                update_alpha(params.alpha, ctx.x_s + latent.x_bar, m_cells, cfg.priors, rng);
            acc_alpha += acc;
            ++n_alpha;
        }
        if (cfg.move_beta) {
            const bool acc = update_beta(params.beta, ctx.p_s + latent.p_bar,
                                         ctx.x_s + latent.x_bar, cfg.priors, rng);
            acc_beta += acc;
            ++n_beta;
        }
        if (occupancy) {
            const bool acc = update_rho(params.rho, ctx.sampled_list, ctx.sampled_phi, cov,
                                        cfg.priors.sigma2_rho, rho_adapt.scale, rho_chol, rng);
            acc_rho += acc;
            ++n_rho;
            rho_adapt.record(acc, adapting);
            for (int c = 0; c < m_cells; ++c) {
                const double lin = cov.linear(c, params.rho);
                alloc_weights[c] = 1.0 / (1.0 + std::exp(-lin));
            }
        } else {
            for (int c = 0; c < m_cells; ++c) {
                const double lin = std::min(cov.linear(c, params.theta), 50.0);
                alloc_weights[c] = std::exp(lin);
            }
        }
        for (int c = 0; c < m_cells; ++c)
            if (ctx.forbidden[c]) alloc_weights[c] = 0.0;

        for (int move_i = 0; move_i < cfg.latent_moves_per_sweep; ++move_i) {
            const LatentMove move = update_latent(latent, sel_cur, ctx, params,
                                                  alloc_weights, cfg, rng);
            acc_latent += move == LatentMove::accepted;
            out.alloc_failures += move == LatentMove::alloc_failed;
            ++n_latent;
        }

#ifndef NDEBUG
        {
            const std::string err = check_latent_state(latent, ctx.forbidden, ctx.grid);
            if (!err.empty()) throw ChainError("run_chain: latent state invalid: " + err);
        }
#endif

        if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
            long latent_total = 0;
            for (const auto& counts : latent.counts)
                for (int c : counts) latent_total += c;
            const long total = ctx.obs_total + latent_total;

            double joint = joint_log_density(ctx, params, latent, sel_cur) +
                           normal_iid_log_pdf(params.theta, cfg.priors.sigma2_theta) +
                           beta_log_pdf(params.alpha, cfg.priors.a_alpha, cfg.priors.b_alpha) +
                           beta_log_pdf(params.beta, cfg.priors.a_beta, cfg.priors.b_beta);
            if (occupancy)
                joint += rho_log_target(params.rho, ctx.sampled_list, ctx.sampled_phi, cov,
                                        cfg.priors.sigma2_rho);
            if (!std::isfinite(joint)) {
                std::ostringstream dump;
                dump << "run_chain: non-finite joint density at iteration " << iter
                     << " (alpha=" << params.alpha << ", beta=" << params.beta
                     << ", x_bar=" << latent.x_bar << ", p_bar=" << latent.p_bar << ")";
                throw ChainError(dump.str());
            }

            out.theta_draws.push_back(params.theta);
            if (occupancy) out.rho_draws.push_back(params.rho);
            out.alpha_draws.push_back(params.alpha);
            out.beta_draws.push_back(params.beta);
            out.x_draws.push_back(ctx.x_s + latent.x_bar);
            out.p_draws.push_back(ctx.p_s + latent.p_bar);
            out.total_draws.push_back(total);

            for (std::size_t i = 0; i < ctx.obs_cells.size(); ++i)
                out.posterior_mean_eta[ctx.obs_cells[i]] += ctx.obs_counts[i];
            for (std::size_t i = 0; i < latent.cells.size(); ++i)
                for (std::size_t j = 0; j < latent.cells[i].size(); ++j)
                    out.posterior_mean_eta[latent.cells[i][j]] += latent.counts[i][j];
        }
    }

    for (double& v : out.posterior_mean_eta) v /= std::max(out.retained(), 1);
    out.accept_theta = n_theta ? static_cast<double>(acc_theta) / n_theta : 0.0;
    out.accept_alpha = n_alpha ? static_cast<double>(acc_alpha) / n_alpha : 0.0;
    out.accept_beta = n_beta ? static_cast<double>(acc_beta) / n_beta : 0.0;
    out.accept_latent = n_latent ? static_cast<double>(acc_latent) / n_latent : 0.0;
    out.accept_rho = n_rho ? static_cast<double>(acc_rho) / n_rho : 0.0;
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::vector<ChainOutput> run_chains(const SampleLog& log, const CovariateField& cov,
                                    const McmcConfig& cfg, std::uint64_t seed) {
    std::vector<ChainOutput> chains;
    chains.reserve(cfg.n_chains);
    for (int i = 0; i < cfg.n_chains; ++i)
        chains.push_back(run_chain(log, cov, cfg, mix_seed(seed, i), i));
    return chains;
}

std::vector<double> pooled_mean_eta(std::span<const ChainOutput> chains) {
    if (chains.empty()) throw std::invalid_argument("pooled_mean_eta: no chains");
    std::vector<double> mean(chains.front().posterior_mean_eta.size(), 0.0);
    long total = 0;
    for (const auto& ch : chains) total += ch.retained();
    for (const auto& ch : chains) {
        const double w = static_cast<double>(ch.retained()) / total;
        for (std::size_t c = 0; c < mean.size(); ++c)
            mean[c] += w * ch.posterior_mean_eta[c];
    }
    return mean;
}

} // namespace acsbayes
