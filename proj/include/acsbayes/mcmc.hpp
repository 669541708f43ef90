#ifndef ACSBAYES_MCMC_HPP
#define ACSBAYES_MCMC_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "acsbayes/covariates.hpp"
#include "acsbayes/distributions.hpp"
#include "acsbayes/model_state.hpp"
#include "acsbayes/sampling.hpp"

namespace acsbayes {

enum class ThetaProposal { identity, inverse_gram };
enum class AllocWeightSource { lambda, occupancy };

struct McmcConfig {
    int iterations = 5000;
    int burn_in = 500;
    int thin = 5;
    int n_chains = 1;
    double prop_scale_theta = 0.25; // proposal variance for the theta block
    double prop_scale_rho = 0.25;
    ThetaProposal theta_proposal = ThetaProposal::identity;
    int x_window = 5; // X proposed uniformly on {X +- 1..x_window}
    // the joint latent block is the slow mover; repeating its kernel within a
    // sweep leaves the invariant law unchanged and speeds mixing
    int latent_moves_per_sweep = 3;
    AllocWeightSource alloc_weight_source = AllocWeightSource::lambda;
    int alloc_retry_budget = 100;
    PriorConfig priors;
    bool adapt_scales = true; // tune proposal scales during burn-in only
    // freezing individual blocks; used by oracle tests and fixed-parameter runs
    bool move_theta = true;
    bool move_alpha = true;
    bool move_beta = true;
    // explicit starting point; empty theta / negative rates mean data-driven
    std::vector<double> init_theta;
    double init_alpha = -1.0;
    double init_beta = -1.0;

    int retained_per_chain() const { return (iterations - burn_in) / thin; }
    void validate() const;

    static McmcConfig desk_scale() { return {}; }
    static McmcConfig paper_scale() {
        McmcConfig cfg;
        cfg.iterations = 40100;
        cfg.burn_in = 100;
        cfg.thin = 20;
        cfg.n_chains = 2;
        return cfg;
    }
};

// Everything the fit needs that depends only on (log, covariates).
struct FitContext {
    const SampleLog* log = nullptr;
    const CovariateField* cov = nullptr;
    GridSpec grid;
    SelectionContext sel;
    std::vector<bool> forbidden;   // sampled cells plus visited borders
    std::vector<int> obs_cells;    // nonempty sampled cells
    std::vector<int> obs_counts;   // their counts
    std::vector<int> obs_sizes;    // revealed network sizes
    int x_s = 0;
    int p_s = 0;
    long obs_total = 0;
    std::vector<int> sampled_list; // all sampled cells (for the occupancy fit)
    std::vector<char> sampled_phi; // 1 on nonempty sampled cells
};

FitContext make_fit_context(const SampleLog& log, const CovariateField& cov);

// --- individual blocks (free functions so oracles can drive them directly) ---

// log of the zero-truncated Poisson likelihood over the given cells plus the
// zero-mean normal prior; cells may be empty (prior only)
double theta_log_target(std::span<const double> theta, std::span<const int> cells,
                        std::span<const int> counts, const CovariateField& cov,
                        double sigma2_theta);

// symmetric random-walk block move; chol_lower empty means identity proposal
bool update_theta(std::vector<double>& theta, std::span<const int> cells,
                  std::span<const int> counts, const CovariateField& cov,
                  double sigma2_theta, double scale,
                  std::span<const double> chol_lower, Rng& rng);

// independence move with the near-conjugate Beta proposal; acceptance reduces
// to the ratio of the truncation terms
bool update_alpha(double& alpha, int x, int m_cells, const PriorConfig& priors, Rng& rng);
bool update_beta(double& beta, int p, int x, const PriorConfig& priors, Rng& rng);

double rho_log_target(std::span<const double> rho, std::span<const int> cells,
                      std::span<const char> phi, const CovariateField& cov,
                      double sigma2_rho);
bool update_rho(std::vector<double>& rho, std::span<const int> cells,
                std::span<const char> phi, const CovariateField& cov, double sigma2_rho,
                double scale, std::span<const double> chol_lower, Rng& rng);

// joint latent move: propose X in a +-window, regenerate the unobserved
// component, place it spatially and accept or reject as one block
enum class LatentMove { accepted, rejected, alloc_failed };

LatentMove update_latent(LatentState& state, double& sel_log_cached,
                         const FitContext& ctx, const ModelParams& params,
                         std::span<const double> alloc_weights, const McmcConfig& cfg,
                         Rng& rng);

// latent block target derived from the joint model density (terms that vary
// with the unobserved component), and the matching proposal density
double latent_log_target(const FitContext& ctx, const ModelParams& params,
                         const LatentState& state, double sel_log);
double latent_log_proposal(const FitContext& ctx, const ModelParams& params,
                           const LatentState& state, int x_window);

// full joint log density (selection term, all model layers, priors);
// finite-ness is asserted at every retained iteration
double joint_log_density(const FitContext& ctx, const ModelParams& params,
                         const LatentState& state, double sel_log);

// --- chain driver ---

struct ChainOutput {
    std::vector<std::vector<double>> theta_draws; // row per retained iteration
    std::vector<std::vector<double>> rho_draws;   // empty unless occupancy mode
    std::vector<double> alpha_draws;
    std::vector<double> beta_draws;
    std::vector<int> x_draws;
    std::vector<int> p_draws;
    std::vector<long> total_draws; // T = observed total + latent counts
    double accept_theta = 0.0;
    double accept_alpha = 0.0;
    double accept_beta = 0.0;
    double accept_latent = 0.0;
    double accept_rho = 0.0;
    long alloc_failures = 0;
    std::vector<double> posterior_mean_eta; // per cell, over retained draws
    std::uint64_t seed = 0;
    double seconds = 0.0;

    int retained() const { return static_cast<int>(total_draws.size()); }
};

ChainOutput run_chain(const SampleLog& log, const CovariateField& cov,
                      const McmcConfig& cfg, std::uint64_t seed, int chain_index = 0);

std::vector<ChainOutput> run_chains(const SampleLog& log, const CovariateField& cov,
                                    const McmcConfig& cfg, std::uint64_t seed);

// pooled per-cell posterior mean of the count surface
std::vector<double> pooled_mean_eta(std::span<const ChainOutput> chains);

} // namespace acsbayes

#endif
