#ifndef ACSBAYES_EXPERIMENT_HPP
#define ACSBAYES_EXPERIMENT_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acsbayes/covariates.hpp"
#include "acsbayes/estimators.hpp"
#include "acsbayes/mcmc.hpp"
#include "acsbayes/population.hpp"
#include "acsbayes/two_stage.hpp"

namespace acsbayes {

struct ScenarioConfig {
    enum class Kind { generate, load } kind = Kind::generate;
    // generate
    int rows = 20;
    int cols = 20;
    double alpha = 0.1;
    double beta = 0.1;
    std::vector<double> theta{2.7, 0.5};
    GpConfig gp;
    bool new_population_each_replication = false;
    // load
    std::string path;
    bool center_covariates = false;
};

struct ExperimentConfig {
    int spec_version = 1;
    ScenarioConfig scenario;
    int m = 40;
    double stage1_fraction = 0.5;
    SamplingMode mode = SamplingMode::network;
    int replications = 100;
    McmcConfig mcmc;
    bool baseline_raj = false;
    std::uint64_t master_seed = 1;
    std::optional<int> condition_networks_sampled; // resample until matched
    int condition_retry_budget = 500;
    int stage1_retry_budget = 1000;
    bool write_draws = true;
    bool write_samples = true;

    void validate() const;
};

ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct ReplicationResult {
    bool ok = false;
    std::string failure;
    PosteriorSummary total;
    PosteriorSummary alpha;
    PosteriorSummary beta;
    double true_total = 0.0;
    int nonempty_networks_sampled = 0;
    std::vector<double> geweke; // T, alpha, beta of chain 0
    RajEstimate raj;
    bool has_raj = false;
};

struct ExperimentResult {
    std::vector<ReplicationResult> replications;
    std::map<std::string, MetricsSummary> metrics; // T, alpha, beta, raj_T
    std::map<int, int> networks_sampled_histogram;
    int excluded = 0;
    double seconds = 0.0;
};

// Replicated study: per replication draw a two-stage sample, fit, summarize,
// optionally run the design-unbiased baseline on an independent single-stage
// sample; aggregate the comparison criteria. Deterministic in
// (config, master_seed) regardless of thread count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads = 1, bool quiet = false);

} // namespace acsbayes

#endif
