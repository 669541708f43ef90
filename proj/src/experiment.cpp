#include "acsbayes/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "acsbayes/errors.hpp"
#include "acsbayes/io.hpp"

namespace acsbayes {

using nlohmann::json;

void ExperimentConfig::validate() const {
    if (spec_version != 1) throw ConfigError("config: unsupported spec_version");
    if (m < 2) throw ConfigError("config: m must be >= 2");
    if (!(stage1_fraction > 0.0) || stage1_fraction > 1.0)
        throw ConfigError("config: stage1_fraction must lie in (0,1]");
    if (std::lround(stage1_fraction * m) < 1 && stage1_fraction * m < 0.5)
        throw ConfigError("config: stage1_fraction*m rounds below 1");
    if (replications < 1) throw ConfigError("config: replications must be >= 1");
    if (scenario.kind == ScenarioConfig::Kind::generate) {
        if (scenario.rows < 1 || scenario.cols < 1) throw ConfigError("config: bad grid size");
        if (!(scenario.alpha > 0.0 && scenario.alpha < 1.0))
            throw ConfigError("config: alpha must lie in (0,1)");
        if (!(scenario.beta > 0.0 && scenario.beta < 1.0))
            throw ConfigError("config: beta must lie in (0,1)");
        if (scenario.theta.empty()) throw ConfigError("config: theta must be non-empty");
    } else if (scenario.path.empty()) {
        throw ConfigError("config: load scenario needs a path");
    }
    if (condition_networks_sampled && *condition_networks_sampled < 1)
        throw ConfigError("config: condition_networks_sampled must be >= 1");
    try {
        mcmc.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

namespace {

SamplingMode mode_from_string(const std::string& s) {
    if (s == "network") return SamplingMode::network;
    if (s == "cluster") return SamplingMode::cluster;
    throw ConfigError("config: mode must be network or cluster");
}

McmcConfig mcmc_from_json(const json& j) {
    McmcConfig cfg;
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.burn_in = j.value("burn_in", cfg.burn_in);
    cfg.thin = j.value("thin", cfg.thin);
    cfg.n_chains = j.value("chains", cfg.n_chains);
    cfg.prop_scale_theta = j.value("prop_scale_theta", cfg.prop_scale_theta);
    cfg.prop_scale_rho = j.value("prop_scale_rho", cfg.prop_scale_rho);
    if (j.contains("theta_proposal")) {
        const std::string p = j.at("theta_proposal").get<std::string>();
        if (p == "identity")
            cfg.theta_proposal = ThetaProposal::identity;
        else if (p == "inverse_gram")
            cfg.theta_proposal = ThetaProposal::inverse_gram;
        else
            throw ConfigError("config: theta_proposal must be identity or inverse_gram");
    }
    cfg.x_window = j.value("x_window", cfg.x_window);
    cfg.latent_moves_per_sweep = j.value("latent_moves_per_sweep", cfg.latent_moves_per_sweep);
    if (j.contains("alloc_weight_source")) {
        const std::string s = j.at("alloc_weight_source").get<std::string>();
        if (s == "lambda")
            cfg.alloc_weight_source = AllocWeightSource::lambda;
        else if (s == "occupancy")
            cfg.alloc_weight_source = AllocWeightSource::occupancy;
        else
            throw ConfigError("config: alloc_weight_source must be lambda or occupancy");
    }
    cfg.alloc_retry_budget = j.value("alloc_retry_budget", cfg.alloc_retry_budget);
    if (j.contains("priors")) {
        const json& p = j.at("priors");
        cfg.priors.sigma2_theta = p.value("sigma2_theta", cfg.priors.sigma2_theta);
        cfg.priors.a_alpha = p.value("a_alpha", cfg.priors.a_alpha);
        cfg.priors.b_alpha = p.value("b_alpha", cfg.priors.b_alpha);
        cfg.priors.a_beta = p.value("a_beta", cfg.priors.a_beta);
        cfg.priors.b_beta = p.value("b_beta", cfg.priors.b_beta);
        cfg.priors.sigma2_rho = p.value("sigma2_rho", cfg.priors.sigma2_rho);
    }
    return cfg;
}

json mcmc_to_json(const McmcConfig& cfg) {
    return json{
        {"iterations", cfg.iterations},
        {"burn_in", cfg.burn_in},
        {"thin", cfg.thin},
        {"chains", cfg.n_chains},
        {"prop_scale_theta", cfg.prop_scale_theta},
        {"prop_scale_rho", cfg.prop_scale_rho},
        {"theta_proposal",
         cfg.theta_proposal == ThetaProposal::identity ? "identity" : "inverse_gram"},
        {"x_window", cfg.x_window},
        {"latent_moves_per_sweep", cfg.latent_moves_per_sweep},
        {"alloc_weight_source",
         cfg.alloc_weight_source == AllocWeightSource::lambda ? "lambda" : "occupancy"},
        {"alloc_retry_budget", cfg.alloc_retry_budget},
        {"priors",
         {{"sigma2_theta", cfg.priors.sigma2_theta},
          {"a_alpha", cfg.priors.a_alpha},
          {"b_alpha", cfg.priors.b_alpha},
          {"a_beta", cfg.priors.a_beta},
          {"b_beta", cfg.priors.b_beta},
          {"sigma2_rho", cfg.priors.sigma2_rho}}}};
}

} // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.spec_version = j.value("spec_version", 0);
    if (j.contains("scenario")) {
        const json& s = j.at("scenario");
        const std::string kind = s.value("type", "generate");
        if (kind == "generate") {
            cfg.scenario.kind = ScenarioConfig::Kind::generate;
            cfg.scenario.rows = s.value("rows", cfg.scenario.rows);
            cfg.scenario.cols = s.value("cols", cfg.scenario.cols);
            cfg.scenario.alpha = s.value("alpha", cfg.scenario.alpha);
            cfg.scenario.beta = s.value("beta", cfg.scenario.beta);
            if (s.contains("theta")) cfg.scenario.theta = s.at("theta").get<std::vector<double>>();
            if (s.contains("gp")) {
                cfg.scenario.gp.length_scale = s.at("gp").value("length_scale", 3.0);
                cfg.scenario.gp.variance = s.at("gp").value("variance", 1.0);
                cfg.scenario.gp.mean = s.at("gp").value("mean", 0.0);
            }
            cfg.scenario.new_population_each_replication =
                s.value("new_population_each_replication", false);
        } else if (kind == "load") {
            cfg.scenario.kind = ScenarioConfig::Kind::load;
            cfg.scenario.path = s.value("path", "");
            cfg.scenario.center_covariates = s.value("center_covariates", false);
        } else {
            throw ConfigError("config: scenario.type must be generate or load");
        }
    }
    cfg.m = j.value("m", cfg.m);
    cfg.stage1_fraction = j.value("stage1_fraction", cfg.stage1_fraction);
    if (j.contains("mode")) cfg.mode = mode_from_string(j.at("mode").get<std::string>());
    cfg.replications = j.value("replications", cfg.replications);
    if (j.contains("mcmc")) cfg.mcmc = mcmc_from_json(j.at("mcmc"));
    if (j.contains("baselines"))
        for (const auto& b : j.at("baselines"))
            if (b.get<std::string>() == "raj") cfg.baseline_raj = true;
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    if (j.contains("condition_networks_sampled") && !j.at("condition_networks_sampled").is_null())
        cfg.condition_networks_sampled = j.at("condition_networks_sampled").get<int>();
    cfg.condition_retry_budget = j.value("condition_retry_budget", cfg.condition_retry_budget);
    cfg.stage1_retry_budget = j.value("stage1_retry_budget", cfg.stage1_retry_budget);
    cfg.write_draws = j.value("write_draws", cfg.write_draws);
    cfg.write_samples = j.value("write_samples", cfg.write_samples);
    cfg.validate();
    return cfg;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["spec_version"] = cfg.spec_version;
    if (cfg.scenario.kind == ScenarioConfig::Kind::generate) {
        j["scenario"] = {{"type", "generate"},
                         {"rows", cfg.scenario.rows},
                         {"cols", cfg.scenario.cols},
                         {"alpha", cfg.scenario.alpha},
                         {"beta", cfg.scenario.beta},
                         {"theta", cfg.scenario.theta},
                         {"gp",
                          {{"length_scale", cfg.scenario.gp.length_scale},
                           {"variance", cfg.scenario.gp.variance},
                           {"mean", cfg.scenario.gp.mean}}},
                         {"new_population_each_replication",
                          cfg.scenario.new_population_each_replication}};
    } else {
        j["scenario"] = {{"type", "load"},
                         {"path", cfg.scenario.path},
                         {"center_covariates", cfg.scenario.center_covariates}};
    }
    j["m"] = cfg.m;
    j["stage1_fraction"] = cfg.stage1_fraction;
    j["mode"] = cfg.mode == SamplingMode::network ? "network" : "cluster";
    j["replications"] = cfg.replications;
    j["mcmc"] = mcmc_to_json(cfg.mcmc);
    j["baselines"] = cfg.baseline_raj ? json::array({"raj"}) : json::array();
    j["master_seed"] = cfg.master_seed;
    if (cfg.condition_networks_sampled)
        j["condition_networks_sampled"] = *cfg.condition_networks_sampled;
    else
        j["condition_networks_sampled"] = nullptr;
    j["condition_retry_budget"] = cfg.condition_retry_budget;
    j["stage1_retry_budget"] = cfg.stage1_retry_budget;
    j["write_draws"] = cfg.write_draws;
    j["write_samples"] = cfg.write_samples;
    return j.dump(2);
}

namespace {

PopulationGrid make_scenario_population(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& sc = cfg.scenario;
    if (sc.kind == ScenarioConfig::Kind::load)
        return load_population_csv(sc.path, sc.center_covariates);
    const GridSpec grid{sc.rows, sc.cols};
    const auto column = simulate_covariate(grid, sc.gp, mix_seed(seed, 0xC0F));
    std::vector<std::vector<double>> columns;
    const int need = static_cast<int>(sc.theta.size()) - 1;
    for (int j = 0; j < need; ++j) {
        if (j == 0)
            columns.push_back(column);
        else {
            std::vector<double> extra = column;
            for (double& v : extra) v = std::pow(v, j + 1);
            columns.push_back(std::move(extra));
        }
    }
    const CovariateField cov = make_covariate_field(grid, columns);
    ModelParams params;
    params.theta = sc.theta;
    params.alpha = sc.alpha;
    params.beta = sc.beta;
    return generate_population(grid, cov, params, {}, mix_seed(seed, 0x90D));
}

struct RepOutput {
    ReplicationResult res;
    std::vector<ChainOutput> chains;
    SampleLog log;
};

RepOutput run_replication(const ExperimentConfig& cfg, const PopulationGrid& shared_pop,
                          int rep) {
    const std::uint64_t rep_seed = mix_seed(cfg.master_seed, static_cast<std::uint64_t>(rep));
    RepOutput out;
    const bool fresh_pop = cfg.scenario.kind == ScenarioConfig::Kind::generate &&
                           cfg.scenario.new_population_each_replication;
    PopulationGrid local_pop;
    const PopulationGrid& pop =
        fresh_pop ? (local_pop = make_scenario_population(cfg, mix_seed(rep_seed, 0xB0B)),
                     local_pop)
                  : shared_pop;
    out.res.true_total = static_cast<double>(pop.true_total);

    const auto [m1, m2] = split_stage_sizes(cfg.m, cfg.stage1_fraction);

    TwoStageResult sample;
    bool matched = false;
    for (int attempt = 0; attempt < cfg.condition_retry_budget && !matched; ++attempt) {
        sample = two_stage_sample(pop, m1, m2, cfg.mode, cfg.mcmc,
                                  mix_seed(rep_seed, 0x5A + attempt),
                                  cfg.stage1_retry_budget);
        matched = !cfg.condition_networks_sampled ||
                  sample.log.observed_nonempty_networks() == *cfg.condition_networks_sampled;
    }
    if (!matched)
        throw SamplingExhausted(0, "conditioning budget exhausted: never drew a sample with " +
                                       std::to_string(*cfg.condition_networks_sampled) +
                                       " nonempty networks");
    out.log = std::move(sample.log);
    out.res.nonempty_networks_sampled = out.log.observed_nonempty_networks();

    out.chains = run_chains(out.log, pop.covariates, cfg.mcmc, mix_seed(rep_seed, 0xF17));
    out.res.total = total_posterior(out.chains);
    std::vector<double> pooled_a, pooled_b;
    for (const auto& ch : out.chains) {
        pooled_a.insert(pooled_a.end(), ch.alpha_draws.begin(), ch.alpha_draws.end());
        pooled_b.insert(pooled_b.end(), ch.beta_draws.begin(), ch.beta_draws.end());
    }
    out.res.alpha = summarize_draws(pooled_a);
    out.res.beta = summarize_draws(pooled_b);

    try {
        const auto& ch = out.chains.front();
        std::vector<double> t(ch.total_draws.begin(), ch.total_draws.end());
        out.res.geweke = {geweke_z(t), geweke_z(ch.alpha_draws), geweke_z(ch.beta_draws)};
    } catch (const std::exception&) {
        out.res.geweke.clear(); // degenerate chains have no diagnostic
    }

    if (cfg.baseline_raj) {
        WeightField constant;
        constant.stage = 1;
        constant.values.assign(pop.grid.cell_count(), 1.0);
        const SampleLog raj_log =
            acs_draw(pop, constant, cfg.m, SamplingMode::network, mix_seed(rep_seed, 0x4A5));
        out.res.raj = raj_estimator(raj_log, pop.grid);
        out.res.has_raj = true;
    }
    out.res.ok = true;
    return out;
}

std::string metrics_csv_text(const ExperimentResult& result, const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "param,estimator,replications,excluded,rrmse,rae,rb,rw,coverage\n";
    const int used = static_cast<int>(result.replications.size()) - result.excluded;
    for (const auto& [name, ms] : result.metrics) {
        const bool raj = name == "raj_T";
        out << (raj ? "T" : name) << ',' << (raj ? "raj" : "posterior") << ',' << used << ','
            << result.excluded << ',' << format_double(ms.rrmse) << ','
            << format_double(ms.rae) << ',' << format_double(ms.rb) << ','
            << format_double(ms.rw) << ',' << format_double(ms.coverage) << '\n';
    }
    (void)cfg;
    return out.str();
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int threads, bool quiet) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/draws");
    fs::create_directories(out_dir + "/samples");

    PopulationGrid shared_pop;
    const bool fresh_pop = cfg.scenario.kind == ScenarioConfig::Kind::generate &&
                           cfg.scenario.new_population_each_replication;
    if (!fresh_pop) {
        shared_pop = make_scenario_population(cfg, cfg.master_seed);
        if (!shared_pop.usable_for_sampling())
            throw ConfigError("experiment: scenario population has no nonempty cell");
        save_population_csv(shared_pop, out_dir + "/population.csv");
    }

    ExperimentResult result;
    result.replications.resize(cfg.replications);
    std::vector<std::string> failures(cfg.replications);

    std::atomic<int> next{0};
    std::mutex io_mutex;
    auto worker = [&]() {
        for (;;) {
            const int rep = next.fetch_add(1);
            if (rep >= cfg.replications) return;
            try {
                RepOutput rep_out = run_replication(cfg, shared_pop, rep);
                {
                    std::lock_guard<std::mutex> lock(io_mutex);
                    if (!quiet)
                        std::cerr << "replication " << rep << ": T_hat="
                                  << rep_out.res.total.mean << " (true "
                                  << rep_out.res.true_total << ")\n";
                }
                char tag[16];
                std::snprintf(tag, sizeof tag, "rep%04d", rep);
                if (cfg.write_samples)
                    save_sample_log(rep_out.log, out_dir + "/samples/" + tag + ".json");
                if (cfg.write_draws)
                    save_draws_csv(rep_out.chains, out_dir + "/draws/" + tag + ".csv");
                if (rep == 0)
                    export_posterior_map(rep_out.chains, rep_out.log, out_dir + "/map.csv");
                result.replications[rep] = std::move(rep_out.res);
            } catch (const std::exception& e) {
                result.replications[rep].ok = false;
                result.replications[rep].failure = e.what();
                std::lock_guard<std::mutex> lock(io_mutex);
                if (!quiet) std::cerr << "replication " << rep << " failed: " << e.what() << "\n";
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // aggregation is a deterministic fold in replication order
    std::vector<std::pair<PosteriorSummary, double>> est_t, est_a, est_b, est_raj;
    const bool param_truth = cfg.scenario.kind == ScenarioConfig::Kind::generate;
    for (const auto& rep : result.replications) {
        if (!rep.ok) {
            ++result.excluded;
            continue;
        }
        ++result.networks_sampled_histogram[rep.nonempty_networks_sampled];
        est_t.emplace_back(rep.total, rep.true_total);
        if (param_truth) {
            est_a.emplace_back(rep.alpha, cfg.scenario.alpha);
            est_b.emplace_back(rep.beta, cfg.scenario.beta);
        }
        if (rep.has_raj) {
            PosteriorSummary as_summary;
            as_summary.mean = rep.raj.estimate;
            as_summary.median = rep.raj.estimate;
            as_summary.ci_low = rep.raj.ci_low;
            as_summary.ci_high = rep.raj.ci_high;
            as_summary.n_draws = 1;
            est_raj.emplace_back(as_summary, rep.true_total);
        }
    }
    if (est_t.empty())
        throw SamplingExhausted(0, "experiment: every replication failed");
    result.metrics["T"] = summarize_metrics(est_t);
    if (param_truth) {
        result.metrics["alpha"] = summarize_metrics(est_a);
        result.metrics["beta"] = summarize_metrics(est_b);
    }
    if (!est_raj.empty()) result.metrics["raj_T"] = summarize_metrics(est_raj);

    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // bundle
    write_text_file(out_dir + "/metrics.csv", metrics_csv_text(result, cfg));
    json j;
    j["config"] = json::parse(experiment_config_to_json(cfg));
    j["excluded_replications"] = result.excluded;
    json failures_json = json::array();
    for (const auto& rep : result.replications)
        if (!rep.ok) failures_json.push_back(rep.failure);
    j["failures"] = failures_json;
    json hist = json::object();
    for (const auto& [k, v] : result.networks_sampled_histogram)
        hist[std::to_string(k)] = v;
    j["networks_sampled_histogram"] = hist;
    for (const auto& [name, ms] : result.metrics)
        j["metrics"][name] = {{"rrmse", ms.rrmse},
                              {"rae", ms.rae},
                              {"rb", ms.rb},
                              {"rw", ms.rw},
                              {"coverage", ms.coverage}};
    json reps = json::array();
    for (const auto& rep : result.replications) {
        if (!rep.ok) {
            reps.push_back({{"ok", false}, {"failure", rep.failure}});
            continue;
        }
        json r{{"ok", true},
               {"true_total", rep.true_total},
               {"T_mean", rep.total.mean},
               {"T_ci", {rep.total.ci_low, rep.total.ci_high}},
               {"alpha_mean", rep.alpha.mean},
               {"beta_mean", rep.beta.mean},
               {"networks_sampled", rep.nonempty_networks_sampled},
               {"geweke", rep.geweke}};
        if (rep.has_raj)
            r["raj"] = {{"estimate", rep.raj.estimate},
                        {"ci", {rep.raj.ci_low, rep.raj.ci_high}}};
        reps.push_back(r);
    }
    j["replications"] = reps;
    j["seconds"] = result.seconds;
    write_text_file(out_dir + "/summary.json", j.dump(2));
    return result;
}

} // namespace acsbayes
