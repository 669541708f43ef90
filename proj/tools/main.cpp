#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "acsbayes/errors.hpp"
#include "acsbayes/experiment.hpp"
#include "acsbayes/io.hpp"
#include "acsbayes/two_stage.hpp"

using namespace acsbayes;

namespace {

struct FitFlags {
    int iterations = 5000;
    int burn_in = 500;
    int thin = 5;
    int chains = 1;
    bool paper_scale = false;
    bool inverse_gram = false;
    bool occupancy = false;

    McmcConfig to_config() const {
        McmcConfig cfg;
        if (paper_scale) {
            cfg = McmcConfig::paper_scale();
        } else {
            cfg.iterations = iterations;
            cfg.burn_in = burn_in;
            cfg.thin = thin;
            cfg.n_chains = chains;
        }
        if (inverse_gram) cfg.theta_proposal = ThetaProposal::inverse_gram;
        if (occupancy) cfg.alloc_weight_source = AllocWeightSource::occupancy;
        return cfg;
    }
};

void add_fit_flags(CLI::App* cmd, FitFlags& flags) {
    cmd->add_option("--iterations", flags.iterations, "MCMC iterations");
    cmd->add_option("--burn-in", flags.burn_in, "burn-in iterations");
    cmd->add_option("--thin", flags.thin, "thinning interval");
    cmd->add_option("--chains", flags.chains, "number of chains");
    cmd->add_flag("--paper-scale", flags.paper_scale,
                  "40100 iterations, burn-in 100, thin 20, 2 chains");
    cmd->add_flag("--inverse-gram", flags.inverse_gram,
                  "theta proposal covariance proportional to (V'V)^-1");
    cmd->add_flag("--occupancy", flags.occupancy,
                  "allocate hypothesised networks by occupancy probabilities");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive cluster sampling with a cell-level Bayesian count model"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 20240801;
    bool quiet = false;
    app.add_option("--seed", seed, "master seed")->capture_default_str();
    app.add_flag("--quiet", quiet, "suppress progress output");

    // generate
    auto* gen = app.add_subcommand("generate", "simulate a clustered population");
    int rows = 20, cols = 20;
    double alpha = 0.1, beta = 0.1;
    std::vector<double> theta{2.7, 0.5};
    GpConfig gp;
    std::string gen_out = "population.csv";
    gen->add_option("--rows", rows);
    gen->add_option("--cols", cols);
    gen->add_option("--alpha", alpha, "cell nonempty probability")->capture_default_str();
    gen->add_option("--beta", beta, "network formation probability")->capture_default_str();
    gen->add_option("--theta", theta, "regression coefficients (intercept first)");
    gen->add_option("--gp-length-scale", gp.length_scale);
    gen->add_option("--gp-variance", gp.variance);
    gen->add_option("--gp-mean", gp.mean);
    gen->add_option("--out", gen_out, "output grid CSV")->capture_default_str();

    // sample
    auto* smp = app.add_subcommand("sample", "draw an adaptive cluster sample");
    std::string smp_pop, smp_out = "sample.json", smp_mode = "network";
    int smp_m = 40;
    double smp_fraction = 1.0;
    FitFlags smp_fit;
    smp->add_option("--pop", smp_pop, "population CSV")->required();
    smp->add_option("--m", smp_m, "number of networks to draw")->capture_default_str();
    smp->add_option("--stage1-fraction", smp_fraction,
                    "fraction drawn with constant weights; < 1 enables the "
                    "weighted second stage")
        ->capture_default_str();
    smp->add_option("--mode", smp_mode, "network|cluster")->capture_default_str();
    smp->add_option("--out", smp_out)->capture_default_str();
    add_fit_flags(smp, smp_fit);

    // fit
    auto* fit = app.add_subcommand("fit", "fit the model to a sample");
    std::string fit_pop, fit_sample, fit_out = "fit";
    FitFlags fit_flags;
    fit->add_option("--pop", fit_pop, "population or covariate CSV")->required();
    fit->add_option("--sample", fit_sample, "sample log JSON")->required();
    fit->add_option("--out", fit_out, "output directory")->capture_default_str();
    add_fit_flags(fit, fit_flags);

    // experiment
    auto* exp = app.add_subcommand("experiment", "replicated sampling-and-fitting study");
    std::string exp_config, exp_out = "experiment";
    int threads = 1;
    exp->add_option("--config", exp_config, "experiment config JSON")->required();
    exp->add_option("--out", exp_out, "output directory")->capture_default_str();
    exp->add_option("--threads", threads, "concurrent replications")->capture_default_str();

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "Geweke diagnostics on a draws CSV");
    std::string diag_draws;
    double frac_a = 0.1, frac_b = 0.5;
    diag->add_option("--draws", diag_draws, "draws CSV")->required();
    diag->add_option("--frac-a", frac_a)->capture_default_str();
    diag->add_option("--frac-b", frac_b)->capture_default_str();

    // map
    auto* map_cmd = app.add_subcommand("map", "posterior count map from a fit summary");
    std::string map_summary, map_sample, map_out = "map.csv";
    map_cmd->add_option("--summary", map_summary, "summary.json from fit")->required();
    map_cmd->add_option("--sample", map_sample, "sample log JSON")->required();
    map_cmd->add_option("--out", map_out)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*gen) {
            const GridSpec grid{rows, cols};
            const auto column = simulate_covariate(grid, gp, mix_seed(seed, 0xC0F));
            std::vector<std::vector<double>> columns;
            for (std::size_t j = 1; j < theta.size(); ++j) {
                std::vector<double> col = column;
                for (double& v : col) v = std::pow(v, static_cast<double>(j));
                columns.push_back(std::move(col));
            }
            ModelParams params;
            params.theta = theta;
            params.alpha = alpha;
            params.beta = beta;
            const auto pop = generate_population(grid, make_covariate_field(grid, columns),
                                                 params, {}, mix_seed(seed, 0x90D));
            save_population_csv(pop, gen_out);
            if (!quiet)
                std::cerr << "wrote " << gen_out << ": T=" << pop.true_total
                          << " X=" << pop.partition.nonempty_cells
                          << " P=" << pop.partition.nonempty_networks << "\n";
        } else if (*smp) {
            const auto pop = load_population_csv(smp_pop);
            const SamplingMode mode =
                smp_mode == "cluster" ? SamplingMode::cluster : SamplingMode::network;
            SampleLog log;
            if (smp_fraction >= 1.0) {
                WeightField constant;
                constant.stage = 1;
                constant.values.assign(pop.grid.cell_count(), 1.0);
                log = acs_draw(pop, constant, smp_m, mode, seed);
            } else {
                const auto [m1, m2] = split_stage_sizes(smp_m, smp_fraction);
                log = two_stage_sample(pop, m1, m2, mode, smp_fit.to_config(), seed).log;
            }
            save_sample_log(log, smp_out);
            if (!quiet)
                std::cerr << "wrote " << smp_out << ": " << log.draw_count() << " draws, "
                          << log.observed_nonempty_networks() << " nonempty networks\n";
        } else if (*fit) {
            const auto pop = load_population_csv(fit_pop);
            auto log = load_sample_log(fit_sample);
            const auto chains = run_chains(log, pop.covariates, fit_flags.to_config(), seed);
            std::filesystem::create_directories(fit_out);
            save_draws_csv(chains, fit_out + "/draws.csv");
            write_text_file(fit_out + "/summary.json", fit_summary_json(chains, log));
            export_posterior_map(chains, log, fit_out + "/map.csv");
            if (!quiet) {
                const auto summary = total_posterior(chains);
                std::cerr << "T posterior mean " << summary.mean << " [" << summary.ci_low
                          << ", " << summary.ci_high << "]\n";
            }
        } else if (*exp) {
            std::string config_text;
            try {
                config_text = read_text_file(exp_config);
            } catch (const std::exception& e) {
                throw ConfigError(e.what());
            }
            auto cfg = experiment_config_from_json(config_text);
            if (app.count("--seed") > 0) cfg.master_seed = seed;
            const auto result = run_experiment(cfg, exp_out, threads, quiet);
            if (!quiet) {
                for (const auto& [name, ms] : result.metrics)
                    std::cerr << name << ": rrmse=" << ms.rrmse << " rae=" << ms.rae
                              << " rb=" << ms.rb << " rw=" << ms.rw
                              << " coverage=" << ms.coverage << "\n";
                if (result.excluded > 0)
                    std::cerr << "excluded replications: " << result.excluded << "\n";
            }
            if (result.excluded == static_cast<int>(result.replications.size())) return 3;
        } else if (*diag) {
            const auto cols = load_draws_csv(diag_draws);
            nlohmann::json out;
            for (const auto& [name, values] : cols) {
                if (name == "chain" || name == "iter") continue;
                try {
                    out[name] = geweke_z(values, frac_a, frac_b);
                } catch (const std::exception& e) {
                    out[name] = std::string("undefined: ") + e.what();
                }
            }
            std::cout << out.dump(2) << "\n";
        } else if (*map_cmd) {
            const auto j = nlohmann::json::parse(read_text_file(map_summary));
            const auto mean_eta = j.at("posterior_mean_eta").get<std::vector<double>>();
            const auto log = load_sample_log(map_sample);
            const auto sampled = log.sampled_cells();
            const auto borders = log.visited_borders();
            std::ostringstream out;
            out << "cell_id,row,col,posterior_mean_eta,sampled_flag,border_flag\n";
            for (int c = 0; c < log.grid.cell_count(); ++c)
                out << c << ',' << log.grid.row_of(c) << ',' << log.grid.col_of(c) << ','
                    << format_double(mean_eta[c]) << ',' << (sampled[c] ? 1 : 0) << ','
                    << (borders[c] ? 1 : 0) << '\n';
            write_text_file(map_out, out.str());
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SamplingExhausted& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
