#ifndef ACSBAYES_IO_HPP
#define ACSBAYES_IO_HPP

#include <span>
#include <string>
#include <vector>

#include "acsbayes/estimators.hpp"
#include "acsbayes/mcmc.hpp"
#include "acsbayes/population.hpp"
#include "acsbayes/sampling.hpp"

namespace acsbayes {

// shortest round-trip decimal representation (printf %.17g trimmed)
std::string format_double(double v);

// Grid CSV: header `cell_id,row,col,v1[,...],count`, one row per cell in id
// order. The count column is optional so covariates-only prediction grids
// load too.
void save_population_csv(const PopulationGrid& pop, const std::string& path);
PopulationGrid load_population_csv(const std::string& path, bool center_covariates = false);

// Draw-by-draw audit trail as JSON, replayable.
std::string sample_log_to_json(const SampleLog& log);
SampleLog sample_log_from_json(const std::string& text);
void save_sample_log(const SampleLog& log, const std::string& path);
SampleLog load_sample_log(const std::string& path);

// Retained draws, one row per iteration:
//   chain,iter,theta0..thetaK[,rho0..],alpha,beta,X,P,T
void save_draws_csv(std::span<const ChainOutput> chains, const std::string& path);
// columns -> values; used by the diagnose verb
std::vector<std::pair<std::string, std::vector<double>>> load_draws_csv(
    const std::string& path);

// Posterior summary of a fit as JSON.
std::string fit_summary_json(std::span<const ChainOutput> chains, const SampleLog& log);

// Posterior count map: cell_id,row,col,posterior_mean_eta,sampled_flag,border_flag
void export_posterior_map(std::span<const ChainOutput> chains, const SampleLog& log,
                          const std::string& path);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace acsbayes

#endif
