#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

#include "acsbayes/distributions.hpp"
#include "acsbayes/estimators.hpp"
#include "acsbayes/experiment.hpp"
#include "acsbayes/io.hpp"
#include "acsbayes/mcmc.hpp"
#include "acsbayes/two_stage.hpp"

namespace py = pybind11;
using namespace acsbayes;

namespace {

McmcConfig config_from_kwargs(int iterations, int burn_in, int thin, int chains,
                              bool inverse_gram, bool occupancy) {
    McmcConfig cfg;
    cfg.iterations = iterations;
    cfg.burn_in = burn_in;
    cfg.thin = thin;
    cfg.n_chains = chains;
    if (inverse_gram) cfg.theta_proposal = ThetaProposal::inverse_gram;
    if (occupancy) cfg.alloc_weight_source = AllocWeightSource::occupancy;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Adaptive cluster sampling with a cell-level Bayesian count model";

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](int rows, int cols) { return GridSpec{rows, cols}; }),
             py::arg("rows"), py::arg("cols"))
        .def_readonly("rows", &GridSpec::rows)
        .def_readonly("cols", &GridSpec::cols)
        .def_property_readonly("cell_count", &GridSpec::cell_count);

    m.def("neighbors",
          [](int cell, const GridSpec& grid) { return neighbors(cell, grid); },
          py::arg("cell"), py::arg("grid"));

    py::class_<Network>(m, "Network")
        .def_readonly("id", &Network::id)
        .def_readonly("nonempty", &Network::nonempty)
        .def_readonly("members", &Network::members)
        .def_readonly("border", &Network::border)
        .def_property_readonly("size", &Network::size);

    py::class_<NetworkPartition>(m, "NetworkPartition")
        .def_readonly("networks", &NetworkPartition::networks)
        .def_readonly("network_of_cell", &NetworkPartition::network_of_cell)
        .def_readonly("nonempty_cells", &NetworkPartition::nonempty_cells)
        .def_readonly("nonempty_networks", &NetworkPartition::nonempty_networks);

    m.def("extract_networks",
          [](const std::vector<int>& counts, const GridSpec& grid) {
              return extract_networks(counts, grid);
          },
          py::arg("counts"), py::arg("grid"));

    py::class_<TruncatedPoisson>(m, "TruncatedPoisson")
        .def(py::init<double>(), py::arg("lam"))
        .def("log_pmf", &TruncatedPoisson::log_pmf)
        .def("sample", [](const TruncatedPoisson& d, std::uint64_t seed, int n) {
            Rng rng(seed);
            std::vector<long> out(n);
            for (auto& v : out) v = d.sample(rng);
            return out;
        }, py::arg("seed"), py::arg("n") = 1);

    py::class_<TruncatedBinomial>(m, "TruncatedBinomial")
        .def(py::init<int, double>(), py::arg("n"), py::arg("p"))
        .def("log_pmf", &TruncatedBinomial::log_pmf)
        .def("sample", [](const TruncatedBinomial& d, std::uint64_t seed, int n) {
            Rng rng(seed);
            std::vector<int> out(n);
            for (auto& v : out) v = d.sample(rng);
            return out;
        }, py::arg("seed"), py::arg("n") = 1);

    py::class_<ShiftedMultinomial>(m, "ShiftedMultinomial")
        .def(py::init<int, int>(), py::arg("total"), py::arg("bins"))
        .def("log_pmf",
             [](const ShiftedMultinomial& d, const std::vector<int>& y) {
                 return d.log_pmf(y);
             })
        .def("sample", [](const ShiftedMultinomial& d, std::uint64_t seed) {
            Rng rng(seed);
            return d.sample(rng);
        }, py::arg("seed"));

    py::class_<GpConfig>(m, "GpConfig")
        .def(py::init([](double length_scale, double variance, double mean) {
                 GpConfig cfg;
                 cfg.length_scale = length_scale;
                 cfg.variance = variance;
                 cfg.mean = mean;
                 return cfg;
             }),
             py::arg("length_scale") = 3.0, py::arg("variance") = 1.0, py::arg("mean") = 0.0);

    m.def("simulate_covariate", &simulate_covariate, py::arg("grid"), py::arg("config"),
          py::arg("seed"));

    py::class_<CovariateField>(m, "CovariateField")
        .def_readonly("k", &CovariateField::k)
        .def_readonly("values", &CovariateField::values)
        .def_readonly("centering", &CovariateField::centering);

    m.def("make_covariate_field", &make_covariate_field, py::arg("grid"), py::arg("columns"),
          py::arg("center") = false);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init([](std::vector<double> theta, double alpha, double beta,
                         std::vector<double> rho) {
                 ModelParams p;
                 p.theta = std::move(theta);
                 p.alpha = alpha;
                 p.beta = beta;
                 p.rho = std::move(rho);
                 return p;
             }),
             py::arg("theta"), py::arg("alpha"), py::arg("beta"),
             py::arg("rho") = std::vector<double>{})
        .def_readonly("theta", &ModelParams::theta)
        .def_readonly("alpha", &ModelParams::alpha)
        .def_readonly("beta", &ModelParams::beta)
        .def_readonly("rho", &ModelParams::rho);

    py::class_<PopulationGrid>(m, "PopulationGrid")
        .def_readonly("grid", &PopulationGrid::grid)
        .def_readonly("counts", &PopulationGrid::counts)
        .def_readonly("true_total", &PopulationGrid::true_total)
        .def_readonly("covariates", &PopulationGrid::covariates)
        .def_property_readonly("nonempty_cells",
                               [](const PopulationGrid& p) { return p.partition.nonempty_cells; })
        .def_property_readonly("nonempty_networks",
                               [](const PopulationGrid& p) { return p.partition.nonempty_networks; });

    m.def("generate_population",
          [](const GridSpec& grid, const CovariateField& cov, const ModelParams& params,
             const std::vector<double>& alloc_weights, std::uint64_t seed) {
              return generate_population(grid, cov, params, alloc_weights, seed);
          },
          py::arg("grid"), py::arg("covariates"), py::arg("params"),
          py::arg("alloc_weights") = std::vector<double>{}, py::arg("seed") = 1);

    m.def("load_population_csv", &load_population_csv, py::arg("path"),
          py::arg("center_covariates") = false);
    m.def("save_population_csv", &save_population_csv, py::arg("population"), py::arg("path"));

    py::enum_<SamplingMode>(m, "SamplingMode")
        .value("network", SamplingMode::network)
        .value("cluster", SamplingMode::cluster);

    py::class_<DrawRecord>(m, "DrawRecord")
        .def_readonly("index", &DrawRecord::index)
        .def_readonly("stage", &DrawRecord::stage)
        .def_readonly("seed_cell", &DrawRecord::seed_cell)
        .def_readonly("nonempty", &DrawRecord::nonempty)
        .def_readonly("members", &DrawRecord::members)
        .def_readonly("counts", &DrawRecord::counts)
        .def_readonly("border", &DrawRecord::border)
        .def_readonly("removed", &DrawRecord::removed);

    py::class_<SampleLog>(m, "SampleLog")
        .def_readonly("m1", &SampleLog::m1)
        .def_readonly("m2", &SampleLog::m2)
        .def_readonly("draws", &SampleLog::draws)
        .def_readonly("stage2_weights", &SampleLog::stage2_weights)
        .def_property_readonly("observed_nonempty_cells", &SampleLog::observed_nonempty_cells)
        .def_property_readonly("observed_nonempty_networks",
                               &SampleLog::observed_nonempty_networks)
        .def_property_readonly("observed_total", &SampleLog::observed_total)
        .def("to_json", &sample_log_to_json);

    m.def("sample_log_from_json", &sample_log_from_json, py::arg("text"));

    m.def("acs_draw",
          [](const PopulationGrid& pop, const std::vector<double>& weights, int m,
             SamplingMode mode, std::uint64_t seed) {
              WeightField field;
              field.values = weights.empty()
                                 ? std::vector<double>(pop.grid.cell_count(), 1.0)
                                 : weights;
              // non-constant fields are logged as weighted (stage-2 style)
              // draws so the selection probability stays evaluable
              const bool constant = std::all_of(
                  field.values.begin(), field.values.end(),
                  [&](double w) { return w == field.values.front(); });
              field.stage = constant ? 1 : 2;
              return acs_draw(pop, field, m, mode, seed);
          },
          py::arg("population"), py::arg("weights"), py::arg("m"),
          py::arg("mode") = SamplingMode::network, py::arg("seed") = 1);

    py::class_<LatentState>(m, "LatentState")
        .def(py::init([](int x_bar, int p_bar, std::vector<int> sizes,
                         std::vector<std::vector<int>> cells,
                         std::vector<std::vector<int>> counts) {
                 LatentState s;
                 s.x_bar = x_bar;
                 s.p_bar = p_bar;
                 s.sizes = std::move(sizes);
                 s.cells = std::move(cells);
                 s.counts = std::move(counts);
                 return s;
             }),
             py::arg("x_bar") = 0, py::arg("p_bar") = 0,
             py::arg("sizes") = std::vector<int>{},
             py::arg("cells") = std::vector<std::vector<int>>{},
             py::arg("counts") = std::vector<std::vector<int>>{})
        .def_readonly("x_bar", &LatentState::x_bar)
        .def_readonly("p_bar", &LatentState::p_bar);

    m.def("selection_log_prob",
          [](const SampleLog& log, const LatentState& latent) {
              return selection_log_prob(log, latent, log.grid);
          },
          py::arg("log"), py::arg("latent"));

    m.def("two_stage_sample",
          [](const PopulationGrid& pop, int m1, int m2, SamplingMode mode,
             std::uint64_t seed, int iterations, int burn_in, int thin, int chains,
             bool inverse_gram, bool occupancy) {
              const auto cfg = config_from_kwargs(iterations, burn_in, thin, chains,
                                                  inverse_gram, occupancy);
              return two_stage_sample(pop, m1, m2, mode, cfg, seed).log;
          },
          py::arg("population"), py::arg("m1"), py::arg("m2"),
          py::arg("mode") = SamplingMode::network, py::arg("seed") = 1,
          py::arg("iterations") = 5000, py::arg("burn_in") = 500, py::arg("thin") = 5,
          py::arg("chains") = 1, py::arg("inverse_gram") = false,
          py::arg("occupancy") = false);

    py::class_<ChainOutput>(m, "ChainOutput")
        .def_readonly("theta_draws", &ChainOutput::theta_draws)
        .def_readonly("alpha_draws", &ChainOutput::alpha_draws)
        .def_readonly("beta_draws", &ChainOutput::beta_draws)
        .def_readonly("x_draws", &ChainOutput::x_draws)
        .def_readonly("p_draws", &ChainOutput::p_draws)
        .def_readonly("total_draws", &ChainOutput::total_draws)
        .def_readonly("accept_theta", &ChainOutput::accept_theta)
        .def_readonly("accept_latent", &ChainOutput::accept_latent)
        .def_readonly("posterior_mean_eta", &ChainOutput::posterior_mean_eta);

    m.def("run_chain",
          [](const SampleLog& log, const CovariateField& cov, std::uint64_t seed,
             int iterations, int burn_in, int thin, bool inverse_gram, bool occupancy) {
              const auto cfg =
                  config_from_kwargs(iterations, burn_in, thin, 1, inverse_gram, occupancy);
              return run_chain(log, cov, cfg, seed);
          },
          py::arg("log"), py::arg("covariates"), py::arg("seed") = 1,
          py::arg("iterations") = 5000, py::arg("burn_in") = 500, py::arg("thin") = 5,
          py::arg("inverse_gram") = false, py::arg("occupancy") = false);

    py::class_<PosteriorSummary>(m, "PosteriorSummary")
        .def_readonly("mean", &PosteriorSummary::mean)
        .def_readonly("median", &PosteriorSummary::median)
        .def_readonly("ci_low", &PosteriorSummary::ci_low)
        .def_readonly("ci_high", &PosteriorSummary::ci_high)
        .def_readonly("n_draws", &PosteriorSummary::n_draws);

    m.def("summarize_draws",
          [](const std::vector<double>& draws) { return summarize_draws(draws); });

    py::class_<RajEstimate>(m, "RajEstimate")
        .def_readonly("estimate", &RajEstimate::estimate)
        .def_readonly("variance", &RajEstimate::variance)
        .def_readonly("ci_low", &RajEstimate::ci_low)
        .def_readonly("ci_high", &RajEstimate::ci_high);

    m.def("raj_estimator",
          [](const SampleLog& log) { return raj_estimator(log, log.grid); }, py::arg("log"));

    m.def("geweke_z",
          [](const std::vector<double>& draws, double frac_a, double frac_b) {
              return geweke_z(draws, frac_a, frac_b);
          },
          py::arg("draws"), py::arg("frac_a") = 0.1, py::arg("frac_b") = 0.5);

    py::class_<MetricsSummary>(m, "MetricsSummary")
        .def_readonly("rrmse", &MetricsSummary::rrmse)
        .def_readonly("rae", &MetricsSummary::rae)
        .def_readonly("rb", &MetricsSummary::rb)
        .def_readonly("rw", &MetricsSummary::rw)
        .def_readonly("coverage", &MetricsSummary::coverage);

    m.def("summarize_metrics",
          [](const std::vector<std::pair<PosteriorSummary, double>>& estimates) {
              return summarize_metrics(estimates);
          });
}
