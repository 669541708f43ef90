#include "acsbayes/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "acsbayes/errors.hpp"

namespace acsbayes {

using nlohmann::json;

std::string format_double(double v) {
    if (v == static_cast<long long>(v) && std::fabs(v) < 1e15) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
        return buf;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // shortest representation that still round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[40];
        std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

void save_population_csv(const PopulationGrid& pop, const std::string& path) {
    std::ostringstream out;
    out << "cell_id,row,col";
    for (int j = 1; j <= pop.covariates.k; ++j) out << ",v" << j;
    out << ",count\n";
    const int m = pop.grid.cell_count();
    for (int c = 0; c < m; ++c) {
        out << c << ',' << pop.grid.row_of(c) << ',' << pop.grid.col_of(c);
        const auto row = pop.covariates.row(c);
        for (int j = 1; j <= pop.covariates.k; ++j)
            out << ',' << format_double(row[j] + pop.covariates.centering[j - 1]);
        out << ',' << pop.counts[c] << '\n';
    }
    write_text_file(path, out.str());
}

PopulationGrid load_population_csv(const std::string& path, bool center_covariates) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "cell_id" || header[1] != "row" || header[2] != "col")
        throw std::runtime_error(path + ": header must start with cell_id,row,col");
    const bool has_count = header.back() == "count";
    const int k = static_cast<int>(header.size()) - 3 - (has_count ? 1 : 0);
    for (int j = 0; j < k; ++j)
        if (header[3 + j] != "v" + std::to_string(j + 1))
            throw std::runtime_error(path + ": covariate columns must be v1,v2,...");

    struct Row {
        int cell, r, c, count;
        std::vector<double> v;
    };
    std::vector<Row> rows;
    int max_r = -1, max_c = -1;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (static_cast<int>(f.size()) != 3 + k + (has_count ? 1 : 0))
            throw std::runtime_error(path + ": wrong field count at line " +
                                     std::to_string(line_no));
        Row row;
        try {
            row.cell = std::stoi(f[0]);
            row.r = std::stoi(f[1]);
            row.c = std::stoi(f[2]);
            row.v.resize(k);
            for (int j = 0; j < k; ++j) row.v[j] = std::stod(f[3 + j]);
            row.count = has_count ? std::stoi(f[3 + k]) : 0;
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": parse error at line " + std::to_string(line_no));
        }
        if (row.count < 0)
            throw std::runtime_error(path + ": negative count at line " + std::to_string(line_no));
        max_r = std::max(max_r, row.r);
        max_c = std::max(max_c, row.c);
        rows.push_back(std::move(row));
    }
    GridSpec grid{max_r + 1, max_c + 1};
    const int m = grid.cell_count();
    if (static_cast<int>(rows.size()) != m)
        throw std::runtime_error(path + ": expected " + std::to_string(m) +
                                 " rows for a " + std::to_string(grid.rows) + "x" +
                                 std::to_string(grid.cols) + " grid, found " +
                                 std::to_string(rows.size()));
    std::vector<bool> seen(m, false);
    std::vector<std::vector<double>> columns(k, std::vector<double>(m));
    std::vector<int> counts(m, 0);
    for (const auto& row : rows) {
        if (row.cell < 0 || row.cell >= m || row.cell != grid.cell_at(row.r, row.c))
            throw std::runtime_error(path + ": cell_id " + std::to_string(row.cell) +
                                     " does not equal row*cols+col");
        if (seen[row.cell])
            throw std::runtime_error(path + ": duplicate cell_id " + std::to_string(row.cell));
        seen[row.cell] = true;
        for (int j = 0; j < k; ++j) columns[j][row.cell] = row.v[j];
        counts[row.cell] = row.count;
    }

    PopulationGrid pop;
    pop.grid = grid;
    pop.covariates = make_covariate_field(grid, columns, center_covariates);
    pop.counts = std::move(counts);
    pop.rebuild_derived();
    return pop;
}

namespace {

json draw_to_json(const DrawRecord& d) {
    return json{{"index", d.index},       {"stage", d.stage},
                {"seed_cell", d.seed_cell}, {"nonempty", d.nonempty},
                {"members", d.members},    {"counts", d.counts},
                {"border", d.border},      {"removed", d.removed}};
}

DrawRecord draw_from_json(const json& j) {
    DrawRecord d;
    d.index = j.at("index").get<int>();
    d.stage = j.at("stage").get<int>();
    d.seed_cell = j.at("seed_cell").get<int>();
    d.nonempty = j.at("nonempty").get<bool>();
    d.members = j.at("members").get<std::vector<int>>();
    d.counts = j.at("counts").get<std::vector<int>>();
    d.border = j.at("border").get<std::vector<int>>();
    d.removed = j.at("removed").get<std::vector<int>>();
    return d;
}

} // namespace

std::string sample_log_to_json(const SampleLog& log) {
    json j;
    j["grid"] = {{"rows", log.grid.rows}, {"cols", log.grid.cols}};
    j["mode"] = log.mode == SamplingMode::network ? "network" : "cluster";
    j["m1"] = log.m1;
    j["m2"] = log.m2;
    j["stage1_weight"] = log.stage1_weight;
    j["stage2_weights"] = log.stage2_weights;
    j["draws"] = json::array();
    for (const auto& d : log.draws) j["draws"].push_back(draw_to_json(d));
    return j.dump(2);
}

SampleLog sample_log_from_json(const std::string& text) {
    const json j = json::parse(text);
    SampleLog log;
    log.grid.rows = j.at("grid").at("rows").get<int>();
    log.grid.cols = j.at("grid").at("cols").get<int>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "network" && mode != "cluster")
        throw std::runtime_error("sample log: unknown mode " + mode);
    log.mode = mode == "network" ? SamplingMode::network : SamplingMode::cluster;
    log.m1 = j.at("m1").get<int>();
    log.m2 = j.at("m2").get<int>();
    log.stage1_weight = j.at("stage1_weight").get<double>();
    log.stage2_weights = j.at("stage2_weights").get<std::vector<double>>();
    for (const auto& dj : j.at("draws")) log.draws.push_back(draw_from_json(dj));
    return log;
}

void save_sample_log(const SampleLog& log, const std::string& path) {
    write_text_file(path, sample_log_to_json(log));
}

SampleLog load_sample_log(const std::string& path) {
    return sample_log_from_json(read_text_file(path));
}

void save_draws_csv(std::span<const ChainOutput> chains, const std::string& path) {
    if (chains.empty()) throw std::invalid_argument("save_draws_csv: no chains");
    std::ostringstream out;
    const int td = static_cast<int>(chains.front().theta_draws.front().size());
    const bool has_rho = !chains.front().rho_draws.empty();
    const int rd = has_rho ? static_cast<int>(chains.front().rho_draws.front().size()) : 0;
    out << "chain,iter";
    for (int j = 0; j < td; ++j) out << ",theta" << j;
    for (int j = 0; j < rd; ++j) out << ",rho" << j;
    out << ",alpha,beta,X,P,T\n";
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const auto& ch = chains[c];
        for (int i = 0; i < ch.retained(); ++i) {
            out << c << ',' << i;
            for (int j = 0; j < td; ++j) out << ',' << format_double(ch.theta_draws[i][j]);
            for (int j = 0; j < rd; ++j) out << ',' << format_double(ch.rho_draws[i][j]);
            out << ',' << format_double(ch.alpha_draws[i]) << ','
                << format_double(ch.beta_draws[i]) << ',' << ch.x_draws[i] << ','
                << ch.p_draws[i] << ',' << ch.total_draws[i] << '\n';
        }
    }
    write_text_file(path, out.str());
}

std::vector<std::pair<std::string, std::vector<double>>> load_draws_csv(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const auto header = split_csv_line(line);
    std::vector<std::pair<std::string, std::vector<double>>> cols;
    for (const auto& name : header) cols.emplace_back(name, std::vector<double>{});
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw std::runtime_error(path + ": ragged row");
        for (std::size_t j = 0; j < f.size(); ++j) cols[j].second.push_back(std::stod(f[j]));
    }
    return cols;
}

namespace {

json summary_to_json(const PosteriorSummary& s) {
    return json{{"mean", s.mean},     {"median", s.median},       {"ci_low", s.ci_low},
                {"ci_high", s.ci_high}, {"n_draws", s.n_draws}};
}

} // namespace

std::string fit_summary_json(std::span<const ChainOutput> chains, const SampleLog& log) {
    if (chains.empty()) throw std::invalid_argument("fit_summary_json: no chains");
    json j;
    j["chains"] = chains.size();
    j["retained_per_chain"] = chains.front().retained();
    j["observed"] = {{"x_s", log.observed_nonempty_cells()},
                     {"p_s", log.observed_nonempty_networks()},
                     {"total", log.observed_total()},
                     {"draws", log.draw_count()}};

    std::vector<double> pooled_t, pooled_a, pooled_b;
    for (const auto& ch : chains) {
        for (long t : ch.total_draws) pooled_t.push_back(static_cast<double>(t));
        pooled_a.insert(pooled_a.end(), ch.alpha_draws.begin(), ch.alpha_draws.end());
        pooled_b.insert(pooled_b.end(), ch.beta_draws.begin(), ch.beta_draws.end());
    }
    j["posterior"]["T"] = summary_to_json(summarize_draws(pooled_t));
    j["posterior"]["alpha"] = summary_to_json(summarize_draws(pooled_a));
    j["posterior"]["beta"] = summary_to_json(summarize_draws(pooled_b));
    const int td = static_cast<int>(chains.front().theta_draws.front().size());
    for (int k = 0; k < td; ++k) {
        std::vector<double> pooled;
        for (const auto& ch : chains)
            for (const auto& row : ch.theta_draws) pooled.push_back(row[k]);
        j["posterior"]["theta" + std::to_string(k)] = summary_to_json(summarize_draws(pooled));
    }

    json acc = json::array();
    json gz = json::array();
    for (const auto& ch : chains) {
        acc.push_back({{"theta", ch.accept_theta},
                       {"alpha", ch.accept_alpha},
                       {"beta", ch.accept_beta},
                       {"latent", ch.accept_latent},
                       {"rho", ch.accept_rho},
                       {"alloc_failures", ch.alloc_failures}});
        std::vector<double> t(ch.total_draws.begin(), ch.total_draws.end());
        json z;
        try {
            z["T"] = geweke_z(t);
            z["alpha"] = geweke_z(ch.alpha_draws);
            z["beta"] = geweke_z(ch.beta_draws);
        } catch (const std::exception& e) {
            z["error"] = e.what();
        }
        gz.push_back(z);
    }
    j["acceptance"] = acc;
    j["geweke"] = gz;

    const auto mean_eta = pooled_mean_eta(chains);
    j["posterior_mean_eta"] = mean_eta;
    return j.dump(2);
}

void export_posterior_map(std::span<const ChainOutput> chains, const SampleLog& log,
                          const std::string& path) {
    if (chains.empty()) throw std::invalid_argument("export_posterior_map: no chains");
    const auto mean_eta = pooled_mean_eta(chains);
    const auto sampled = log.sampled_cells();
    const auto borders = log.visited_borders();
    const int m = log.grid.cell_count();
    if (static_cast<int>(mean_eta.size()) != m)
        throw std::invalid_argument("export_posterior_map: grid mismatch");
    std::ostringstream out;
    out << "cell_id,row,col,posterior_mean_eta,sampled_flag,border_flag\n";
    for (int c = 0; c < m; ++c) {
        out << c << ',' << log.grid.row_of(c) << ',' << log.grid.col_of(c) << ','
            << format_double(mean_eta[c]) << ',' << (sampled[c] ? 1 : 0) << ','
            << (borders[c] ? 1 : 0) << '\n';
    }
    write_text_file(path, out.str());
}

} // namespace acsbayes
