#include "acsbayes/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "acsbayes/errors.hpp"

namespace acsbayes {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void WeightField::validate(int cell_count) const {
    if (static_cast<int>(values.size()) != cell_count)
        throw std::invalid_argument("WeightField: length != cell count");
    if (stage != 1 && stage != 2)
        throw std::invalid_argument("WeightField: stage must be 1 or 2");
    for (double w : values)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("WeightField: weights must be finite and >= 0");
}

long DrawRecord::total() const {
    long t = 0;
    for (int c : counts) t += c;
    return t;
}

int SampleLog::observed_nonempty_cells() const {
    int x = 0;
    for (const auto& d : draws)
        if (d.nonempty) x += d.size();
    return x;
}

int SampleLog::observed_nonempty_networks() const {
    int p = 0;
    for (const auto& d : draws) p += d.nonempty ? 1 : 0;
    return p;
}

long SampleLog::observed_total() const {
    long t = 0;
    for (const auto& d : draws) t += d.total();
    return t;
}

std::vector<int> SampleLog::observed_sizes() const {
    std::vector<int> sizes;
    for (const auto& d : draws)
        if (d.nonempty) sizes.push_back(d.size());
    return sizes;
}

std::vector<bool> SampleLog::sampled_cells() const {
    std::vector<bool> mask(grid.cell_count(), false);
    for (const auto& d : draws)
        for (int c : d.removed) mask[c] = true;
    return mask;
}

std::vector<bool> SampleLog::visited_borders() const {
    std::vector<bool> mask(grid.cell_count(), false);
    for (const auto& d : draws)
        for (int c : d.border) mask[c] = true;
    return mask;
}

std::vector<bool> SampleLog::forbidden_cells() const {
    std::vector<bool> mask = sampled_cells();
    for (const auto& d : draws)
        for (int c : d.border) mask[c] = true;
    return mask;
}

void acs_continue(const PopulationGrid& pop, const WeightField& weights, int m,
                  Rng& rng, SampleLog& log) {
    const int cells = pop.grid.cell_count();
    weights.validate(cells);
    if (log.grid.rows != pop.grid.rows || log.grid.cols != pop.grid.cols)
        throw std::invalid_argument("acs_continue: log grid does not match population");

    std::vector<bool> removed(cells, false);
    for (const auto& d : log.draws)
        for (int c : d.removed) removed[c] = true;

    if (weights.stage == 1) {
        // stage-1 draws carry one constant weight; the log stores it so the
        // selection probability stays evaluable without the field
        for (double w : weights.values)
            if (w != weights.values.front())
                throw std::invalid_argument("acs_continue: stage-1 weights must be constant");
        if (weights.values.front() <= 0.0)
            throw std::invalid_argument("acs_continue: stage-1 weight must be positive");
        log.stage1_weight = weights.values.front();
    }
    if (weights.stage == 2 && log.stage2_weights.empty()) log.stage2_weights = weights.values;

    for (int j = 0; j < m; ++j) {
        double total = 0.0;
        for (int c = 0; c < cells; ++c)
            if (!removed[c]) total += weights.values[c];
        if (total <= 0.0)
            throw SamplingExhausted(log.draw_count(),
                                    "acs_draw: available weight exhausted after " +
                                        std::to_string(log.draw_count()) + " draws");
        const double u = rng.uniform() * total;
        double cum = 0.0;
        int drawn = -1;
        for (int c = 0; c < cells; ++c) {
            if (removed[c] || weights.values[c] <= 0.0) continue;
            cum += weights.values[c];
            drawn = c;
            if (u < cum) break;
        }

        DrawRecord rec;
        rec.index = log.draw_count() + 1;
        rec.stage = weights.stage;
        rec.seed_cell = drawn;
        if (pop.counts[drawn] > 0) {
            const auto& net = pop.partition.networks[pop.partition.network_of_cell[drawn]];
            rec.nonempty = true;
            rec.members = net.members;
            rec.counts.reserve(net.members.size());
            for (int c : net.members) rec.counts.push_back(pop.counts[c]);
            rec.border = net.border;
            rec.removed = net.members;
            // removal sets of distinct draws stay disjoint: a border cell a
            // previous cluster draw already retired is not recorded again
            if (log.mode == SamplingMode::cluster)
                for (int b : net.border)
                    if (!removed[b]) rec.removed.push_back(b);
        } else {
            rec.nonempty = false;
            rec.members = {drawn};
            rec.counts = {0};
            rec.removed = {drawn};
        }
        for (int c : rec.removed) removed[c] = true;
        log.draws.push_back(std::move(rec));
        if (weights.stage == 1)
            ++log.m1;
        else
            ++log.m2;
    }
}

SampleLog acs_draw(const PopulationGrid& pop, const WeightField& weights, int m,
                   SamplingMode mode, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("acs_draw: m must be >= 1");
    SampleLog log;
    log.grid = pop.grid;
    log.mode = mode;
    Rng rng(seed);
    acs_continue(pop, weights, m, rng, log);
    return log;
}

SelectionContext make_selection_context(const SampleLog& log) {
    const int cells = log.grid.cell_count();
    SelectionContext ctx;
    ctx.log = &log;
    ctx.forbidden = log.forbidden_cells();

    const bool has_stage2 =
        std::any_of(log.draws.begin(), log.draws.end(),
                    [](const DrawRecord& d) { return d.stage == 2; });
    const bool has_omega = static_cast<int>(log.stage2_weights.size()) == cells;
    if (has_stage2 && !has_omega)
        throw std::invalid_argument(
            "selection context: stage-2 draws present but no weight snapshot");

    const double w1 = log.stage1_weight;
    ctx.total_mass[0] = w1 * cells;
    ctx.total_mass[1] = 0.0;
    for (double w : log.stage2_weights) ctx.total_mass[1] += w;

    std::array<double, 2> removed{0.0, 0.0};
    for (const auto& d : log.draws) {
        SelectionContext::DrawInfo info;
        info.stage = d.stage;
        info.z = d.nonempty ? d.size() : 1;
        info.nonempty = d.nonempty;
        info.removed_before = removed;
        info.net_mass[0] = w1 * d.size();
        info.net_mass[1] = 0.0;
        if (has_omega)
            for (int c : d.members) info.net_mass[1] += log.stage2_weights[c];
        removed[0] += w1 * static_cast<double>(d.removed.size());
        if (has_omega)
            for (int c : d.removed) removed[1] += log.stage2_weights[c];
        ctx.draws.push_back(info);
    }
    return ctx;
}

double selection_log_prob(const SelectionContext& ctx, const LatentState& latent) {
    const SampleLog& log = *ctx.log;

    // a hypothesis that places nonempty cells where the survey saw empty (or
    // sampled) ground is impossible
    for (const auto& net : latent.cells)
        for (int c : net)
            if (ctx.forbidden[c]) return kNegInf;

    // masses of the hypothesised unobserved networks, by size, per field
    std::map<int, std::array<double, 2>> latent_by_size;
    std::array<double, 2> latent_total{0.0, 0.0};
    const bool has_omega =
        static_cast<int>(log.stage2_weights.size()) == log.grid.cell_count();
    for (std::size_t i = 0; i < latent.cells.size(); ++i) {
        std::array<double, 2> mass{log.stage1_weight * latent.sizes[i], 0.0};
        if (has_omega)
            for (int c : latent.cells[i]) mass[1] += log.stage2_weights[c];
        auto& slot = latent_by_size[latent.sizes[i]];
        slot[0] += mass[0];
        slot[1] += mass[1];
        latent_total[0] += mass[0];
        latent_total[1] += mass[1];
    }

    // masses of observed networks not yet selected, by size; starts with all
    // revealed networks and sheds each one after its own draw
    std::map<int, std::array<double, 2>> later_by_size;
    std::array<double, 2> later_total{0.0, 0.0};
    for (const auto& d : ctx.draws) {
        if (!d.nonempty) continue;
        auto& slot = later_by_size[d.z];
        slot[0] += d.net_mass[0];
        slot[1] += d.net_mass[1];
        later_total[0] += d.net_mass[0];
        later_total[1] += d.net_mass[1];
    }

    double lp = 0.0;
    for (const auto& d : ctx.draws) {
        const int f = d.stage == 1 ? 0 : 1;
        const double denom = ctx.total_mass[f] - d.removed_before[f];
        if (!(denom > 0.0)) return kNegInf;

        double num = 0.0;
        if (auto it = latent_by_size.find(d.z); it != latent_by_size.end())
            num += it->second[f];
        if (auto it = later_by_size.find(d.z); it != later_by_size.end())
            num += it->second[f];
        if (d.z == 1) {
            double avail_empty = denom - latent_total[f] - later_total[f];
            if (avail_empty < 0.0) avail_empty = 0.0;
            num += avail_empty;
        }
        if (!(num > 0.0)) return kNegInf;
        lp += std::log(num) - std::log(denom);

        if (d.nonempty) {
            auto it = later_by_size.find(d.z);
            it->second[0] -= d.net_mass[0];
            it->second[1] -= d.net_mass[1];
            later_total[0] -= d.net_mass[0];
            later_total[1] -= d.net_mass[1];
        }
    }
    return lp;
}

double selection_log_prob(const SampleLog& log, const LatentState& latent,
                          const GridSpec& grid) {
    if (grid.rows != log.grid.rows || grid.cols != log.grid.cols)
        throw std::invalid_argument("selection_log_prob: grid mismatch");
    const SelectionContext ctx = make_selection_context(log);
    return selection_log_prob(ctx, latent);
}

} // namespace acsbayes
