#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "acsbayes/errors.hpp"
#include "acsbayes/sampling.hpp"

using namespace acsbayes;

namespace {

PopulationGrid make_pop(const GridSpec& grid, std::vector<int> counts) {
    PopulationGrid pop;
    pop.grid = grid;
    pop.covariates = make_covariate_field(grid, {});
    pop.counts = std::move(counts);
    pop.rebuild_derived();
    return pop;
}

// the true latent hypothesis: every network the log did not reveal
LatentState remaining_latent(const PopulationGrid& pop, const SampleLog& log) {
    std::set<int> drawn_first_cells;
    for (const auto& d : log.draws)
        if (d.nonempty) drawn_first_cells.insert(d.members.front());
    LatentState latent;
    for (const auto& net : pop.partition.networks) {
        if (!net.nonempty || drawn_first_cells.count(net.members.front())) continue;
        latent.sizes.push_back(net.size());
        latent.cells.push_back(net.members);
        std::vector<int> counts;
        for (int c : net.members) counts.push_back(pop.counts[c]);
        latent.counts.push_back(std::move(counts));
        latent.x_bar += net.size();
        ++latent.p_bar;
    }
    latent.p_bar = static_cast<int>(latent.sizes.size());
    return latent;
}

// Exhaustive enumeration of the sequential draw process at the unit level
// (whole networks and single empty cells). Groups leaves by the drawn size
// sequence and checks that
//   (a) the evaluated selection probability agrees across a group,
//   (b) it equals the summed process probability of the group,
//   (c) the grouped values add to one.
struct Enumerator {
    const PopulationGrid& pop;
    SamplingMode mode;
    int m1;
    int m_total;
    std::vector<double> omega; // stage-2 field; empty for single-stage

    std::map<std::string, double> group_value;   // size-seq key -> exp(sel_log)
    std::map<std::string, double> group_process; // size-seq key -> summed prob

    void run() {
        SampleLog log;
        log.grid = pop.grid;
        log.mode = mode;
        log.m1 = m1;
        log.m2 = m_total - m1;
        if (!omega.empty()) log.stage2_weights = omega;
        std::vector<bool> removed(pop.grid.cell_count(), false);
        std::vector<bool> net_drawn(pop.partition.networks.size(), false);
        recurse(log, removed, net_drawn, 1.0, "");
    }

    void recurse(SampleLog& log, std::vector<bool>& removed, std::vector<bool>& net_drawn,
                 double process_prob, const std::string& key) {
        const int j = log.draw_count();
        if (j == m_total) {
            const LatentState latent = remaining_latent(pop, log);
            const double value = std::exp(selection_log_prob(log, latent, pop.grid));
            auto [it, inserted] = group_value.try_emplace(key, value);
            if (!inserted) CHECK(std::fabs(it->second - value) < 1e-12);
            group_process[key] += process_prob;
            return;
        }
        const bool stage2 = j >= m1;
        const auto cell_mass = [&](int c) { return stage2 ? omega[c] : 1.0; };
        double denom = 0.0;
        for (int c = 0; c < pop.grid.cell_count(); ++c)
            if (!removed[c]) denom += cell_mass(c);
        REQUIRE(denom > 0.0);

        for (std::size_t n = 0; n < pop.partition.networks.size(); ++n) {
            const auto& net = pop.partition.networks[n];
            if (net_drawn[n]) continue;
            if (net.nonempty) {
                double mass = 0.0;
                for (int c : net.members) mass += cell_mass(c);
                if (mass <= 0.0) continue;
                DrawRecord rec;
                rec.index = j + 1;
                rec.stage = stage2 ? 2 : 1;
                rec.seed_cell = net.members.front();
                rec.nonempty = true;
                rec.members = net.members;
                for (int c : net.members) rec.counts.push_back(pop.counts[c]);
                rec.border = net.border;
                rec.removed = net.members;
                if (mode == SamplingMode::cluster)
                    for (int b : net.border)
                        if (!removed[b]) rec.removed.push_back(b);
                net_drawn[n] = true;
                for (int c : rec.removed) removed[c] = true;
                log.draws.push_back(rec);
                recurse(log, removed, net_drawn, process_prob * mass / denom,
                        key + "z" + std::to_string(net.size()) + ".");
                log.draws.pop_back();
                for (int c : rec.removed) removed[c] = false;
                net_drawn[n] = false;
            } else {
                const int cell = net.members.front();
                if (removed[cell]) continue;
                const double mass = cell_mass(cell);
                if (mass <= 0.0) continue;
                DrawRecord rec;
                rec.index = j + 1;
                rec.stage = stage2 ? 2 : 1;
                rec.seed_cell = cell;
                rec.nonempty = false;
                rec.members = {cell};
                rec.counts = {0};
                rec.removed = {cell};
                net_drawn[n] = true;
                removed[cell] = true;
                log.draws.push_back(rec);
                recurse(log, removed, net_drawn, process_prob * mass / denom, key + "z1.");
                log.draws.pop_back();
                removed[cell] = false;
                net_drawn[n] = false;
            }
        }
    }
};

void check_normalization(const PopulationGrid& pop, SamplingMode mode, int m1, int m_total,
                         std::vector<double> omega = {}) {
    Enumerator en{pop, mode, m1, m_total, std::move(omega), {}, {}};
    en.run();
    double total = 0.0;
    for (const auto& [key, value] : en.group_value) {
        total += value;
        CHECK(std::fabs(value - en.group_process.at(key)) < 1e-12);
    }
    CHECK(std::fabs(total - 1.0) < 1e-9);
}

} // namespace

TEST_CASE("selection probability normalizes over all ordered samples") {
    // network mode, constant weights, mixed sizes with collisions
    check_normalization(make_pop({2, 3}, {1, 1, 0, 0, 2, 0}), SamplingMode::network, 2, 2);
    check_normalization(make_pop({2, 3}, {1, 0, 0, 0, 1, 0}), SamplingMode::network, 2, 2);
    check_normalization(make_pop({2, 2}, {1, 0, 0, 1}), SamplingMode::network, 2, 2);
    check_normalization(make_pop({1, 6}, {0, 0, 0, 0, 0, 0}), SamplingMode::network, 2, 2);

    // cluster mode: distinct network sizes >= 2 keep size classes exchangeable
    check_normalization(make_pop({2, 3}, {3, 1, 0, 0, 0, 0}), SamplingMode::cluster, 2, 2);
    check_normalization(make_pop({2, 3}, {0, 0, 0, 2, 5, 0}), SamplingMode::cluster, 1, 1);

    // two-stage with a weighted second stage: empty cells share one weight,
    // the single network carries arbitrary per-cell weights
    {
        const auto pop = make_pop({2, 3}, {4, 2, 0, 0, 0, 0});
        std::vector<double> omega(6, 0.5);
        omega[0] = 0.9;
        omega[1] = 0.1;
        check_normalization(pop, SamplingMode::network, 1, 2, omega);
    }
}

TEST_CASE("acs draws on an all-empty population are distinct empty cells") {
    const auto pop = make_pop({2, 3}, std::vector<int>(6, 0));
    WeightField w;
    w.stage = 1;
    w.values.assign(6, 1.0);
    const auto log = acs_draw(pop, w, 3, SamplingMode::network, 99);
    CHECK(log.draw_count() == 3);
    std::set<int> cells;
    for (const auto& d : log.draws) {
        CHECK_FALSE(d.nonempty);
        CHECK(cells.insert(d.seed_cell).second);
    }
}

TEST_CASE("first-draw hit rate is proportional to network size") {
    const GridSpec grid{4, 4};
    std::vector<int> counts(16, 0);
    counts[5] = counts[6] = counts[9] = 1; // one network of 3
    const auto pop = make_pop(grid, counts);
    WeightField w;
    w.stage = 1;
    w.values.assign(16, 1.0);
    const int n = 100000;
    int hits = 0;
    for (int rep = 0; rep < n; ++rep) {
        const auto log = acs_draw(pop, w, 1, SamplingMode::network, 7000 + rep);
        hits += log.draws.front().nonempty ? 1 : 0;
    }
    const double expected = 3.0 / 16.0;
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::fabs(static_cast<double>(hits) / n - expected) < 3.0 * se);
}

TEST_CASE("cluster mode never revisits a border cell") {
    const GridSpec grid{3, 3};
    std::vector<int> counts(9, 0);
    counts[4] = 2;
    const auto pop = make_pop(grid, counts);
    WeightField w;
    w.stage = 1;
    w.values.assign(9, 1.0);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto log = acs_draw(pop, w, 3, SamplingMode::cluster, 8000 + rep);
        std::set<int> borders;
        for (const auto& d : log.draws) {
            if (d.nonempty)
                borders.insert(d.border.begin(), d.border.end());
            else
                CHECK(borders.count(d.seed_cell) == 0);
        }
    }
}

TEST_CASE("modes agree wherever no network is revealed") {
    const auto pop = make_pop({3, 3}, std::vector<int>(9, 0));
    WeightField w;
    w.stage = 1;
    w.values.assign(9, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        const auto a = acs_draw(pop, w, 4, SamplingMode::network, 500 + rep);
        const auto b = acs_draw(pop, w, 4, SamplingMode::cluster, 500 + rep);
        REQUIRE(a.draw_count() == b.draw_count());
        for (int i = 0; i < 4; ++i) {
            CHECK(a.draws[i].seed_cell == b.draws[i].seed_cell);
            CHECK(a.draws[i].removed == b.draws[i].removed);
        }
    }
}

TEST_CASE("exhaustion raises with the completed count") {
    const auto pop = make_pop({1, 2}, {0, 0});
    WeightField w;
    w.stage = 1;
    w.values.assign(2, 1.0);
    CHECK_THROWS_AS(acs_draw(pop, w, 3, SamplingMode::network, 1), SamplingExhausted);
}

TEST_CASE("selection log prob closed-form cases") {
    // one network of 3 among 16 cells, m=1, drawn
    {
        const GridSpec grid{4, 4};
        std::vector<int> counts(16, 0);
        counts[5] = counts[6] = counts[9] = 1;
        const auto pop = make_pop(grid, counts);
        WeightField w;
        w.stage = 1;
        w.values.assign(16, 1.0);
        for (int rep = 0;; ++rep) {
            const auto log = acs_draw(pop, w, 1, SamplingMode::network, rep);
            if (!log.draws.front().nonempty) continue;
            const LatentState empty;
            CHECK(selection_log_prob(log, empty, grid) ==
                  doctest::Approx(std::log(3.0 / 16.0)).epsilon(1e-12));
            break;
        }
    }
    // 2x2 grid, size-1 network at cell 0, draws = (network, empty). With no
    // hypothesised networks every unit has size 1, so the drawn size sequence
    // (1,1) is certain: each factor sums the whole same-size class, not just
    // the unit that happened to be drawn.
    {
        const GridSpec grid{2, 2};
        const auto pop = make_pop(grid, {1, 0, 0, 0});
        SampleLog log;
        log.grid = grid;
        log.mode = SamplingMode::network;
        log.m1 = 2;
        DrawRecord net;
        net.index = 1;
        net.stage = 1;
        net.seed_cell = 0;
        net.nonempty = true;
        net.members = {0};
        net.counts = {1};
        net.border = {1, 2};
        net.removed = {0};
        DrawRecord empty_draw;
        empty_draw.index = 2;
        empty_draw.stage = 1;
        empty_draw.seed_cell = 3;
        empty_draw.nonempty = false;
        empty_draw.members = {3};
        empty_draw.counts = {0};
        empty_draw.removed = {3};
        log.draws = {net, empty_draw};
        const LatentState none;
        CHECK(selection_log_prob(log, none, grid) == doctest::Approx(0.0).epsilon(1e-12));

        // under a hypothesis with one latent size-1 network on cell 3 the
        // second draw (an observed empty cell there) is impossible
        LatentState clash;
        clash.x_bar = 1;
        clash.p_bar = 1;
        clash.sizes = {1};
        clash.cells = {{3}};
        clash.counts = {{1}};
        CHECK(std::isinf(selection_log_prob(log, clash, grid)));
    }
    // size-2 network among 6 cells: no size lumping, factors are (2/6)(4/4)
    {
        const GridSpec grid{2, 3};
        const auto pop = make_pop(grid, {2, 1, 0, 0, 0, 0});
        SampleLog log;
        log.grid = grid;
        log.mode = SamplingMode::network;
        log.m1 = 2;
        DrawRecord net;
        net.index = 1;
        net.stage = 1;
        net.seed_cell = 0;
        net.nonempty = true;
        net.members = {0, 1};
        net.counts = {2, 1};
        net.border = {2, 3, 4};
        net.removed = {0, 1};
        DrawRecord empty_draw;
        empty_draw.index = 2;
        empty_draw.stage = 1;
        empty_draw.seed_cell = 5;
        empty_draw.nonempty = false;
        empty_draw.members = {5};
        empty_draw.counts = {0};
        empty_draw.removed = {5};
        log.draws = {net, empty_draw};
        const LatentState none;
        CHECK(selection_log_prob(log, none, grid) ==
              doctest::Approx(std::log(2.0 / 6.0)).epsilon(1e-12));
    }
}

TEST_CASE("constant weights make the value placement-invariant") {
    const GridSpec grid{3, 3};
    std::vector<int> counts(9, 0);
    counts[0] = 2; // observed network; two latent placements of a 2-network
    const auto pop = make_pop(grid, counts);
    WeightField w;
    w.stage = 1;
    w.values.assign(9, 1.0);
    for (int rep = 0;; ++rep) {
        const auto log = acs_draw(pop, w, 1, SamplingMode::network, 100 + rep);
        if (!log.draws.front().nonempty) continue;
        LatentState a;
        a.x_bar = 2;
        a.p_bar = 1;
        a.sizes = {2};
        a.cells = {{7, 8}};
        a.counts = {{1, 1}};
        LatentState b = a;
        b.cells = {{5, 8}};
        CHECK(selection_log_prob(log, a, grid) ==
              doctest::Approx(selection_log_prob(log, b, grid)).epsilon(1e-12));
        break;
    }
}

TEST_CASE("latent cells on forbidden ground are impossible") {
    const GridSpec grid{3, 3};
    std::vector<int> counts(9, 0);
    counts[4] = 1;
    const auto pop = make_pop(grid, counts);
    WeightField w;
    w.stage = 1;
    w.values.assign(9, 1.0);
    for (int rep = 0;; ++rep) {
        const auto log = acs_draw(pop, w, 1, SamplingMode::network, 200 + rep);
        if (!log.draws.front().nonempty) continue;
        LatentState bad;
        bad.x_bar = 1;
        bad.p_bar = 1;
        bad.sizes = {1};
        bad.cells = {{1}}; // border of the revealed network
        bad.counts = {{1}};
        CHECK(std::isinf(selection_log_prob(log, bad, grid)));
        break;
    }
}
