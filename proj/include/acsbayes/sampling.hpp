#ifndef ACSBAYES_SAMPLING_HPP
#define ACSBAYES_SAMPLING_HPP

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "acsbayes/model_state.hpp"
#include "acsbayes/population.hpp"
#include "acsbayes/rng.hpp"

namespace acsbayes {

// network mode reveals a drawn network and keeps its border available;
// cluster mode retires the border together with the network.
enum class SamplingMode { network, cluster };

struct WeightField {
    std::vector<double> values;
    int stage = 1;

    void validate(int cell_count) const;
};

// One draw of the survey: the drawn cell, the outcome it revealed and the
// exact set of cells that left the available pool.
struct DrawRecord {
    int index = 0; // 1-based position in the survey
    int stage = 1;
    int seed_cell = -1;
    bool nonempty = false;
    std::vector<int> members; // the revealed network; {seed_cell} when empty
    std::vector<int> counts;  // per member; {0} for an empty draw
    std::vector<int> border;  // visited border cells of a revealed network
    std::vector<int> removed; // members, plus border in cluster mode

    int size() const { return static_cast<int>(members.size()); } // Z of the draw
    long total() const;
};

// Ordered audit trail of a survey, sufficient to evaluate the selection
// probability of the sample under any hypothesis about the unobserved part.
struct SampleLog {
    GridSpec grid;
    SamplingMode mode = SamplingMode::network;
    int m1 = 0;
    int m2 = 0;
    double stage1_weight = 1.0;
    std::vector<double> stage2_weights; // snapshot; set when stage-2 draws exist
    std::vector<DrawRecord> draws;

    int draw_count() const { return static_cast<int>(draws.size()); }
    int observed_nonempty_cells() const;    // X_s
    int observed_nonempty_networks() const; // P_s
    long observed_total() const;
    std::vector<int> observed_sizes() const; // Y_s, in draw order
    std::vector<bool> sampled_cells() const; // union of removed sets
    std::vector<bool> visited_borders() const;
    // cells whose status the survey pinned down: sampled plus visited borders
    std::vector<bool> forbidden_cells() const;
};

// Draw m networks sequentially without replacement, cells selected with
// probability proportional to the current weights; a nonempty hit reveals the
// whole containing network. Throws SamplingExhausted when the available
// weight runs out early.
SampleLog acs_draw(const PopulationGrid& pop, const WeightField& weights, int m,
                   SamplingMode mode, std::uint64_t seed);

// Continue an existing survey with m further draws under the given weights.
// Cells already removed by the log stay out of the pool.
void acs_continue(const PopulationGrid& pop, const WeightField& weights, int m,
                  Rng& rng, SampleLog& log);

// Precomputed per-log quantities for repeated selection-probability
// evaluations: per-draw denominators and network masses under both the
// stage-1 (constant) and stage-2 weight fields.
struct SelectionContext {
    struct DrawInfo {
        int stage = 1;
        int z = 1;
        bool nonempty = false;
        std::array<double, 2> removed_before{}; // mass removed prior to this draw
        std::array<double, 2> net_mass{};       // mass of the revealed network
    };
    const SampleLog* log = nullptr;
    std::vector<DrawInfo> draws;
    std::array<double, 2> total_mass{}; // whole-grid mass per field
    std::vector<bool> forbidden;
};

SelectionContext make_selection_context(const SampleLog& log);

// Log probability of having observed this ordered sample, given a hypothesis
// about the unobserved networks. Each factor is
//   (mass of still-unselected networks matching the drawn size) / (remaining mass)
// with the stage-appropriate weight field; empty cells act as one-sized
// networks. Returns -inf for hypotheses inconsistent with the log.
double selection_log_prob(const SelectionContext& ctx, const LatentState& latent);
double selection_log_prob(const SampleLog& log, const LatentState& latent,
                          const GridSpec& grid);

} // namespace acsbayes

#endif
