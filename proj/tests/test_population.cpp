#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "acsbayes/distributions.hpp"
#include "acsbayes/population.hpp"

using namespace acsbayes;

namespace {

CovariateField gp_field(const GridSpec& grid, std::uint64_t seed) {
    GpConfig cfg;
    return make_covariate_field(grid, {simulate_covariate(grid, cfg, seed)});
}

ModelParams paper_style_params() {
    ModelParams p;
    p.theta = {2.7, 0.5};
    p.alpha = 0.1;
    p.beta = 0.1;
    return p;
}

} // namespace

TEST_CASE("generated populations satisfy the model support") {
    const GridSpec grid{20, 20};
    const auto cov = gp_field(grid, 9);
    const auto params = paper_style_params();
    const auto pop = generate_population(grid, cov, params, {}, 101);

    const int x = pop.partition.nonempty_cells;
    const int p = pop.partition.nonempty_networks;
    CHECK(x >= 1);
    CHECK(p >= 1);
    CHECK(p <= x);
    CHECK(x <= grid.cell_count());
    // sparse and clustered at these settings
    CHECK(x < grid.cell_count() / 2);
    for (int c = 0; c < grid.cell_count(); ++c)
        if (pop.counts[c] > 0) CHECK(pop.counts[c] >= 1);
    long total = 0;
    for (int c : pop.counts) total += c;
    CHECK(total == pop.true_total);
}

TEST_CASE("structure matches the freshly drawn hierarchy") {
    const GridSpec grid{10, 10};
    const auto cov = gp_field(grid, 10);
    const auto params = paper_style_params();
    for (std::uint64_t seed : {7ULL, 21ULL, 33ULL, 54ULL}) {
        const auto pop = generate_population(grid, cov, params, {}, seed);
        // replay the generator's structural draws
        Rng rng(seed);
        const int x = TruncatedBinomial(grid.cell_count(), params.alpha).sample(rng);
        const int p = TruncatedBinomial(x, params.beta).sample(rng);
        auto sizes = ShiftedMultinomial(x - p, p).sample(rng);
        CHECK(pop.partition.nonempty_cells == x);
        CHECK(pop.partition.nonempty_networks == p);
        std::vector<int> extracted;
        for (const auto& net : pop.partition.networks)
            if (net.nonempty) extracted.push_back(net.size());
        std::sort(extracted.begin(), extracted.end());
        std::sort(sizes.begin(), sizes.end());
        CHECK(extracted == sizes);
    }
}

TEST_CASE("truncation keeps X at least one even for tiny alpha") {
    const GridSpec grid{5, 5};
    const auto cov = gp_field(grid, 11);
    ModelParams params = paper_style_params();
    params.alpha = 1e-6;
    for (int rep = 0; rep < 10000; ++rep) {
        Rng rng(40000 + rep);
        CHECK(TruncatedBinomial(grid.cell_count(), params.alpha).sample(rng) >= 1);
    }
    const auto pop = generate_population(grid, cov, params, {}, 77);
    CHECK(pop.partition.nonempty_cells >= 1);
}

TEST_CASE("mean of X matches the truncated binomial expectation") {
    const GridSpec grid{5, 5};
    const int m = grid.cell_count();
    const double alpha = 0.12;
    const TruncatedBinomial tb(m, alpha);
    double expectation = 0.0, second = 0.0;
    for (int k = 1; k <= m; ++k) {
        const double pk = std::exp(tb.log_pmf(k));
        expectation += k * pk;
        second += static_cast<double>(k) * k * pk;
    }
    const double sd = std::sqrt(second - expectation * expectation);
    const int n = 10000;
    double sum = 0.0;
    Rng rng(12);
    for (int i = 0; i < n; ++i) sum += tb.sample(rng);
    CHECK(std::fabs(sum / n - expectation) < 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("generation is deterministic in the seed") {
    const GridSpec grid{8, 8};
    const auto cov = gp_field(grid, 13);
    const auto params = paper_style_params();
    const auto a = generate_population(grid, cov, params, {}, 5150);
    const auto b = generate_population(grid, cov, params, {}, 5150);
    CHECK(a.counts == b.counts);
    const auto c = generate_population(grid, cov, params, {}, 5151);
    CHECK(a.counts != c.counts);
}

TEST_CASE("rejects empty weights") {
    const GridSpec grid{3, 3};
    const auto cov = gp_field(grid, 14);
    const auto params = paper_style_params();
    const std::vector<double> zeros(9, 0.0);
    CHECK_THROWS_AS(generate_population(grid, cov, params, zeros, 1),
                    std::invalid_argument);
}
