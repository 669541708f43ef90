#include <doctest.h>

#include <set>

#include "acsbayes/allocation.hpp"
#include "acsbayes/errors.hpp"
#include "acsbayes/grid.hpp"

using namespace acsbayes;

namespace {

bool connected(const std::vector<int>& cells, const GridSpec& grid) {
    std::set<int> members(cells.begin(), cells.end());
    std::set<int> reached{cells.front()};
    std::vector<int> stack{cells.front()};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        for (int nb : neighbors(cur, grid))
            if (members.count(nb) && reached.insert(nb).second) stack.push_back(nb);
    }
    return reached.size() == members.size();
}

} // namespace

TEST_CASE("empty size list allocates nothing") {
    const GridSpec grid{3, 3};
    const std::vector<double> w(9, 1.0);
    const std::vector<bool> forbidden(9, false);
    Rng rng(1);
    CHECK(allocate_networks({}, w, forbidden, grid, 10, rng).empty());
}

TEST_CASE("single positive-weight cell is forced") {
    const GridSpec grid{3, 3};
    std::vector<double> w(9, 0.0);
    w[4] = 2.0;
    const std::vector<bool> forbidden(9, false);
    Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const auto nets = allocate_networks({1}, w, forbidden, grid, 10, rng);
        CHECK(nets.front() == std::vector<int>{4});
    }
}

TEST_CASE("grown components are connected with the requested size") {
    const GridSpec grid{3, 3};
    const std::vector<double> w(9, 1.0);
    const std::vector<bool> forbidden(9, false);
    Rng rng(3);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto nets = allocate_networks({3}, w, forbidden, grid, 100, rng);
        REQUIRE(nets.front().size() == 3);
        CHECK(connected(nets.front(), grid));
    }
}

TEST_CASE("placed networks never touch each other or forbidden cells") {
    const GridSpec grid{6, 6};
    const std::vector<double> w(36, 1.0);
    std::vector<bool> forbidden(36, false);
    forbidden[14] = forbidden[15] = true;
    Rng rng(4);
    for (int rep = 0; rep < 300; ++rep) {
        const auto nets = allocate_networks({3, 2, 1}, w, forbidden, grid, 100, rng);
        std::set<int> all;
        for (const auto& net : nets)
            for (int c : net) {
                CHECK_FALSE(forbidden[c]);
                CHECK(all.insert(c).second);
            }
        for (std::size_t i = 0; i < nets.size(); ++i)
            for (int c : nets[i])
                for (int nb : neighbors(c, grid))
                    for (std::size_t j = 0; j < nets.size(); ++j) {
                        if (i == j) continue;
                        CHECK(std::find(nets[j].begin(), nets[j].end(), nb) == nets[j].end());
                    }
    }
}

TEST_CASE("impossible allocations raise after the retry budget") {
    const GridSpec grid{2, 2};
    const std::vector<double> w(4, 1.0);
    const std::vector<bool> forbidden(4, false);
    Rng rng(5);
    // two networks of size 2 cannot be mutually non-adjacent on a 2x2 grid
    CHECK_THROWS_AS(allocate_networks({2, 2}, w, forbidden, grid, 50, rng),
                    AllocationFailure);
}

TEST_CASE("larger sizes are placed first") {
    // with the big network placed first, sizes {4,1} always fit on 1x7; the
    // reverse order could strand the 4 by seeding the 1 in the middle
    const GridSpec grid{1, 7};
    const std::vector<double> w(7, 1.0);
    const std::vector<bool> forbidden(7, false);
    Rng rng(6);
    for (int rep = 0; rep < 200; ++rep) {
        const auto nets = allocate_networks({1, 4}, w, forbidden, grid, 200, rng);
        CHECK(nets[0].size() == 1);
        CHECK(nets[1].size() == 4);
    }
}
