#ifndef ACSBAYES_ALLOCATION_HPP
#define ACSBAYES_ALLOCATION_HPP

#include <span>
#include <vector>

#include "acsbayes/grid.hpp"
#include "acsbayes/rng.hpp"

namespace acsbayes {

// Place networks of the given sizes on the grid, biggest first. Each network
// starts from a cell drawn with probability proportional to the weights and
// grows by weighted draws among the component's available neighbours until it
// reaches its size. Placed networks and their lattice neighbours leave the
// available pool, so components never touch each other or forbidden cells.
//
// The returned cell sets are aligned with the input `sizes` order (placement
// order is by descending size, ties kept in input order). A network whose
// growth dead-ends is restarted up to retry_budget times before
// AllocationFailure is thrown.
std::vector<std::vector<int>> allocate_networks(const std::vector<int>& sizes,
                                                std::span<const double> weights,
                                                const std::vector<bool>& forbidden,
                                                const GridSpec& grid, int retry_budget,
                                                Rng& rng);

} // namespace acsbayes

#endif
