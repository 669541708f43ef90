#ifndef ACSBAYES_GRID_HPP
#define ACSBAYES_GRID_HPP

#include <array>
#include <span>
#include <vector>

namespace acsbayes {

// Regular R x C lattice; cells are numbered 0..M-1 in row-major order.
struct GridSpec {
    int rows = 0;
    int cols = 0;

    int cell_count() const { return rows * cols; }
    int row_of(int cell) const { return cell / cols; }
    int col_of(int cell) const { return cell % cols; }
    int cell_at(int r, int c) const { return r * cols + c; }
    bool valid() const { return rows > 0 && cols > 0; }
};

// 4-adjacent (rook) lattice neighbours of a cell, written into out.
// Returns the neighbour count (2 at corners, 3 on edges, 4 in the interior).
int neighbors(int cell, const GridSpec& grid, std::array<int, 4>& out);

std::vector<int> neighbors(int cell, const GridSpec& grid);

// Maximal 4-connected component of nonempty cells, or a single empty cell.
// Empty networks have size 1 and no border.
struct Network {
    int id = -1;
    bool nonempty = false;
    std::vector<int> members; // sorted cell ids
    std::vector<int> border;  // sorted; empty cells adjacent to >=1 member

    int size() const { return static_cast<int>(members.size()); }
};

struct NetworkPartition {
    std::vector<Network> networks; // ids 0..n-1 ordered by smallest member cell
    std::vector<int> network_of_cell;
    int nonempty_cells = 0;    // X
    int nonempty_networks = 0; // P
};

// Partition all M cells into networks. Deterministic: ids are assigned by
// smallest member cell id, ascending, so identical counts give identical ids.
NetworkPartition extract_networks(std::span<const int> counts, const GridSpec& grid);

// Border of a nonempty network: empty cells 4-adjacent to >=1 member.
std::vector<int> network_border(const Network& network, std::span<const int> counts,
                                const GridSpec& grid);

} // namespace acsbayes

#endif
