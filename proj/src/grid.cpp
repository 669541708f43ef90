#include "acsbayes/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace acsbayes {

int neighbors(int cell, const GridSpec& grid, std::array<int, 4>& out) {
    if (!grid.valid() || cell < 0 || cell >= grid.cell_count())
        throw std::domain_error("neighbors: cell id " + std::to_string(cell) +
                                " outside grid");
    const int r = grid.row_of(cell);
    const int c = grid.col_of(cell);
    int n = 0;
    if (r > 0) out[n++] = cell - grid.cols;
    if (r + 1 < grid.rows) out[n++] = cell + grid.cols;
    if (c > 0) out[n++] = cell - 1;
    if (c + 1 < grid.cols) out[n++] = cell + 1;
    return n;
}

std::vector<int> neighbors(int cell, const GridSpec& grid) {
    std::array<int, 4> buf;
    const int n = neighbors(cell, grid, buf);
    std::vector<int> result(buf.begin(), buf.begin() + n);
    std::sort(result.begin(), result.end());
    return result;
}

NetworkPartition extract_networks(std::span<const int> counts, const GridSpec& grid) {
    const int m = grid.cell_count();
    if (static_cast<int>(counts.size()) != m)
        throw std::invalid_argument("extract_networks: counts length != cell count");

    NetworkPartition part;
    part.network_of_cell.assign(m, -1);

    std::array<int, 4> nbr;
    std::vector<int> stack;
    int next_id = 0;

    // Scanning in cell order makes ids ascend with smallest member cell id:
    // a component is first reached at its minimal cell.
    for (int cell = 0; cell < m; ++cell) {
        if (part.network_of_cell[cell] >= 0) continue;
        Network net;
        net.id = next_id++;
        if (counts[cell] == 0) {
            net.nonempty = false;
            net.members = {cell};
            part.network_of_cell[cell] = net.id;
        } else {
            net.nonempty = true;
            stack.clear();
            stack.push_back(cell);
            part.network_of_cell[cell] = net.id;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                net.members.push_back(cur);
                const int n = neighbors(cur, grid, nbr);
                for (int i = 0; i < n; ++i) {
                    const int nb = nbr[i];
                    if (counts[nb] > 0 && part.network_of_cell[nb] < 0) {
                        part.network_of_cell[nb] = net.id;
                        stack.push_back(nb);
                    }
                }
            }
            std::sort(net.members.begin(), net.members.end());
            part.nonempty_cells += net.size();
            ++part.nonempty_networks;
        }
        part.networks.push_back(std::move(net));
    }

    for (auto& net : part.networks)
        if (net.nonempty) net.border = network_border(net, counts, grid);

    return part;
}

std::vector<int> network_border(const Network& network, std::span<const int> counts,
                                const GridSpec& grid) {
    if (!network.nonempty)
        throw std::domain_error("network_border: empty networks have no border");
    std::array<int, 4> nbr;
    std::vector<int> border;
    for (int cell : network.members) {
        const int n = neighbors(cell, grid, nbr);
        for (int i = 0; i < n; ++i)
            if (counts[nbr[i]] == 0) border.push_back(nbr[i]);
    }
    std::sort(border.begin(), border.end());
    border.erase(std::unique(border.begin(), border.end()), border.end());
    return border;
}

} // namespace acsbayes
