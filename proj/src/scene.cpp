#include "trajirl/scene.hpp"

#include <cmath>
#include <stdexcept>

namespace trajirl {
namespace scene {

void GridConfig::validate() const {
    if (n_cells_per_side < 1) throw std::invalid_argument("grid: n_cells_per_side must be >= 1");
    if (cell_size <= 0.0) throw std::invalid_argument("grid: cell_size must be > 0");
}

int cell_index(Vec2 center, Vec2 pos, const GridConfig& grid) {
    const double hw = grid.half_width();
    const double dx = pos.x - center.x;
    const double dy = pos.y - center.y;
    const int col = static_cast<int>(std::floor((dx + hw) / grid.cell_size));
    const int row = static_cast<int>(std::floor((dy + hw) / grid.cell_size));
    if (col < 0 || col >= grid.n_cells_per_side || row < 0 || row >= grid.n_cells_per_side) {
        return -1;
    }
    return row * grid.n_cells_per_side + col;
}

Array build_occupancy_pool(Vec2 target_pos, const std::vector<NeighborObservation>& neighbors,
                           const GridConfig& grid, int hidden_dim) {
    grid.validate();
    Array pooled = Array::zeros({grid.n_cells() * hidden_dim});
    std::vector<int> counts(grid.n_cells(), 0);
    for (const auto& nb : neighbors) {
        if (static_cast<int>(nb.hidden_state.size()) != hidden_dim) {
            throw std::invalid_argument(
                "build_occupancy_pool: neighbor hidden size " +
                std::to_string(nb.hidden_state.size()) + " != " + std::to_string(hidden_dim));
        }
        const int cell = cell_index(target_pos, nb.position, grid);
        if (cell < 0) continue;
        double* dst = &pooled.data[static_cast<size_t>(cell) * hidden_dim];
        for (int i = 0; i < hidden_dim; ++i) dst[i] += nb.hidden_state[i];
        counts[cell] += 1;
    }
    for (int c = 0; c < grid.n_cells(); ++c) {
        if (counts[c] < 2) continue;
        double* dst = &pooled.data[static_cast<size_t>(c) * hidden_dim];
        const double inv = 1.0 / counts[c];
        for (int i = 0; i < hidden_dim; ++i) dst[i] *= inv;
    }
    return pooled;
}

int analyzer_forward(Tape& t, int pooled, const nn::DenseNodes& analyzer) {
    return nn::dense_forward(t, pooled, analyzer, nn::Activation::Relu);
}

int scene_context_for_predicted(Tape& t, Vec2 pred_pos,
                                const std::vector<NeighborObservation>& neighbors,
                                const GridConfig& grid, const nn::DenseNodes& analyzer,
                                int hidden_dim) {
    int pooled = t.input(build_occupancy_pool(pred_pos, neighbors, grid, hidden_dim));
    return analyzer_forward(t, pooled, analyzer);
}

}  // namespace scene
}  // namespace trajirl
