#pragma once

#include <vector>

#include "trajirl/common.hpp"
#include "trajirl/nn.hpp"
#include "trajirl/tape.hpp"

namespace trajirl {
namespace scene {

/// Axis-aligned square grid centered on the target agent. Cells use
/// half-open intervals [lo, hi) on both axes; flattening is row-major with
/// row 0 at the most negative y offset.
struct GridConfig {
    int n_cells_per_side = 4;
    double cell_size = 2.0;  // meters

    double half_width() const { return n_cells_per_side * cell_size / 2.0; }
    int n_cells() const { return n_cells_per_side * n_cells_per_side; }

    void validate() const;
};

struct NeighborObservation {
    long agent_id = 0;
    Vec2 position;
    std::vector<double> hidden_state;  // encoder hidden of the neighbor, treated as constant
};

/// Cell index (row-major) for a neighbor at `pos` on a grid centered at
/// `center`, or -1 when outside the grid.
int cell_index(Vec2 center, Vec2 pos, const GridConfig& grid);

/// Per-cell arithmetic mean of the hidden states of neighbors falling in
/// that cell; empty cells stay zero. Output length n_cells^2 * hidden_dim.
Array build_occupancy_pool(Vec2 target_pos, const std::vector<NeighborObservation>& neighbors,
                           const GridConfig& grid, int hidden_dim);

/// relu(W_A * pooled + b); recorded on the tape so the shared analyzer
/// receives gradients from both losses.
int analyzer_forward(Tape& t, int pooled, const nn::DenseNodes& analyzer);

/// Scene context at a predicted position: pooling is re-centered on
/// pred_pos while neighbors stay at ground truth. The pooled vector enters
/// the tape as a constant (cell assignment is piecewise constant in
/// pred_pos and neighbor hidden states carry no gradient).
int scene_context_for_predicted(Tape& t, Vec2 pred_pos,
                                const std::vector<NeighborObservation>& neighbors,
                                const GridConfig& grid, const nn::DenseNodes& analyzer,
                                int hidden_dim);

}  // namespace scene
}  // namespace trajirl
