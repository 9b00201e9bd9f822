#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "htmsp/errors.hpp"

namespace htmsp {

struct GridDims {
  int rows = 0;
  int cols = 0;

  int count() const { return rows * cols; }
  bool operator==(const GridDims&) const = default;
};

struct GridPoint {
  int row = 0;
  int col = 0;
  bool operator==(const GridPoint&) const = default;
};

// Input grid, mini-column grid, and the per-column input-space centers.
struct Topology {
  GridDims input_dims;
  GridDims column_dims;
  std::vector<GridPoint> centers;  // row-major, one per column

  int num_columns() const { return column_dims.count(); }
  int num_inputs() const { return input_dims.count(); }
};

// Centers are placed by uniform scaling of the column coordinates onto the
// input grid, rounded to the nearest grid point.
inline Topology make_topology(GridDims input_dims, GridDims column_dims) {
  if (input_dims.rows < 1 || input_dims.cols < 1)
    throw ConfigError("input dims must be positive, got " + std::to_string(input_dims.rows) +
                      "x" + std::to_string(input_dims.cols));
  if (column_dims.rows < 1 || column_dims.cols < 1)
    throw ConfigError("column dims must be positive, got " + std::to_string(column_dims.rows) +
                      "x" + std::to_string(column_dims.cols));

  auto scale = [](int coord, int columns, int inputs) {
    const double scaled = (coord + 0.5) * static_cast<double>(inputs) / columns - 0.5;
    return std::clamp(static_cast<int>(std::lround(scaled)), 0, inputs - 1);
  };

  Topology t{input_dims, column_dims, {}};
  t.centers.reserve(static_cast<std::size_t>(column_dims.count()));
  for (int r = 0; r < column_dims.rows; ++r) {
    for (int c = 0; c < column_dims.cols; ++c) {
      t.centers.push_back({scale(r, column_dims.rows, input_dims.rows),
                           scale(c, column_dims.cols, input_dims.cols)});
    }
  }
  return t;
}

// Inclusive bounds of the gamma-edge hypercube around `center`, clipped at
// the grid edges (no wraparound).
struct HypercubeBounds {
  int row_lo = 0;
  int row_hi = -1;
  int col_lo = 0;
  int col_hi = -1;

  bool empty() const { return row_lo > row_hi || col_lo > col_hi; }
};

inline HypercubeBounds hypercube_bounds(GridPoint center, int gamma, GridDims grid) {
  const int below = (gamma - 1) / 2;  // cells before the center along each axis
  const int above = gamma / 2;        // cells after; gamma cells total before clipping
  HypercubeBounds b;
  b.row_lo = std::max(0, center.row - below);
  b.row_hi = std::min(grid.rows - 1, center.row + above);
  b.col_lo = std::max(0, center.col - below);
  b.col_hi = std::min(grid.cols - 1, center.col + above);
  return b;
}

}  // namespace htmsp
