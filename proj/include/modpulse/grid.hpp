#pragma once

#include "modpulse/errors.hpp"
#include "modpulse/fourier.hpp"

#include <vector>

namespace modpulse {

// Uniform periodic grid on [0, 2 pi Q) with an integer number of nodes per cell.
class LatticeGrid {
 public:
  LatticeGrid(int cells, int points) : cells_(cells), points_(points) {
    if (cells < 1) throw ConfigError("domain_cells must be >= 1");
    if (points < cells || points % cells != 0)
      throw ConfigError("x_points must be a positive multiple of domain_cells (2 pi periodicity)");
  }

  int cells() const { return cells_; }
  int size() const { return points_; }
  int points_per_cell() const { return points_ / cells_; }
  double length() const { return two_pi * cells_; }
  double dx() const { return length() / points_; }
  double x(int j) const { return j * dx(); }
  std::vector<double> nodes() const {
    std::vector<double> out(points_);
    for (int j = 0; j < points_; ++j) out[j] = x(j);
    return out;
  }

 private:
  int cells_;
  int points_;
};

}  // namespace modpulse
