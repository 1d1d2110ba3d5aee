#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace legsim {

class Rng;

/// Block terrain: a row-major grid of constant-height square cells.
/// Row index i runs along +y, column index j along +x; cell (0, 0) has its
/// lower-left corner at `origin`.
struct HeightField {
  double cell_size = 0.10;
  int n_rows = 0;
  int n_cols = 0;
  std::vector<double> heights;
  double origin_x = 0.0;
  double origin_y = 0.0;
  double rugosity = 0.0;  // informational
  std::uint64_t seed = 0;

  double at(int i, int j) const { return heights[static_cast<std::size_t>(i) * n_cols + j]; }
  double extent_x() const { return n_cols * cell_size; }
  double extent_y() const { return n_rows * cell_size; }
  bool contains(double x, double y) const;

  void validate() const;
};

inline constexpr double kDefaultCellSize = 0.10;
// Cell-height std per unit rugosity, in metres (12.5 cm).
inline constexpr double kStdPerRugosity = 0.125;
inline constexpr double kRlTerrainMean = 0.20;
inline constexpr double kRlSigmaMaxCm = 12.0;

// Lab-style terrain: i.i.d. N(0, 0.125 * rugosity) cell heights over an
// extent_x by extent_y field.
HeightField generate_block_terrain(double rugosity, double extent_x, double extent_y,
                                   std::uint64_t seed);

// Training terrain: i.i.d. N(0.20 m, sigma_cm / 100) cell heights.
HeightField generate_rl_terrain(double sigma_cm, double extent_x, double extent_y,
                                std::uint64_t seed);

HeightField flat_terrain(double extent_x, double extent_y, double height = 0.0);

// Height of the containing cell. Points on a cell edge belong to the cell with
// the larger index. Throws RangeError outside the field.
double height_at(const HeightField& h, double x, double y);

// Field mirrored about its horizontal centre line (row i <-> n_rows-1-i).
HeightField mirror_rows(const HeightField& h);

// Field rotated by +90 degrees about the world origin: a point (x, y) of the
// input maps to (-y, x).
HeightField rotate_quarter_turn(const HeightField& h);

struct SigmaSchedule {
  int every = 16;
  double sigma_min_cm = 2.0;
  double sigma_max_cm = 8.0;
};

// Fresh sigma (cm) at multiples of `every`, nothing in between.
std::optional<double> resample_schedule(long step_counter, const SigmaSchedule& schedule,
                                        Rng& rng);

std::string height_field_to_json(const HeightField& h);
HeightField height_field_from_json(const std::string& text);
std::string height_field_to_csv(const HeightField& h);

}  // namespace legsim
