#include "legsim/terrain.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legsim/errors.hpp"
#include "legsim/format.hpp"
#include "legsim/rng.hpp"

namespace legsim {

namespace {

constexpr double kMinExtent = 0.5;

HeightField empty_field(double extent_x, double extent_y) {
  if (!(extent_x >= kMinExtent) || !(extent_y >= kMinExtent)) {
    throw ConfigError("terrain extents must be at least 0.5 m");
  }
  HeightField h;
  h.cell_size = kDefaultCellSize;
  h.n_cols = static_cast<int>(std::ceil(extent_x / h.cell_size - 1e-9));
  h.n_rows = static_cast<int>(std::ceil(extent_y / h.cell_size - 1e-9));
  h.heights.assign(static_cast<std::size_t>(h.n_rows) * h.n_cols, 0.0);
  return h;
}

void fill_normal(HeightField& h, double mean, double stddev, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, "terrain");
  for (double& cell : h.heights) cell = stddev > 0.0 ? rng.normal(mean, stddev) : mean;
}

}  // namespace

bool HeightField::contains(double x, double y) const {
  return x >= origin_x && y >= origin_y && x < origin_x + extent_x() &&
         y < origin_y + extent_y();
}

void HeightField::validate() const {
  if (!(cell_size > 0.0)) throw ConfigError("HeightField: cell_size must be positive");
  if (n_rows < 0 || n_cols < 0 ||
      heights.size() != static_cast<std::size_t>(n_rows) * n_cols) {
    throw ConfigError("HeightField: n_rows * n_cols does not match heights length");
  }
  for (double v : heights) {
    if (!std::isfinite(v)) throw ConfigError("HeightField: non-finite height");
  }
}

HeightField generate_block_terrain(double rugosity, double extent_x, double extent_y,
                                   std::uint64_t seed) {
  if (!(rugosity >= 0.0)) throw ConfigError("rugosity must be nonnegative");
  HeightField h = empty_field(extent_x, extent_y);
  h.rugosity = rugosity;
  h.seed = seed;
  fill_normal(h, 0.0, kStdPerRugosity * rugosity, seed);
  return h;
}

HeightField generate_rl_terrain(double sigma_cm, double extent_x, double extent_y,
                                std::uint64_t seed) {
  if (!(sigma_cm >= 0.0 && sigma_cm <= kRlSigmaMaxCm)) {
    throw ConfigError("terrain sigma must lie in [0, 12] cm");
  }
  HeightField h = empty_field(extent_x, extent_y);
  h.rugosity = sigma_cm / 100.0 / kStdPerRugosity;
  h.seed = seed;
  fill_normal(h, kRlTerrainMean, sigma_cm / 100.0, seed);
  return h;
}

HeightField flat_terrain(double extent_x, double extent_y, double height) {
  HeightField h = empty_field(extent_x, extent_y);
  for (double& cell : h.heights) cell = height;
  return h;
}

double height_at(const HeightField& h, double x, double y) {
  const double fx = std::floor((x - h.origin_x) / h.cell_size);
  const double fy = std::floor((y - h.origin_y) / h.cell_size);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < h.n_cols && fy < h.n_rows)) {
    std::ostringstream msg;
    msg << "terrain query (" << x << ", " << y << ") outside height field";
    throw RangeError(msg.str());
  }
  return h.at(static_cast<int>(fy), static_cast<int>(fx));
}

HeightField mirror_rows(const HeightField& h) {
  HeightField out = h;
  for (int i = 0; i < h.n_rows; ++i) {
    for (int j = 0; j < h.n_cols; ++j) {
      out.heights[static_cast<std::size_t>(i) * h.n_cols + j] = h.at(h.n_rows - 1 - i, j);
    }
  }
  return out;
}

HeightField rotate_quarter_turn(const HeightField& h) {
  // New x axis is the old +y, new y axis is the old -x reversed.
  HeightField out = h;
  out.n_rows = h.n_cols;
  out.n_cols = h.n_rows;
  out.origin_x = -(h.origin_y + h.extent_y());
  out.origin_y = h.origin_x;
  for (int i = 0; i < out.n_rows; ++i) {
    for (int j = 0; j < out.n_cols; ++j) {
      // New cell (i, j) covers x' in column j, y' in row i. Old x = y', old y = -x'.
      const int old_j = i;
      const int old_i = h.n_rows - 1 - j;
      out.heights[static_cast<std::size_t>(i) * out.n_cols + j] = h.at(old_i, old_j);
    }
  }
  return out;
}

std::optional<double> resample_schedule(long step_counter, const SigmaSchedule& schedule,
                                        Rng& rng) {
  if (schedule.every < 1) throw ConfigError("resample interval must be at least 1");
  if (step_counter % schedule.every != 0) return std::nullopt;
  return rng.uniform(schedule.sigma_min_cm, schedule.sigma_max_cm);
}

std::string height_field_to_json(const HeightField& h) {
  nlohmann::ordered_json doc;
  doc["cell_size"] = h.cell_size;
  doc["n_rows"] = h.n_rows;
  doc["n_cols"] = h.n_cols;
  doc["origin"] = {h.origin_x, h.origin_y};
  doc["seed"] = h.seed;
  doc["rugosity"] = h.rugosity;
  doc["heights"] = h.heights;
  return doc.dump() + "\n";
}

HeightField height_field_from_json(const std::string& text) {
  HeightField h;
  try {
    const auto doc = nlohmann::json::parse(text);
    h.cell_size = doc.at("cell_size").get<double>();
    h.n_rows = doc.at("n_rows").get<int>();
    h.n_cols = doc.at("n_cols").get<int>();
    h.origin_x = doc.at("origin").at(0).get<double>();
    h.origin_y = doc.at("origin").at(1).get<double>();
    h.seed = doc.at("seed").get<std::uint64_t>();
    h.rugosity = doc.at("rugosity").get<double>();
    h.heights = doc.at("heights").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed height field JSON: ") + e.what());
  }
  h.validate();
  return h;
}

std::string height_field_to_csv(const HeightField& h) {
  std::string out = "i,j,height_m\n";
  for (int i = 0; i < h.n_rows; ++i) {
    for (int j = 0; j < h.n_cols; ++j) {
      out += std::to_string(i) + "," + std::to_string(j) + "," + format_double(h.at(i, j)) + "\n";
    }
  }
  return out;
}

}  // namespace legsim
