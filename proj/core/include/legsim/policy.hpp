#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "legsim/amplitudes.hpp"
#include "legsim/mlp.hpp"

namespace legsim {

inline constexpr int kObsDim = 4;
inline constexpr int kActionDim = 3;
inline constexpr int kCheckpointVersion = 1;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Fixed affine observation scaling, (x - mean) / scale, applied once before
/// both networks.
struct ObsNormalizer {
  std::array<double, kObsDim> mean{};
  std::array<double, kObsDim> scale{1.0, 1.0, 1.0, 1.0};

  // Maps every amplitude range and beta in [0, 1] onto [-1, 1].
  static ObsNormalizer standard();
  std::array<double, kObsDim> apply(const Observation& obs) const;
};

/// Policy and value networks plus the Gaussian log-std.
struct PolicyParams {
  Mlp policy;
  Mlp value;
  std::array<double, kActionDim> log_std{};
  ObsNormalizer normalizer = ObsNormalizer::standard();

  // Fresh networks with `hidden` layer widths drawn from `seed`.
  static PolicyParams initial(std::uint64_t seed, const std::vector<int>& hidden = {64, 64},
                              double log_std = -0.5);

  // Throws ConfigError on shape mismatch, non-finite values or log_std out
  // of range.
  void validate() const;

  std::size_t parameter_count() const;
  // Policy parameters, then log_std, then value parameters.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
};

// Mean of the pre-squash Gaussian action.
std::array<double, kActionDim> policy_mean(const PolicyParams& params, const Observation& obs);

double gaussian_log_prob(std::span<const double> u, std::span<const double> mean,
                         std::span<const double> log_std);
double gaussian_entropy(std::span<const double> log_std);

std::string checkpoint_to_json(const PolicyParams& params, const std::string& config_json = "{}");
PolicyParams checkpoint_from_json(const std::string& text);
void save_checkpoint(const PolicyParams& params, const std::string& path,
                     const std::string& config_json = "{}");
PolicyParams load_checkpoint(const std::string& path);

}  // namespace legsim
