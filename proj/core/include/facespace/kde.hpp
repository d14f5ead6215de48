#pragma once

#include <optional>
#include <span>
#include <vector>

namespace facespace {

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

inline constexpr std::size_t kKdeGridPoints = 512;

/// 1.06 * sd * n^(-1/5), sample SD. Zero for constant input.
double silverman_bandwidth(std::span<const double> scores);

/// Gaussian KDE on kKdeGridPoints evenly spaced points over
/// [min - 3h, max + 3h]. Throws InvalidArgument for < 2 scores or h <= 0,
/// DegenerateData for constant scores without an explicit bandwidth.
DensityCurve kde(std::span<const double> scores, std::optional<double> bandwidth = std::nullopt);

/// Direct evaluation at one point; no grid.
double kde_at(std::span<const double> scores, double bandwidth, double x);

double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace facespace
