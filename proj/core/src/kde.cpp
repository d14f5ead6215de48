#include "facespace/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facespace/error.hpp"
#include "facespace/parallel.hpp"

namespace facespace {

double silverman_bandwidth(std::span<const double> scores) {
  const auto n = static_cast<double>(scores.size());
  if (scores.size() < 2) return 0.0;
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return 1.06 * sd * std::pow(n, -0.2);
}

double kde_at(std::span<const double> scores, double bandwidth, double x) {
  const double norm = 1.0 / (static_cast<double>(scores.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  double sum = 0.0;
  for (double s : scores) {
    const double u = (x - s) / bandwidth;
    sum += std::exp(-0.5 * u * u);
  }
  return sum * norm;
}

DensityCurve kde(std::span<const double> scores, std::optional<double> bandwidth) {
  if (scores.size() < 2) throw Error(ErrorCode::InvalidArgument, "kde needs at least 2 scores");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error(ErrorCode::NonFinite, "kde input contains a non-finite score");
  }
  double h = 0.0;
  if (bandwidth) {
    if (!(*bandwidth > 0.0) || !std::isfinite(*bandwidth)) {
      throw Error(ErrorCode::InvalidArgument, "kde bandwidth must be positive");
    }
    h = *bandwidth;
  } else {
    h = silverman_bandwidth(scores);
    if (!(h > 0.0)) throw Error(ErrorCode::DegenerateData, "scores have zero variance; give a bandwidth");
  }

  const auto [lo_it, hi_it] = std::ranges::minmax_element(scores);
  const double lo = *lo_it - 3.0 * h;
  const double hi = *hi_it + 3.0 * h;
  DensityCurve curve;
  curve.bandwidth = h;
  curve.grid.resize(kKdeGridPoints);
  curve.density.resize(kKdeGridPoints);
  const double step = (hi - lo) / static_cast<double>(kKdeGridPoints - 1);
  for (std::size_t g = 0; g < kKdeGridPoints; ++g) curve.grid[g] = lo + step * static_cast<double>(g);
  curve.grid.back() = hi;

  // Each grid point is summed independently in input order, so the result
  // does not depend on the thread split.
  parallel_for(kKdeGridPoints, [&](std::size_t begin, std::size_t end) {
    for (std::size_t g = begin; g < end; ++g) curve.density[g] = kde_at(scores, h, curve.grid[g]);
  });
  return curve;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "trapezoid: x and y differ in length");
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

}  // namespace facespace
