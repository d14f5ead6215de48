#include "facespace/gradient.hpp"

#include <cmath>
#include <string>

#include "facespace/error.hpp"
#include "facespace/parallel.hpp"

namespace facespace {
namespace {

void check_shapes(const AffinityMatrix& p, const Layout& y) {
  if (p.size() != static_cast<std::size_t>(y.rows())) {
    throw Error(ErrorCode::ShapeMismatch, "P is " + std::to_string(p.size()) + "x" +
                                              std::to_string(p.size()) + " but layout has " +
                                              std::to_string(y.rows()) + " points");
  }
}

/// Sum of q~_ij over i != j, with per-row partials reduced in row order.
double normalization(const Layout& y) {
  const auto n = static_cast<std::size_t>(y.rows());
  std::vector<double> partial(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double dx = y(static_cast<Eigen::Index>(i), 0) - y(static_cast<Eigen::Index>(j), 0);
        const double dy = y(static_cast<Eigen::Index>(i), 1) - y(static_cast<Eigen::Index>(j), 1);
        z += 1.0 / (1.0 + dx * dx + dy * dy);
      }
      partial[i] = z;
    }
  });
  double z = 0.0;
  for (double v : partial) z += v;
  return z;
}

}  // namespace

Layout exact_gradient(const AffinityMatrix& p, const Layout& y, double p_scale) {
  check_shapes(p, y);
  const auto n = static_cast<std::size_t>(y.rows());
  const double z = normalization(y);
  Layout grad = Layout::Zero(y.rows(), 2);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto jj = static_cast<Eigen::Index>(j);
        const double dx = y(ii, 0) - y(jj, 0);
        const double dy = y(ii, 1) - y(jj, 1);
        const double qt = 1.0 / (1.0 + dx * dx + dy * dy);
        const double mult = (p_scale * p.at(i, j) - qt / z) * qt;
        gx += mult * dx;
        gy += mult * dy;
      }
      grad(ii, 0) = 4.0 * gx;
      grad(ii, 1) = 4.0 * gy;
    }
  });
  return grad;
}

Layout bh_gradient(const AffinityMatrix& p, const Layout& y, double theta, double p_scale,
                   BhStats* stats) {
  check_shapes(p, y);
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta must lie in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(y.rows());
  const QuadTree tree(y);

  Layout attract = Layout::Zero(y.rows(), 2);
  Layout repel = Layout::Zero(y.rows(), 2);
  std::vector<double> z_partial(n, 0.0);
  std::vector<std::size_t> interactions(n, 0);

  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double ax = 0.0, ay = 0.0;
      p.for_each_in_row(i, [&](std::size_t j, double pij) {
        if (pij == 0.0 || j == i) return;
        const auto jj = static_cast<Eigen::Index>(j);
        const double dx = y(ii, 0) - y(jj, 0);
        const double dy = y(ii, 1) - y(jj, 1);
        const double qt = 1.0 / (1.0 + dx * dx + dy * dy);
        ax += pij * qt * dx;
        ay += pij * qt * dy;
      });
      attract(ii, 0) = p_scale * ax;
      attract(ii, 1) = p_scale * ay;

      const auto rep = tree.repulsion(i, theta);
      repel(ii, 0) = rep.force_x;
      repel(ii, 1) = rep.force_y;
      z_partial[i] = rep.z;
      interactions[i] = rep.interactions;
    }
  });

  double z = 0.0;
  for (double v : z_partial) z += v;

  Layout grad = 4.0 * (attract - repel / z);
  if (stats) {
    stats->interactions = std::move(interactions);
    stats->tree_depth = tree.depth();
  }
  return grad;
}

double kl_divergence(const AffinityMatrix& p, const Layout& y) {
  check_shapes(p, y);
  const auto n = static_cast<std::size_t>(y.rows());
  const double z = normalization(y);
  std::vector<double> partial(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double kl = 0.0;
      p.for_each_in_row(i, [&](std::size_t j, double pij) {
        if (pij <= 0.0 || j == i) return;
        const auto jj = static_cast<Eigen::Index>(j);
        const double dx = y(ii, 0) - y(jj, 0);
        const double dy = y(ii, 1) - y(jj, 1);
        const double q = 1.0 / ((1.0 + dx * dx + dy * dy) * z);
        kl += pij * std::log(pij / q);
      });
      partial[i] = kl;
    }
  });
  double kl = 0.0;
  for (double v : partial) kl += v;
  return kl;
}

}  // namespace facespace
