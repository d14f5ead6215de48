#pragma once

#include <cstddef>
#include <vector>

#include "facespace/affinity.hpp"
#include "facespace/quadtree.hpp"

namespace facespace {

/// Exact gradient of KL(P || Q) for the Student-t kernel
/// q_ij = (1 + |y_i - y_j|^2)^-1 / Z, O(n^2).
/// `p_scale` multiplies P (early exaggeration) without copying it.
Layout exact_gradient(const AffinityMatrix& p, const Layout& y, double p_scale = 1.0);

/// Per-point instrumentation from a Barnes-Hut pass.
struct BhStats {
  std::vector<std::size_t> interactions;  // repulsion interactions per point
  std::size_t tree_depth = 0;
};

/// Barnes-Hut gradient: attraction summed exactly over stored P entries,
/// repulsion approximated with a quadtree. theta = 0 reproduces
/// exact_gradient up to summation order.
Layout bh_gradient(const AffinityMatrix& p, const Layout& y, double theta, double p_scale = 1.0,
                   BhStats* stats = nullptr);

/// KL(P || Q) computed exactly.
double kl_divergence(const AffinityMatrix& p, const Layout& y);

}  // namespace facespace
