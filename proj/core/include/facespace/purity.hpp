#pragma once

#include <cstddef>

#include "facespace/dataset.hpp"
#include "facespace/kvconfig.hpp"

namespace facespace {

/// Mean fraction of each image's k nearest neighbours (cosine, full
/// dimension, self excluded) that share the attribute.
struct PurityReport {
  std::size_t k = 0;
  std::size_t n = 0;
  double identity = 0.0;
  double gender = 0.0;
  double illumination = 0.0;
  double viewpoint = 0.0;

  KeyValues to_key_values() const;
};

/// Exact scan; equal similarities are broken by lower row index. `keep`
/// selects the slice (all rows when empty). Throws SliceTooSmall unless
/// slice size > k, InvalidArgument for k == 0.
PurityReport neighbor_purity(const FaceDataset& dataset, std::size_t k, const MetaPredicate& keep = {});

}  // namespace facespace
