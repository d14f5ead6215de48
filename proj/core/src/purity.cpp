#include "facespace/purity.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "facespace/error.hpp"
#include "facespace/parallel.hpp"

namespace facespace {

KeyValues PurityReport::to_key_values() const {
  return {{"k", std::to_string(k)},
          {"n", std::to_string(n)},
          {"identity", format_double(identity)},
          {"gender", format_double(gender)},
          {"illumination", format_double(illumination)},
          {"viewpoint", format_double(viewpoint)}};
}

PurityReport neighbor_purity(const FaceDataset& dataset, std::size_t k, const MetaPredicate& keep) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  const FaceDataset slice = normalize_rows(keep ? filter(dataset, keep) : dataset);
  const std::size_t n = slice.size();
  if (n <= k) {
    throw Error(ErrorCode::SliceTooSmall,
                "slice has " + std::to_string(n) + " images; need more than k=" + std::to_string(k));
  }
  const RowMatrix& x = slice.embeddings();

  // Per-image attribute fractions, reduced in row order afterwards.
  std::vector<std::array<double, 4>> per_image(n);
  constexpr std::size_t kBlock = 256;
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
  parallel_for(n_blocks, [&](std::size_t block_begin, std::size_t block_end) {
    std::vector<std::size_t> order(n);
    for (std::size_t b = block_begin; b < block_end; ++b) {
      const auto r0 = static_cast<Eigen::Index>(b * kBlock);
      const auto rows = static_cast<Eigen::Index>(std::min(kBlock, n - b * kBlock));
      const RowMatrix sims = x.middleRows(r0, rows) * x.transpose();
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto i = static_cast<std::size_t>(r0 + r);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::swap(order[i], order.back());
        const auto closer = [&](std::size_t a, std::size_t c) {
          const double sa = sims(r, static_cast<Eigen::Index>(a));
          const double sc = sims(r, static_cast<Eigen::Index>(c));
          return sa != sc ? sa > sc : a < c;
        };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                          order.end() - 1, closer);
        const auto& mi = slice.meta(i);
        std::array<double, 4> hits{};
        for (std::size_t t = 0; t < k; ++t) {
          const auto& mj = slice.meta(order[t]);
          hits[0] += mj.identity_id == mi.identity_id;
          hits[1] += mj.gender == mi.gender;
          hits[2] += mj.illumination == mi.illumination;
          hits[3] += mj.yaw_deg == mi.yaw_deg;
        }
        for (auto& h : hits) h /= static_cast<double>(k);
        per_image[i] = hits;
      }
    }
  });

  std::array<double, 4> sum{};
  for (const auto& p : per_image) {
    for (std::size_t a = 0; a < 4; ++a) sum[a] += p[a];
  }
  PurityReport out;
  out.k = k;
  out.n = n;
  out.identity = sum[0] / static_cast<double>(n);
  out.gender = sum[1] / static_cast<double>(n);
  out.illumination = sum[2] / static_cast<double>(n);
  out.viewpoint = sum[3] / static_cast<double>(n);
  return out;
}

}  // namespace facespace
