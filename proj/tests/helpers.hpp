#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <filesystem>
#include <string>

#include "facespace/dataset.hpp"
#include "facespace/rng.hpp"

namespace testutil {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("facespace-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small random dataset; values are float-representable so file round trips
/// are exact.
inline facespace::FaceDataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t dim) {
  facespace::Rng rng(seed);
  std::vector<facespace::ImageMeta> meta(n);
  facespace::RowMatrix emb(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = meta[i];
    m.image_id = "img" + std::to_string(i) + "_" + std::to_string(rng.below(1000));
    m.identity_id = rng.below(20);
    m.gender = rng.below(2) ? facespace::Gender::Female : facespace::Gender::Male;
    m.illumination = rng.below(2) ? facespace::Illumination::Spotlight : facespace::Illumination::Ambient;
    m.yaw_deg = static_cast<double>(rng.below(91));
    if (rng.below(4) == 0) m.yaw_deg += 0.5;
    m.strength_pct = static_cast<int>(25 * (1 + rng.below(5)));
    for (std::size_t j = 0; j < dim; ++j) {
      emb(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          static_cast<double>(static_cast<float>(rng.normal() * 3.0));
    }
  }
  return facespace::FaceDataset(std::move(meta), std::move(emb));
}

}  // namespace testutil

#define EXPECT_FS_ERROR(stmt, ec)                                   \
  do {                                                              \
    try {                                                           \
      stmt;                                                         \
      ADD_FAILURE() << "expected " #ec " from " #stmt;              \
    } catch (const facespace::Error& e) {                           \
      EXPECT_EQ(e.code(), facespace::ErrorCode::ec) << e.what();    \
    }                                                               \
  } while (0)

#include <numeric>

#include "facespace/quadtree.hpp"

namespace testutil {

/// n x dim matrix of unit rows drawn isotropically.
inline facespace::RowMatrix random_unit_rows(std::uint64_t seed, std::size_t n, std::size_t dim) {
  facespace::Rng rng(seed);
  facespace::RowMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
    m.row(i).normalize();
  }
  return m;
}

struct Clusters {
  facespace::RowMatrix rows;  // unit-normalized
  std::vector<int> labels;
};

/// Three Gaussian clusters whose centroid separation is `ratio` times the RMS
/// within-cluster spread, rows normalized afterwards.
inline Clusters three_clusters(std::uint64_t seed, std::size_t per_cluster, std::size_t dim, double ratio = 10.0) {
  facespace::Rng rng(seed);
  const double spread = 1.0;
  const double sigma = spread / std::sqrt(static_cast<double>(dim));
  const double radius = ratio * spread / std::sqrt(2.0);
  std::vector<Eigen::VectorXd> centers;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd c(dim);
    for (auto& v : c) v = rng.normal();
    centers.push_back(c.normalized() * radius);
  }
  Clusters out;
  out.rows.resize(static_cast<Eigen::Index>(3 * per_cluster), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < 3 * per_cluster; ++i) {
    const int k = static_cast<int>(i % 3);
    Eigen::VectorXd v = centers[k];
    for (auto& x : v) x += sigma * rng.normal();
    out.rows.row(static_cast<Eigen::Index>(i)) = v.normalized().transpose();
    out.labels.push_back(k);
  }
  return out;
}

/// Single-linkage clustering of a 2-D layout with merge distance `cut`;
/// returns a component id per point.
inline std::vector<std::size_t> single_linkage(const facespace::Layout& y, double cut) {
  const auto n = static_cast<std::size_t>(y.rows());
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((y.row(static_cast<Eigen::Index>(i)) - y.row(static_cast<Eigen::Index>(j))).norm() < cut) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<std::size_t> comp(n);
  for (std::size_t i = 0; i < n; ++i) comp[i] = find(i);
  return comp;
}

/// True when single linkage at half the minimum label-centroid distance
/// yields exactly the label partition.
inline bool recovers_labels(const facespace::Layout& y, const std::vector<int>& labels) {
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Eigen::Vector2d> centroid(k, Eigen::Vector2d::Zero());
  std::vector<int> count(k, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    centroid[labels[i]] += y.row(static_cast<Eigen::Index>(i)).transpose();
    ++count[labels[i]];
  }
  double min_dist = INFINITY;
  for (int a = 0; a < k; ++a) centroid[a] /= count[a];
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) min_dist = std::min(min_dist, (centroid[a] - centroid[b]).norm());
  }
  const auto comp = single_linkage(y, 0.5 * min_dist);
  std::map<std::size_t, int> label_of_comp;
  std::set<std::size_t> comps;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    comps.insert(comp[i]);
    const auto [it, inserted] = label_of_comp.emplace(comp[i], labels[i]);
    if (!inserted && it->second != labels[i]) return false;
  }
  return comps.size() == static_cast<std::size_t>(k);
}

}  // namespace testutil
