#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facespace {

/// Row-major so that one image's embedding is contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Gender { Male, Female };
enum class Illumination { Ambient, Spotlight };

std::string_view to_string(Gender g) noexcept;
std::string_view to_string(Illumination i) noexcept;
/// Case-insensitive; throws InvalidMetadata on anything else.
Gender parse_gender(std::string_view s);
Illumination parse_illumination(std::string_view s);

struct ImageMeta {
  std::string image_id;
  std::uint64_t identity_id = 0;
  Gender gender = Gender::Male;
  Illumination illumination = Illumination::Ambient;
  double yaw_deg = 0.0;
  int strength_pct = 100;

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

/// An embedding matrix (n x dim) joined row-by-row to image metadata.
///
/// Immutable once built: every operation below returns a new dataset. Row
/// order is the dataset's identity and is never changed implicitly.
class FaceDataset {
 public:
  static constexpr std::size_t kDefaultDim = 512;

  explicit FaceDataset(std::size_t dim = kDefaultDim);
  /// Validates shape, unique image ids, positive strengths, finite yaw and
  /// finite embedding values.
  FaceDataset(std::vector<ImageMeta> meta, RowMatrix embeddings);

  std::size_t size() const noexcept { return meta_.size(); }
  bool empty() const noexcept { return meta_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  const std::vector<ImageMeta>& meta() const noexcept { return meta_; }
  const ImageMeta& meta(std::size_t i) const { return meta_.at(i); }
  const RowMatrix& embeddings() const noexcept { return embeddings_; }
  auto row(std::size_t i) const { return embeddings_.row(static_cast<Eigen::Index>(i)); }

  /// Bitwise comparison of every embedding value plus metadata.
  friend bool operator==(const FaceDataset& a, const FaceDataset& b);

 private:
  std::size_t dim_;
  std::vector<ImageMeta> meta_;
  RowMatrix embeddings_;
};

using MetaPredicate = std::function<bool(const ImageMeta&)>;

/// Divides each row by its Euclidean norm. Throws ZeroVector naming the image.
FaceDataset normalize_rows(const FaceDataset& dataset);

/// True when every row norm is within `tolerance` of 1.
bool is_unit_normalized(const FaceDataset& dataset, double tolerance = 1e-6);

FaceDataset filter(const FaceDataset& dataset, const MetaPredicate& keep);
FaceDataset select_rows(const FaceDataset& dataset, std::span<const std::size_t> rows);

/// Sorted distinct values present in the dataset.
std::vector<int> strength_levels(const FaceDataset& dataset);
std::vector<std::uint64_t> identity_ids(const FaceDataset& dataset);

// File formats.
//
// Metadata CSV: header `image_id,identity_id,gender,illumination,yaw_deg,strength_pct`,
// one row per image, no quoting (image ids may not contain ',', '"' or newlines).
//
// Embedding binary: ASCII "FSE1", u64 LE n, u64 LE dim, then n*dim IEEE-754
// binary32 values, little-endian, row-major. Values are rounded to the nearest
// float on write, so a round trip is bit-exact for float-representable data and
// a second write reproduces identical bytes for any data.

inline constexpr std::string_view kMetaHeader =
    "image_id,identity_id,gender,illumination,yaw_deg,strength_pct";
inline constexpr std::string_view kEmbeddingMagic = "FSE1";

FaceDataset load_dataset(const std::filesystem::path& meta_path,
                         const std::filesystem::path& emb_path);
void write_dataset(const FaceDataset& dataset, const std::filesystem::path& meta_path,
                   const std::filesystem::path& emb_path);

std::vector<ImageMeta> read_metadata_csv(const std::filesystem::path& path);
void write_metadata_csv(std::span<const ImageMeta> meta, const std::filesystem::path& path);
RowMatrix read_embeddings(const std::filesystem::path& path);
void write_embeddings(const RowMatrix& embeddings, const std::filesystem::path& path);

}  // namespace facespace
