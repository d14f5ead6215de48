#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facespace/dataset.hpp"

namespace facespace {

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws ZeroVector.
double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

struct PairScore {
  double score = 0.0;
  bool view_changed = false;
  bool illum_changed = false;
};

/// Image-pair similarity scores from one strength slice. Self-pairs are
/// never included.
struct ScoreSet {
  std::vector<PairScore> same_id;
  std::vector<PairScore> diff_id;
  int strength_pct = 0;
  bool same_gender_only = true;

  std::vector<double> same_scores() const;
  std::vector<double> diff_scores() const;
};

struct PairOptions {
  bool same_gender_only = true;
  /// 0 enumerates every different-identity pair. Otherwise keeps a uniform
  /// reservoir sample of at most this many (for large ingested datasets).
  std::size_t max_diff_pairs = 0;
  std::uint64_t seed = 1;
};

/// All unordered pairs within the strength slice, scored by cosine.
/// Throws EmptySlice.
ScoreSet build_pairs(const FaceDataset& dataset, int strength_pct, const PairOptions& options = {});

struct RocSummary {
  double auc = 0.5;
  std::size_t n_same = 0;
  std::size_t n_diff = 0;
};

/// P(same > diff) + 0.5 P(same == diff) via the rank-sum statistic in
/// O(n log n). Exact: equals (2*#greater + #ties) / (2 n_same n_diff).
/// Throws EmptyDistribution.
RocSummary auc(std::span<const double> same, std::span<const double> diff);
RocSummary auc(const ScoreSet& scores);

struct StrengthAuc {
  int strength_pct = 0;
  RocSummary roc;
};

/// One AUC per strength slice, ordered by strength. Needs >= 2 levels.
std::vector<StrengthAuc> auc_by_strength(const FaceDataset& dataset, const PairOptions& options = {});

/// Markdown table with one column per strength and a single AUC row.
std::string format_auc_table(std::span<const StrengthAuc> rows, const std::string& row_label);

struct SummaryStats {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;

  double iqr() const noexcept { return q3 - q1; }
};

/// Sample SD (n-1) and linearly interpolated quartiles. Throws
/// EmptyDistribution on empty input.
SummaryStats summarize(std::span<const double> values);

struct LevelSimilarity {
  int strength_pct = 0;
  SummaryStats stats;
};

/// Similarity of each veridical (100%) image to same-identity images at every
/// other level, across all condition combinations; `baseline` holds
/// same-identity pairs within the veridical level.
struct VeridicalProfile {
  std::vector<LevelSimilarity> levels;
  SummaryStats baseline;

  const SummaryStats* at(int strength_pct) const;
};

/// Throws MissingVeridical when strength 100 is absent, InvalidArgument when
/// no other level exists.
VeridicalProfile veridical_profile(const FaceDataset& dataset);

enum class ConditionChange { None, ViewOnly, IllumOnly, Both };
std::string_view to_string(ConditionChange c) noexcept;
ConditionChange condition_change(const PairScore& p) noexcept;

struct CompressionRow {
  int strength_pct = 0;
  SummaryStats all;
  /// Indexed by ConditionChange; cells with no pairs have n = 0.
  std::array<SummaryStats, 4> by_condition{};
};

/// Spread of the same-identity score distribution at each strength.
std::vector<CompressionRow> compression_stats(const FaceDataset& dataset);

/// Partitions scores by which conditions changed between the two images.
std::array<std::vector<double>, 4> partition_by_condition(std::span<const PairScore> pairs);

void write_scores_csv(const std::filesystem::path& path, const ScoreSet& scores);

}  // namespace facespace
