#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "facespace/dataset.hpp"
#include "facespace/kvconfig.hpp"
#include "facespace/lda.hpp"

namespace facespace {

enum class ReadoutTarget { Gender, Illumination, Viewpoint };

std::string_view to_string(ReadoutTarget t) noexcept;
ReadoutTarget parse_readout_target(std::string_view s);
inline bool is_classification(ReadoutTarget t) noexcept { return t != ReadoutTarget::Viewpoint; }

/// Identity-level partition: no identity appears in more than one fold.
struct FoldPlan {
  std::vector<std::vector<std::uint64_t>> identities;  // per fold, sorted
  std::vector<std::size_t> fold_of_row;                // per dataset row

  std::size_t n_folds() const noexcept { return identities.size(); }
};

/// Shuffles the sorted identity list with the FoldShuffle substream of `seed`
/// and cuts it into k nearly equal contiguous folds (the first n % k folds get
/// one extra identity). Throws TooFewIdentities unless 2 <= k <= #identities.
FoldPlan make_folds(const FaceDataset& dataset, std::size_t k_folds, std::uint64_t seed);

struct ReadoutOptions {
  std::size_t k_folds = 10;
  std::uint64_t seed = 1;
  LdaOptions lda;
  double rcond = 1e-12;
};

/// Classification targets report percent correct; viewpoint reports the mean
/// absolute error in degrees and the SD of the absolute errors. `metric`
/// pools every test prediction; `per_fold` holds each fold's own metric.
struct ReadoutResult {
  ReadoutTarget target = ReadoutTarget::Gender;
  double metric = 0.0;
  double metric_sd = 0.0;  // viewpoint only
  std::vector<double> per_fold;
  std::size_t n_folds = 0;
  std::size_t n_predictions = 0;

  double per_fold_mean() const;
  KeyValues to_key_values() const;
};

/// Per-row numeric labels for a target: 0/1 classes (male/female,
/// ambient/spotlight) or yaw in degrees.
std::vector<double> target_values(const FaceDataset& dataset, ReadoutTarget target);

/// Scores many label columns against one fold plan. Label-independent work
/// (the total scatter eigendecomposition for LDA, the [X|1] factorization for
/// regression) happens once per fold and is shared by every column.
///
/// Returns an n x columns matrix of held-out predictions: predicted class
/// (0/1) or predicted yaw. Throws FoldMissingClass when a classification
/// column lacks a class in some fold's test split and SingleClass when a
/// training split lacks one.
Eigen::MatrixXd cross_validated_predictions(const FaceDataset& dataset, const FoldPlan& folds,
                                            ReadoutTarget target, const Eigen::MatrixXd& labels,
                                            const ReadoutOptions& options);

ReadoutResult grouped_cv(const FaceDataset& dataset, ReadoutTarget target,
                         const ReadoutOptions& options = {});

struct PermutationResult {
  ReadoutTarget target = ReadoutTarget::Gender;
  double observed = 0.0;
  std::vector<double> null_values;
  /// (1 + #{null at least as extreme}) / (n_perm + 1); "extreme" is >= for
  /// accuracy and <= for error.
  double p_value = 1.0;

  KeyValues to_key_values() const;
};

double permutation_p_value(double observed, std::span<const double> null_values,
                           bool higher_is_better);

/// Observed metric on true labels plus n_perm null metrics, each from an
/// image-level shuffle of the label column (replicate r uses the Permutation
/// substream r of options.seed) re-scored with the same fold plan.
PermutationResult permutation_test(const FaceDataset& dataset, ReadoutTarget target,
                                   std::size_t n_perm, const ReadoutOptions& options = {});

/// Copy of `dataset` with the target attribute permuted across images
/// (LabelShuffle substream of `seed`); used as a negative control.
FaceDataset shuffle_target_labels(const FaceDataset& dataset, ReadoutTarget target, std::uint64_t seed);

void write_null_csv(const std::filesystem::path& path, const PermutationResult& result);

}  // namespace facespace
