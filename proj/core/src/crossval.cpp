#include "facespace/crossval.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "facespace/error.hpp"
#include "facespace/linear.hpp"
#include "facespace/rng.hpp"

namespace facespace {
namespace {

Eigen::MatrixXd gather_rows(const RowMatrix& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  }
  return out;
}

/// Held-out LDA predictions for every label column of one fold.
Eigen::MatrixXd lda_fold(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& y_train,
                         const Eigen::MatrixXd& x_test, const LdaOptions& options) {
  const auto n_train = static_cast<double>(x_train.rows());
  const auto dim = x_train.cols();
  const auto cols = y_train.cols();

  // S_w = S_t - c * delta delta^T with c = n1 n0 / n, and S_t does not depend
  // on the labels. With A = S_t + ridge*I, Sherman-Morrison gives
  // (A - c delta delta^T)^-1 delta = A^-1 delta / (1 - c delta^T A^-1 delta).
  const Eigen::RowVectorXd mean = x_train.colwise().mean();
  const Eigen::MatrixXd centered = x_train.rowwise() - mean;
  const Eigen::MatrixXd total_scatter = centered.transpose() * centered;
  const double total_trace = total_scatter.trace();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(total_scatter);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::SvdNoConvergence, "scatter eigendecomposition failed");
  }
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const Eigen::MatrixXd& q = eig.eigenvectors();

  const Eigen::VectorXd column_sum = x_train.colwise().sum().transpose();
  const Eigen::MatrixXd class1_sum = x_train.transpose() * y_train;  // dim x cols
  const Eigen::RowVectorXd n1 = y_train.colwise().sum();

  Eigen::MatrixXd delta(dim, cols);
  Eigen::MatrixXd midpoint(dim, cols);
  Eigen::VectorXd c(cols), ridge(cols);
  for (Eigen::Index b = 0; b < cols; ++b) {
    const double count1 = n1[b];
    const double count0 = n_train - count1;
    if (count1 < 1.0 || count0 < 1.0) {
      throw Error(ErrorCode::SingleClass, "a training split contains only one class");
    }
    const Eigen::VectorXd mean1 = class1_sum.col(b) / count1;
    const Eigen::VectorXd mean0 = (column_sum - class1_sum.col(b)) / count0;
    delta.col(b) = mean1 - mean0;
    midpoint.col(b) = 0.5 * (mean1 + mean0);
    c[b] = count1 * count0 / n_train;
    const double within_trace = total_trace - c[b] * delta.col(b).squaredNorm();
    ridge[b] = options.ridge * within_trace / static_cast<double>(dim);
  }

  Eigen::MatrixXd w = q.transpose() * delta;
  const double lambda_max = lambda.cwiseAbs().maxCoeff();
  for (Eigen::Index b = 0; b < cols; ++b) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double ev = lambda[k] + ridge[b];
      w(k, b) = ev > options.rcond * (lambda_max + ridge[b]) ? w(k, b) / ev : 0.0;
    }
  }
  w = q * w;

  Eigen::RowVectorXd bias(cols);
  for (Eigen::Index b = 0; b < cols; ++b) {
    const double denom = 1.0 - c[b] * delta.col(b).dot(w.col(b));
    if (!(denom > 0.0) || !std::isfinite(denom)) {
      throw Error(ErrorCode::DegenerateData, "pooled within-class scatter is not positive definite");
    }
    w.col(b) /= denom;
    bias[b] = -w.col(b).dot(midpoint.col(b));
  }

  Eigen::MatrixXd scores = x_test * w;
  scores.rowwise() += bias;
  return (scores.array() > 0.0).cast<double>();
}

double percent_correct(const Eigen::Ref<const Eigen::VectorXd>& pred,
                       const Eigen::Ref<const Eigen::VectorXd>& truth) {
  const auto correct = (pred.array() == truth.array()).count();
  return 100.0 * static_cast<double>(correct) / static_cast<double>(truth.size());
}

struct ErrorStats {
  double mean = 0.0;
  double sd = 0.0;
};

ErrorStats absolute_error_stats(const Eigen::Ref<const Eigen::VectorXd>& pred,
                                const Eigen::Ref<const Eigen::VectorXd>& truth) {
  const Eigen::ArrayXd err = (pred - truth).array().abs();
  ErrorStats s;
  s.mean = err.mean();
  if (err.size() > 1) {
    s.sd = std::sqrt((err - s.mean).square().sum() / static_cast<double>(err.size() - 1));
  }
  return s;
}

double column_metric(ReadoutTarget target, const Eigen::Ref<const Eigen::VectorXd>& pred,
                     const Eigen::Ref<const Eigen::VectorXd>& truth) {
  return is_classification(target) ? percent_correct(pred, truth)
                                   : absolute_error_stats(pred, truth).mean;
}

}  // namespace

std::string_view to_string(ReadoutTarget t) noexcept {
  switch (t) {
    case ReadoutTarget::Gender: return "gender";
    case ReadoutTarget::Illumination: return "illumination";
    case ReadoutTarget::Viewpoint: return "viewpoint";
  }
  return "unknown";
}

ReadoutTarget parse_readout_target(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "gender") return ReadoutTarget::Gender;
  if (lower == "illumination") return ReadoutTarget::Illumination;
  if (lower == "viewpoint" || lower == "view" || lower == "yaw") return ReadoutTarget::Viewpoint;
  throw Error(ErrorCode::InvalidArgument, "unknown readout target '" + std::string(s) + "'");
}

FoldPlan make_folds(const FaceDataset& dataset, std::size_t k_folds, std::uint64_t seed) {
  auto ids = identity_ids(dataset);
  if (k_folds < 2 || k_folds > ids.size()) {
    throw Error(ErrorCode::TooFewIdentities, "k_folds = " + std::to_string(k_folds) + " with " +
                                                 std::to_string(ids.size()) + " identities");
  }
  Rng rng = Rng::substream(seed, StreamTag::FoldShuffle);
  rng.shuffle(ids.begin(), ids.end());

  FoldPlan plan;
  plan.identities.resize(k_folds);
  const auto base = ids.size() / k_folds;
  const auto extra = ids.size() % k_folds;
  std::size_t pos = 0;
  std::map<std::uint64_t, std::size_t> fold_of_identity;
  for (std::size_t f = 0; f < k_folds; ++f) {
    const auto count = base + (f < extra ? 1 : 0);
    for (std::size_t k = 0; k < count; ++k, ++pos) {
      plan.identities[f].push_back(ids[pos]);
      fold_of_identity[ids[pos]] = f;
    }
    std::ranges::sort(plan.identities[f]);
  }
  plan.fold_of_row.reserve(dataset.size());
  for (const auto& m : dataset.meta()) plan.fold_of_row.push_back(fold_of_identity.at(m.identity_id));
  return plan;
}

std::vector<double> target_values(const FaceDataset& dataset, ReadoutTarget target) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (const auto& m : dataset.meta()) {
    switch (target) {
      case ReadoutTarget::Gender: out.push_back(m.gender == Gender::Female ? 1.0 : 0.0); break;
      case ReadoutTarget::Illumination:
        out.push_back(m.illumination == Illumination::Spotlight ? 1.0 : 0.0);
        break;
      case ReadoutTarget::Viewpoint: out.push_back(m.yaw_deg); break;
    }
  }
  return out;
}

Eigen::MatrixXd cross_validated_predictions(const FaceDataset& dataset, const FoldPlan& folds,
                                            ReadoutTarget target, const Eigen::MatrixXd& labels,
                                            const ReadoutOptions& options) {
  if (static_cast<std::size_t>(labels.rows()) != dataset.size() ||
      folds.fold_of_row.size() != dataset.size()) {
    throw Error(ErrorCode::ShapeMismatch, "labels or fold plan do not match the dataset");
  }
  Eigen::MatrixXd predictions(labels.rows(), labels.cols());
  for (std::size_t f = 0; f < folds.n_folds(); ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      (folds.fold_of_row[r] == f ? test : train).push_back(r);
    }
    if (test.empty() || train.empty()) {
      throw Error(ErrorCode::TooFewIdentities, "fold " + std::to_string(f) + " is empty");
    }
    const Eigen::MatrixXd x_train = gather_rows(dataset.embeddings(), train);
    const Eigen::MatrixXd x_test = gather_rows(dataset.embeddings(), test);
    const Eigen::MatrixXd y_train = gather_rows(labels, train);

    Eigen::MatrixXd fold_pred;
    if (is_classification(target)) {
      const Eigen::MatrixXd y_test = gather_rows(labels, test);
      const Eigen::RowVectorXd test_ones = y_test.colwise().sum();
      for (Eigen::Index b = 0; b < labels.cols(); ++b) {
        if (test_ones[b] < 1.0 || test_ones[b] > static_cast<double>(test.size()) - 1.0) {
          throw Error(ErrorCode::FoldMissingClass,
                      "test split of fold " + std::to_string(f) + " lacks a class");
        }
      }
      fold_pred = lda_fold(x_train, y_train, x_test, options.lda);
    } else {
      const PseudoInverse solver(with_intercept(x_train), options.rcond);
      fold_pred = with_intercept(x_test) * solver.solve(y_train);
    }
    for (std::size_t k = 0; k < test.size(); ++k) {
      predictions.row(static_cast<Eigen::Index>(test[k])) = fold_pred.row(static_cast<Eigen::Index>(k));
    }
  }
  return predictions;
}

double ReadoutResult::per_fold_mean() const {
  if (per_fold.empty()) return 0.0;
  return std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / static_cast<double>(per_fold.size());
}

KeyValues ReadoutResult::to_key_values() const {
  KeyValues kv{
      {"target", std::string(to_string(target))},
      {"metric_name", is_classification(target) ? "percent_correct" : "mae_deg"},
      {"metric", format_double(metric)},
      {"n_folds", std::to_string(n_folds)},
      {"n_predictions", std::to_string(n_predictions)},
      {"per_fold", format_double_list(per_fold)},
      {"per_fold_mean", format_double(per_fold_mean())},
  };
  if (!is_classification(target)) kv["sd_abs_error_deg"] = format_double(metric_sd);
  return kv;
}

ReadoutResult grouped_cv(const FaceDataset& dataset, ReadoutTarget target,
                         const ReadoutOptions& options) {
  const FoldPlan folds = make_folds(dataset, options.k_folds, options.seed);
  const auto values = target_values(dataset, target);
  const Eigen::VectorXd truth = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  const Eigen::MatrixXd pred = cross_validated_predictions(dataset, folds, target, truth, options);

  ReadoutResult result;
  result.target = target;
  result.n_folds = folds.n_folds();
  result.n_predictions = dataset.size();
  if (is_classification(target)) {
    result.metric = percent_correct(pred.col(0), truth);
  } else {
    const auto stats = absolute_error_stats(pred.col(0), truth);
    result.metric = stats.mean;
    result.metric_sd = stats.sd;
  }
  for (std::size_t f = 0; f < folds.n_folds(); ++f) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < dataset.size(); ++r) {
      if (folds.fold_of_row[r] == f) rows.push_back(r);
    }
    Eigen::VectorXd p(static_cast<Eigen::Index>(rows.size())), t(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      p[static_cast<Eigen::Index>(k)] = pred(static_cast<Eigen::Index>(rows[k]), 0);
      t[static_cast<Eigen::Index>(k)] = truth[static_cast<Eigen::Index>(rows[k])];
    }
    result.per_fold.push_back(column_metric(target, p, t));
  }
  return result;
}

double permutation_p_value(double observed, std::span<const double> null_values,
                           bool higher_is_better) {
  std::size_t extreme = 0;
  for (double v : null_values) extreme += higher_is_better ? v >= observed : v <= observed;
  return static_cast<double>(1 + extreme) / static_cast<double>(null_values.size() + 1);
}

PermutationResult permutation_test(const FaceDataset& dataset, ReadoutTarget target,
                                   std::size_t n_perm, const ReadoutOptions& options) {
  if (n_perm < 1) throw Error(ErrorCode::InvalidArgument, "n_perm must be at least 1");
  const FoldPlan folds = make_folds(dataset, options.k_folds, options.seed);
  const auto values = target_values(dataset, target);
  const auto n = static_cast<Eigen::Index>(values.size());

  Eigen::MatrixXd labels(n, static_cast<Eigen::Index>(n_perm + 1));
  labels.col(0) = Eigen::Map<const Eigen::VectorXd>(values.data(), n);
  std::vector<double> shuffled;
  for (std::size_t r = 0; r < n_perm; ++r) {
    shuffled = values;
    Rng rng = Rng::substream(options.seed, StreamTag::Permutation, r);
    rng.shuffle(shuffled.begin(), shuffled.end());
    labels.col(static_cast<Eigen::Index>(r + 1)) = Eigen::Map<const Eigen::VectorXd>(shuffled.data(), n);
  }

  const Eigen::MatrixXd pred = cross_validated_predictions(dataset, folds, target, labels, options);

  PermutationResult result;
  result.target = target;
  result.observed = column_metric(target, pred.col(0), labels.col(0));
  result.null_values.reserve(n_perm);
  for (Eigen::Index b = 1; b < labels.cols(); ++b) {
    result.null_values.push_back(column_metric(target, pred.col(b), labels.col(b)));
  }
  result.p_value = permutation_p_value(result.observed, result.null_values, is_classification(target));
  return result;
}

KeyValues PermutationResult::to_key_values() const {
  const auto [lo, hi] = std::ranges::minmax_element(null_values);
  return {
      {"target", std::string(to_string(target))},
      {"observed", format_double(observed)},
      {"n_perm", std::to_string(null_values.size())},
      {"null_min", null_values.empty() ? "nan" : format_double(*lo)},
      {"null_max", null_values.empty() ? "nan" : format_double(*hi)},
      {"p_value", format_double(p_value)},
  };
}

void write_null_csv(const std::filesystem::path& path, const PermutationResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "replicate,value\n";
  for (std::size_t r = 0; r < result.null_values.size(); ++r) {
    out << r << ',' << format_double(result.null_values[r]) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

FaceDataset shuffle_target_labels(const FaceDataset& dataset, ReadoutTarget target, std::uint64_t seed) {
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng = Rng::substream(seed, StreamTag::LabelShuffle, 0);
  rng.shuffle(order.begin(), order.end());
  std::vector<ImageMeta> meta = dataset.meta();
  for (std::size_t i = 0; i < meta.size(); ++i) {
    const auto& src = dataset.meta(order[i]);
    switch (target) {
      case ReadoutTarget::Gender: meta[i].gender = src.gender; break;
      case ReadoutTarget::Illumination: meta[i].illumination = src.illumination; break;
      case ReadoutTarget::Viewpoint: meta[i].yaw_deg = src.yaw_deg; break;
    }
  }
  return FaceDataset(std::move(meta), dataset.embeddings());
}

}  // namespace facespace
