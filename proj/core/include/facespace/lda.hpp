#pragma once

#include <Eigen/Core>
#include <array>
#include <span>

namespace facespace {

/// Two-class Fisher discriminant. Predicts class_labels[1] when
/// w.x + b > 0 and class_labels[0] otherwise (ties included).
struct LdaModel {
  Eigen::VectorXd weight;
  double bias = 0.0;
  std::array<int, 2> class_labels{0, 1};

  double decision(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weight.dot(x) + bias; }
  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return decision(x) > 0.0 ? class_labels[1] : class_labels[0];
  }
};

struct LdaOptions {
  /// Ridge added to the pooled scatter diagonal, relative to trace/dim.
  double ridge = 1e-6;
  double rcond = 1e-12;
};

/// weight = pinv(S_w + ridge*tr(S_w)/dim*I) (mean_1 - mean_0), bias puts the
/// boundary at the midpoint of the projected class means. Class 0 is the
/// smaller label. Throws SingleClass, InvalidArgument (n <= 2, >2 labels).
LdaModel fit_lda(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> labels,
                 const LdaOptions& options = {});

/// Fraction (0..1) of rows predicted correctly.
double lda_accuracy(const LdaModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                    std::span<const int> labels);

}  // namespace facespace
