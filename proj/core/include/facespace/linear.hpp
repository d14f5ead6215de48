#pragma once

#include <Eigen/Core>

#include "facespace/linalg.hpp"

namespace facespace {

struct LinearModel {
  Eigen::VectorXd weight;
  double bias = 0.0;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const { return weight.dot(x) + bias; }
  Eigen::VectorXd predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
    return (x * weight).array() + bias;
  }
};

/// [weight; bias] = pinv([X | 1]) y, the minimum-norm least-squares fit.
LinearModel fit_linear(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y, double rcond = kDefaultRcond);

/// [X | 1]
Eigen::MatrixXd with_intercept(const Eigen::Ref<const Eigen::MatrixXd>& x);

}  // namespace facespace
