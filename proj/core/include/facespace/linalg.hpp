#pragma once

#include <Eigen/Core>
#include <Eigen/QR>

namespace facespace {

inline constexpr double kDefaultRcond = 1e-12;

/// Moore-Penrose pseudo-inverse via SVD. Singular values below
/// rcond * sigma_max are treated as zero. Throws SvdNoConvergence, or
/// NonFinite for non-finite input.
Eigen::MatrixXd pinv(const Eigen::Ref<const Eigen::MatrixXd>& a, double rcond = kDefaultRcond);

/// Factored pseudo-inverse for repeated solves against the same matrix.
///
/// Tall inputs are reduced with a Householder QR first and the SVD is taken
/// of R; A = (Q U_R) S V^T is then the SVD of A, so solve() returns the same
/// minimum-norm least-squares solution as pinv(A) * B.
class PseudoInverse {
 public:
  explicit PseudoInverse(const Eigen::Ref<const Eigen::MatrixXd>& a, double rcond = kDefaultRcond);

  /// pinv(A) * rhs for rhs with A.rows() rows.
  Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

  Eigen::Index rank() const noexcept { return rank_; }
  const Eigen::VectorXd& singular_values() const noexcept { return singular_values_; }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index rank_ = 0;
  bool reduced_ = false;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd u_;  // left singular vectors (of R when reduced_)
  Eigen::MatrixXd v_;
  Eigen::VectorXd singular_values_;
  Eigen::VectorXd inverse_values_;
};

}  // namespace facespace
