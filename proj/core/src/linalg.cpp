#include "facespace/linalg.hpp"

#include <Eigen/SVD>

#include "facespace/error.hpp"

namespace facespace {
namespace {

Eigen::VectorXd invert_singular_values(const Eigen::VectorXd& s, double rcond, Eigen::Index& rank) {
  const double cutoff = s.size() ? rcond * s.maxCoeff() : 0.0;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > cutoff && s[k] > 0.0) {
      inv[k] = 1.0 / s[k];
      ++rank;
    }
  }
  return inv;
}

template <typename Svd>
void check_svd(const Svd& svd) {
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorCode::SvdNoConvergence, "singular value decomposition did not converge");
  }
}

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (!a.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
}

}  // namespace

Eigen::MatrixXd pinv(const Eigen::Ref<const Eigen::MatrixXd>& a, double rcond) {
  check_finite(a);
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  check_svd(svd);
  Eigen::Index rank = 0;
  const Eigen::VectorXd inv = invert_singular_values(svd.singularValues(), rcond, rank);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

PseudoInverse::PseudoInverse(const Eigen::Ref<const Eigen::MatrixXd>& a, double rcond)
    : rows_(a.rows()) {
  check_finite(a);
  reduced_ = a.rows() > 2 * a.cols();
  Eigen::BDCSVD<Eigen::MatrixXd> svd;
  if (reduced_) {
    qr_.compute(a);
    const Eigen::MatrixXd r = qr_.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
    svd.compute(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
  } else {
    svd.compute(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  }
  check_svd(svd);
  u_ = svd.matrixU();
  v_ = svd.matrixV();
  singular_values_ = svd.singularValues();
  inverse_values_ = invert_singular_values(singular_values_, rcond, rank_);
}

Eigen::MatrixXd PseudoInverse::solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  if (rhs.rows() != rows_) {
    throw Error(ErrorCode::ShapeMismatch, "right-hand side has wrong row count");
  }
  Eigen::MatrixXd projected;
  if (reduced_) {
    Eigen::MatrixXd qt_rhs = rhs;
    qt_rhs.applyOnTheLeft(qr_.householderQ().transpose());
    projected = u_.transpose() * qt_rhs.topRows(u_.rows());
  } else {
    projected = u_.transpose() * rhs;
  }
  return v_ * (inverse_values_.asDiagonal() * projected);
}

}  // namespace facespace
