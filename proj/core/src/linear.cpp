#include "facespace/linear.hpp"

#include "facespace/error.hpp"

namespace facespace {

Eigen::MatrixXd with_intercept(const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.leftCols(x.cols()) = x;
  a.col(x.cols()).setOnes();
  return a;
}

LinearModel fit_linear(const Eigen::Ref<const Eigen::MatrixXd>& x,
                       const Eigen::Ref<const Eigen::VectorXd>& y, double rcond) {
  if (x.rows() != y.size()) throw Error(ErrorCode::ShapeMismatch, "target length differs from row count");
  if (x.rows() < 2) throw Error(ErrorCode::InvalidArgument, "regression needs at least two samples");
  const Eigen::VectorXd coef = pinv(with_intercept(x), rcond) * y;
  LinearModel model;
  model.weight = coef.head(x.cols());
  model.bias = coef[x.cols()];
  return model;
}

}  // namespace facespace
