#include "facespace/lda.hpp"

#include <algorithm>
#include <set>

#include "facespace/error.hpp"
#include "facespace/linalg.hpp"

namespace facespace {

LdaModel fit_lda(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const int> labels,
                 const LdaOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != labels.size()) {
    throw Error(ErrorCode::ShapeMismatch, "label count differs from row count");
  }
  if (x.rows() <= 2) throw Error(ErrorCode::InvalidArgument, "LDA needs more than two samples");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) throw Error(ErrorCode::SingleClass, "only one class present");
  if (distinct.size() > 2) throw Error(ErrorCode::InvalidArgument, "LDA here is two-class only");

  LdaModel model;
  model.class_labels = {*distinct.begin(), *distinct.rbegin()};

  const Eigen::Index dim = x.cols();
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(dim);
  Eigen::Index n0 = 0, n1 = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (labels[static_cast<std::size_t>(r)] == model.class_labels[1]) {
      mean1 += x.row(r).transpose();
      ++n1;
    } else {
      mean0 += x.row(r).transpose();
      ++n0;
    }
  }
  mean0 /= static_cast<double>(n0);
  mean1 /= static_cast<double>(n1);

  Eigen::MatrixXd centered(x.rows(), dim);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const bool is1 = labels[static_cast<std::size_t>(r)] == model.class_labels[1];
    centered.row(r) = x.row(r) - (is1 ? mean1 : mean0).transpose();
  }
  Eigen::MatrixXd scatter = centered.transpose() * centered;
  const double ridge = options.ridge * scatter.trace() / static_cast<double>(dim);
  scatter.diagonal().array() += ridge;

  model.weight = pinv(scatter, options.rcond) * (mean1 - mean0);
  model.bias = -0.5 * model.weight.dot(mean0 + mean1);
  // Equal class means give w = 0: every point sits on the boundary and takes
  // the first class, which is the honest answer for e.g. XOR.
  if (!model.weight.allFinite()) throw Error(ErrorCode::DegenerateData, "LDA weight is non-finite");
  return model;
}

double lda_accuracy(const LdaModel& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                    std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    correct += model.predict(x.row(r).transpose()) == labels[static_cast<std::size_t>(r)];
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace facespace
