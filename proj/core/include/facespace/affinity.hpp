#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "facespace/dataset.hpp"

namespace facespace {

/// Square non-negative matrix stored either dense or as CSR rows with sorted
/// column indices. Used both for conditional p_{j|i} rows and for the joint P.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;
  static AffinityMatrix dense(RowMatrix values);
  static AffinityMatrix sparse(std::size_t n, std::vector<std::size_t> row_offsets,
                               std::vector<std::uint32_t> columns, std::vector<double> values);

  std::size_t size() const noexcept { return n_; }
  bool is_dense() const noexcept { return dense_; }

  /// Calls f(j, value) for each stored entry of row i, in increasing j.
  template <typename F>
  void for_each_in_row(std::size_t i, F&& f) const {
    if (dense_) {
      const double* row = values_dense_.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) f(j, row[j]);
    } else {
      for (auto k = offsets_[i]; k < offsets_[i + 1]; ++k) f(std::size_t{columns_[k]}, values_[k]);
    }
  }

  double at(std::size_t i, std::size_t j) const;
  double sum() const;
  std::size_t stored_entries() const noexcept;
  RowMatrix to_dense() const;

 private:
  std::size_t n_ = 0;
  bool dense_ = true;
  RowMatrix values_dense_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> columns_;
  std::vector<double> values_;
};

/// Row-stochastic p_{j|i} plus the Gaussian precision beta_i = 1/(2 sigma_i^2)
/// found for each row.
struct ConditionalAffinities {
  AffinityMatrix rows;
  std::vector<double> precisions;
  double perplexity = 0.0;
};

struct AffinityOptions {
  /// Above this many points only the 3*perplexity nearest neighbours of each
  /// point receive nonzero p_{j|i}.
  std::size_t dense_limit = 10000;
  std::size_t max_bisection_steps = 200;
  /// Allowed |H(p_{.|i}) - log2(perplexity)| in bits.
  double entropy_tolerance_bits = 1e-5;
  /// Allowed deviation of row norms from 1.
  double unit_tolerance = 1e-6;
};

/// Calibrates one Gaussian per row on squared Euclidean distances so the
/// Shannon entropy of p_{.|i} equals log2(perplexity). Rows must be unit
/// length. Throws PerplexityTooLarge, NonFiniteDistance, NotNormalized.
ConditionalAffinities conditional_affinities(const RowMatrix& data, double perplexity,
                                             const AffinityOptions& options = {});

/// (P + P^T) / (2n): symmetric, zero diagonal, sums to one.
AffinityMatrix symmetrize(const ConditionalAffinities& conditional);

inline AffinityMatrix joint_affinities(const RowMatrix& data, double perplexity,
                                       const AffinityOptions& options = {}) {
  return symmetrize(conditional_affinities(data, perplexity, options));
}

/// Shannon entropy in bits of row i.
double row_entropy_bits(const AffinityMatrix& rows, std::size_t i);

}  // namespace facespace
