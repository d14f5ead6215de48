#include "facespace/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "facespace/error.hpp"
#include "facespace/parallel.hpp"

namespace facespace {
namespace {

constexpr std::size_t kBlockRows = 128;

/// Fills `probs` with exp(-beta * (d - d_min)) / sum for the calibrated beta
/// and returns beta. `sq_dists` excludes the point itself.
double calibrate_row(const std::vector<double>& sq_dists, double perplexity,
                     const AffinityOptions& options, std::vector<double>& probs) {
  const double target = std::log(perplexity);
  const double tolerance = options.entropy_tolerance_bits * std::log(2.0);
  const double d_min = *std::ranges::min_element(sq_dists);

  probs.resize(sq_dists.size());
  double beta = 1.0;
  double beta_lo = 0.0;
  double beta_hi = std::numeric_limits<double>::infinity();

  for (std::size_t step = 0; step < options.max_bisection_steps; ++step) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t k = 0; k < sq_dists.size(); ++k) {
      const double shifted = sq_dists[k] - d_min;
      probs[k] = std::exp(-beta * shifted);
      sum += probs[k];
      weighted += shifted * probs[k];
    }
    const double entropy = std::log(sum) + beta * weighted / sum;
    const double diff = entropy - target;
    if (std::abs(diff) < tolerance) break;
    if (diff > 0) {
      beta_lo = beta;
      beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
    } else {
      beta_hi = beta;
      beta = 0.5 * (beta + beta_lo);
    }
  }

  double sum = 0.0;
  for (std::size_t k = 0; k < sq_dists.size(); ++k) {
    probs[k] = std::exp(-beta * (sq_dists[k] - d_min));
    sum += probs[k];
  }
  for (double& p : probs) p /= sum;
  return beta;
}

void check_input(const RowMatrix& data, double perplexity, const AffinityOptions& options) {
  const auto n = static_cast<std::size_t>(data.rows());
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 points, got " + std::to_string(n));
  if (!(perplexity > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "perplexity must exceed 1");
  }
  // perplexity == n-1 is the uniform limit (beta = 0), reachable only when
  // every row is equidistant; anything above is unattainable.
  if (!(perplexity <= static_cast<double>(n - 1))) {
    throw Error(ErrorCode::PerplexityTooLarge, "perplexity " + std::to_string(perplexity) +
                                                   " must not exceed n-1 = " + std::to_string(n - 1));
  }
  if (!data.allFinite()) {
    throw Error(ErrorCode::NonFiniteDistance, "input contains non-finite coordinates");
  }
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    if (std::abs(data.row(r).norm() - 1.0) > options.unit_tolerance) {
      throw Error(ErrorCode::NotNormalized,
                  "row " + std::to_string(r) + " is not unit length; normalize rows first");
    }
  }
}

/// Squared distances from rows [begin, end) to every row, one output row per input row.
RowMatrix distance_block(const RowMatrix& data, const Eigen::VectorXd& sq_norms,
                         std::size_t begin, std::size_t end) {
  const auto b = static_cast<Eigen::Index>(begin);
  const auto count = static_cast<Eigen::Index>(end - begin);
  RowMatrix d = -2.0 * (data.middleRows(b, count) * data.transpose());
  d.rowwise() += sq_norms.transpose();
  d.colwise() += sq_norms.segment(b, count);
  return d.cwiseMax(0.0);
}

}  // namespace

AffinityMatrix AffinityMatrix::dense(RowMatrix values) {
  AffinityMatrix m;
  m.n_ = static_cast<std::size_t>(values.rows());
  m.dense_ = true;
  m.values_dense_ = std::move(values);
  return m;
}

AffinityMatrix AffinityMatrix::sparse(std::size_t n, std::vector<std::size_t> row_offsets,
                                      std::vector<std::uint32_t> columns,
                                      std::vector<double> values) {
  if (row_offsets.size() != n + 1 || columns.size() != values.size() ||
      row_offsets.back() != values.size()) {
    throw Error(ErrorCode::ShapeMismatch, "inconsistent CSR arrays");
  }
  AffinityMatrix m;
  m.n_ = n;
  m.dense_ = false;
  m.offsets_ = std::move(row_offsets);
  m.columns_ = std::move(columns);
  m.values_ = std::move(values);
  return m;
}

double AffinityMatrix::at(std::size_t i, std::size_t j) const {
  if (dense_) return values_dense_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(j));
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - columns_.begin())];
}

double AffinityMatrix::sum() const {
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) for_each_in_row(i, [&](std::size_t, double v) { total += v; });
  return total;
}

std::size_t AffinityMatrix::stored_entries() const noexcept {
  return dense_ ? n_ * n_ : values_.size();
}

RowMatrix AffinityMatrix::to_dense() const {
  if (dense_) return values_dense_;
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    for_each_in_row(i, [&](std::size_t j, double v) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    });
  }
  return out;
}

ConditionalAffinities conditional_affinities(const RowMatrix& data, double perplexity,
                                             const AffinityOptions& options) {
  check_input(data, perplexity, options);
  const auto n = static_cast<std::size_t>(data.rows());
  const Eigen::VectorXd sq_norms = data.rowwise().squaredNorm();
  const bool dense = n <= options.dense_limit;
  const std::size_t k_neighbors =
      dense ? n - 1 : std::min<std::size_t>(n - 1, static_cast<std::size_t>(3.0 * perplexity));

  ConditionalAffinities out;
  out.perplexity = perplexity;
  out.precisions.resize(n);

  RowMatrix dense_rows;
  std::vector<std::uint32_t> neighbor_cols;
  std::vector<double> neighbor_vals;
  if (dense) {
    dense_rows = RowMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  } else {
    neighbor_cols.resize(n * k_neighbors);
    neighbor_vals.resize(n * k_neighbors);
  }

  const std::size_t n_blocks = (n + kBlockRows - 1) / kBlockRows;
  parallel_for(n_blocks, [&](std::size_t block_begin, std::size_t block_end) {
    std::vector<double> sq;
    std::vector<double> probs;
    std::vector<std::size_t> order(n);
    for (std::size_t blk = block_begin; blk < block_end; ++blk) {
      const auto begin = blk * kBlockRows;
      const auto end = std::min(n, begin + kBlockRows);
      const RowMatrix d = distance_block(data, sq_norms, begin, end);
      for (std::size_t i = begin; i < end; ++i) {
        const auto local = static_cast<Eigen::Index>(i - begin);
        if (dense) {
          sq.clear();
          for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sq.push_back(d(local, static_cast<Eigen::Index>(j)));
          }
          out.precisions[i] = calibrate_row(sq, perplexity, options, probs);
          std::size_t k = 0;
          for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dense_rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = probs[k++];
          }
        } else {
          std::iota(order.begin(), order.end(), std::size_t{0});
          std::swap(order[i], order[n - 1]);
          const auto by_distance = [&](std::size_t a, std::size_t b) {
            const double da = d(local, static_cast<Eigen::Index>(a));
            const double db = d(local, static_cast<Eigen::Index>(b));
            return da < db || (da == db && a < b);
          };
          std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_neighbors),
                            order.end() - 1, by_distance);
          std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_neighbors));
          sq.resize(k_neighbors);
          for (std::size_t k = 0; k < k_neighbors; ++k) {
            sq[k] = d(local, static_cast<Eigen::Index>(order[k]));
          }
          out.precisions[i] = calibrate_row(sq, perplexity, options, probs);
          for (std::size_t k = 0; k < k_neighbors; ++k) {
            neighbor_cols[i * k_neighbors + k] = static_cast<std::uint32_t>(order[k]);
            neighbor_vals[i * k_neighbors + k] = probs[k];
          }
        }
      }
    }
  });

  if (dense) {
    out.rows = AffinityMatrix::dense(std::move(dense_rows));
  } else {
    std::vector<std::size_t> offsets(n + 1);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i * k_neighbors;
    out.rows = AffinityMatrix::sparse(n, std::move(offsets), std::move(neighbor_cols),
                                      std::move(neighbor_vals));
  }
  return out;
}

AffinityMatrix symmetrize(const ConditionalAffinities& conditional) {
  const auto& c = conditional.rows;
  const auto n = c.size();
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  if (c.is_dense()) {
    const RowMatrix d = c.to_dense();
    RowMatrix p = (d + d.transpose()) * scale;
    return AffinityMatrix::dense(std::move(p));
  }

  // Union of row i and column i of the conditional matrix, merged by column.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> transposed(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.for_each_in_row(i, [&](std::size_t j, double v) {
      transposed[j].emplace_back(static_cast<std::uint32_t>(i), v);
    });
  }
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    c.for_each_in_row(i, [&](std::size_t j, double v) {
      row.emplace_back(static_cast<std::uint32_t>(j), v);
    });
    row.insert(row.end(), transposed[i].begin(), transposed[i].end());
    std::ranges::sort(row, {}, &std::pair<std::uint32_t, double>::first);
    for (std::size_t k = 0; k < row.size();) {
      const auto col = row[k].first;
      double total = 0.0;
      while (k < row.size() && row[k].first == col) total += row[k++].second;
      cols.push_back(col);
      vals.push_back(total * scale);
    }
    offsets.push_back(cols.size());
  }
  return AffinityMatrix::sparse(n, std::move(offsets), std::move(cols), std::move(vals));
}

double row_entropy_bits(const AffinityMatrix& rows, std::size_t i) {
  double h = 0.0;
  rows.for_each_in_row(i, [&](std::size_t, double p) {
    if (p > 0.0) h -= p * std::log2(p);
  });
  return h;
}

}  // namespace facespace
