#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "facespace/crossval.hpp"
#include "facespace/error.hpp"
#include "facespace/lda.hpp"
#include "facespace/linear.hpp"
#include "facespace/parallel.hpp"
#include "facespace/synthgen.hpp"
#include "helpers.hpp"

using namespace facespace;

namespace {

SynthConfig small_config(std::size_t ids_per_gender = 10, std::size_t dim = 64) {
  SynthConfig c;
  c.n_identities_per_gender = ids_per_gender;
  c.dim = dim;
  c.strength_levels = {50, 100};
  return c;
}

std::vector<std::size_t> rows_where(const FoldPlan& plan, std::size_t fold, bool in_fold) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < plan.fold_of_row.size(); ++r) {
    if ((plan.fold_of_row[r] == fold) == in_fold) out.push_back(r);
  }
  return out;
}

Eigen::MatrixXd rows_of(const FaceDataset& d, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.dim()));
  for (std::size_t k = 0; k < rows.size(); ++k) x.row(static_cast<Eigen::Index>(k)) = d.row(rows[k]);
  return x;
}

}  // namespace

TEST(MakeFolds, PartitionIdentities) {
  const auto d = generate_dataset(small_config(13));
  const auto plan = make_folds(d, 7, 3);
  ASSERT_EQ(plan.n_folds(), 7u);
  std::set<std::uint64_t> all;
  std::size_t total = 0;
  for (const auto& fold : plan.identities) {
    EXPECT_TRUE(fold.size() == 3 || fold.size() == 4);
    EXPECT_TRUE(std::is_sorted(fold.begin(), fold.end()));
    total += fold.size();
    all.insert(fold.begin(), fold.end());
  }
  EXPECT_EQ(total, 26u);
  EXPECT_EQ(all.size(), 26u);
  for (std::size_t r = 0; r < d.size(); ++r) {
    const auto& fold = plan.identities[plan.fold_of_row[r]];
    EXPECT_TRUE(std::binary_search(fold.begin(), fold.end(), d.meta(r).identity_id));
  }
  EXPECT_EQ(make_folds(d, 7, 3).fold_of_row, plan.fold_of_row);
  EXPECT_NE(make_folds(d, 7, 4).fold_of_row, plan.fold_of_row);
}

TEST(MakeFolds, TooFewIdentities) {
  const auto d = generate_dataset(small_config(2));
  EXPECT_FS_ERROR(make_folds(d, 5, 1), TooFewIdentities);
  EXPECT_FS_ERROR(make_folds(d, 1, 1), TooFewIdentities);
}

TEST(GroupedCv, GenderAndIlluminationReadable) {
  const auto d = generate_dataset(small_config(20, 128));
  for (auto t : {ReadoutTarget::Gender, ReadoutTarget::Illumination}) {
    const auto r = grouped_cv(d, t, {.k_folds = 5});
    EXPECT_EQ(r.per_fold.size(), 5u);
    EXPECT_EQ(r.n_folds, 5u);
    EXPECT_EQ(r.n_predictions, d.size());
    EXPECT_GE(r.metric, 95.0);
    EXPECT_LE(r.metric, 100.0);
    for (double f : r.per_fold) EXPECT_TRUE(f >= 0.0 && f <= 100.0);
  }
}

TEST(GroupedCv, NoiselessViewpointIsNearlyExact) {
  auto c = small_config(20, 128);
  c.sigma_noise = 0.0;
  const auto r = grouped_cv(generate_dataset(c), ReadoutTarget::Viewpoint, {.k_folds = 5});
  EXPECT_LT(r.metric, 0.5);
  EXPECT_GE(r.metric, 0.0);
  EXPECT_GE(r.metric_sd, 0.0);
  const auto kv = r.to_key_values();
  EXPECT_EQ(kv.at("metric_name"), "mae_deg");
  EXPECT_TRUE(kv.contains("sd_abs_error_deg"));
}

TEST(GroupedCv, LeaveOneIdentityOut) {
  const auto d = generate_dataset(small_config(4, 32));
  const auto plan = make_folds(d, 8, 1);
  for (const auto& fold : plan.identities) EXPECT_EQ(fold.size(), 1u);
  const auto r = grouped_cv(d, ReadoutTarget::Viewpoint, {.k_folds = 8});
  EXPECT_EQ(r.n_predictions, d.size());
}

TEST(GroupedCv, FoldMissingClass) {
  // One identity per fold means every test split holds a single gender.
  const auto d = generate_dataset(small_config(2, 32));
  EXPECT_FS_ERROR(grouped_cv(d, ReadoutTarget::Gender, {.k_folds = 4}), FoldMissingClass);
}

TEST(CrossValidatedPredictions, MatchesPerFoldReferenceFits) {
  const auto d = generate_dataset(small_config(8, 48));
  const auto plan = make_folds(d, 4, 2);
  for (auto target : {ReadoutTarget::Gender, ReadoutTarget::Illumination, ReadoutTarget::Viewpoint}) {
    const auto values = target_values(d, target);
    Eigen::MatrixXd labels(static_cast<Eigen::Index>(d.size()), 2);
    labels.col(0) = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    // Second column: a fixed relabelling so batched columns are exercised.
    const auto shuffled = target_values(shuffle_target_labels(d, target, 5), target);
    labels.col(1) = Eigen::Map<const Eigen::VectorXd>(shuffled.data(), static_cast<Eigen::Index>(shuffled.size()));
    const Eigen::MatrixXd pred = cross_validated_predictions(d, plan, target, labels, {});

    for (std::size_t f = 0; f < plan.n_folds(); ++f) {
      const auto train = rows_where(plan, f, false);
      const auto test = rows_where(plan, f, true);
      const Eigen::MatrixXd xtr = rows_of(d, train);
      const Eigen::MatrixXd xte = rows_of(d, test);
      for (Eigen::Index b = 0; b < 2; ++b) {
        if (is_classification(target)) {
          std::vector<int> y;
          for (auto r : train) y.push_back(static_cast<int>(labels(static_cast<Eigen::Index>(r), b)));
          const auto model = fit_lda(xtr, y);
          for (std::size_t k = 0; k < test.size(); ++k) {
            const Eigen::VectorXd row = xte.row(static_cast<Eigen::Index>(k)).transpose();
            if (std::abs(model.decision(row)) < 1e-9) continue;
            EXPECT_EQ(pred(static_cast<Eigen::Index>(test[k]), b), model.predict(row));
          }
        } else {
          Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
          for (std::size_t k = 0; k < train.size(); ++k) y[static_cast<Eigen::Index>(k)] = labels(static_cast<Eigen::Index>(train[k]), b);
          const auto model = fit_linear(xtr, y);
          for (std::size_t k = 0; k < test.size(); ++k) {
            EXPECT_NEAR(pred(static_cast<Eigen::Index>(test[k]), b),
                        model.predict(xte.row(static_cast<Eigen::Index>(k)).transpose()), 1e-8);
          }
        }
      }
    }
  }
}

TEST(Permutation, PValueFormula) {
  const std::vector<double> null{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(permutation_p_value(5, null, true), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(permutation_p_value(3, null, true), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(permutation_p_value(0.5, null, false), 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(permutation_p_value(2, null, false), 3.0 / 5.0);
}

TEST(Permutation, SingleReplicate) {
  const auto d = generate_dataset(small_config(6, 32));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = permutation_test(d, ReadoutTarget::Gender, 1, {.k_folds = 3, .seed = seed});
    ASSERT_EQ(r.null_values.size(), 1u);
    EXPECT_TRUE(r.p_value == 0.5 || r.p_value == 1.0);
  }
}

TEST(Permutation, NullCentersOnBaseRateAndIsDeterministic) {
  const auto d = generate_dataset(small_config(10, 64));
  set_thread_count(1);
  const auto a = permutation_test(d, ReadoutTarget::Gender, 60, {.k_folds = 5, .seed = 3});
  set_thread_count(4);
  const auto b = permutation_test(d, ReadoutTarget::Gender, 60, {.k_folds = 5, .seed = 3});
  set_thread_count(0);
  EXPECT_EQ(a.null_values, b.null_values);
  double mean = 0.0;
  for (double v : a.null_values) mean += v;
  mean /= static_cast<double>(a.null_values.size());
  // Binomial SD of one accuracy, shrunk by averaging over replicates.
  const double n = static_cast<double>(d.size());
  const double sd = 100.0 * std::sqrt(0.25 / n);
  EXPECT_NEAR(mean, 50.0, 3.0 * sd);
  EXPECT_GT(a.observed, 95.0);
  EXPECT_DOUBLE_EQ(a.p_value, 1.0 / 61.0);
}

TEST(Permutation, ShuffledLabelsLandInsideNull) {
  const auto d = generate_dataset(small_config(10, 64));
  const auto shuffled = shuffle_target_labels(d, ReadoutTarget::Gender, 9);
  const auto r = permutation_test(shuffled, ReadoutTarget::Gender, 100, {.k_folds = 5, .seed = 2});
  const auto [lo, hi] = std::minmax_element(r.null_values.begin(), r.null_values.end());
  EXPECT_GE(r.observed, *lo);
  EXPECT_LE(r.observed, *hi);
}

TEST(ShuffleTargetLabels, PermutesOnlyTheTarget) {
  const auto d = generate_dataset(small_config(5, 16));
  const auto s = shuffle_target_labels(d, ReadoutTarget::Viewpoint, 1);
  std::multiset<double> a, b;
  for (std::size_t i = 0; i < d.size(); ++i) {
    a.insert(d.meta(i).yaw_deg);
    b.insert(s.meta(i).yaw_deg);
    EXPECT_EQ(d.meta(i).identity_id, s.meta(i).identity_id);
    EXPECT_EQ(d.meta(i).gender, s.meta(i).gender);
  }
  EXPECT_EQ(a, b);
  EXPECT_EQ(d.embeddings(), s.embeddings());
}

TEST(Readout, TargetParsing) {
  EXPECT_EQ(parse_readout_target("Gender"), ReadoutTarget::Gender);
  EXPECT_EQ(parse_readout_target("viewpoint"), ReadoutTarget::Viewpoint);
  EXPECT_FS_ERROR(parse_readout_target("age"), InvalidArgument);
}
