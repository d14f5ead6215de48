#include "facespace/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "facespace/error.hpp"
#include "facespace/kvconfig.hpp"
#include "facespace/rng.hpp"

namespace facespace {
namespace {

RowMatrix unit_rows(const FaceDataset& dataset, std::span<const std::size_t> rows) {
  RowMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dataset.dim()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto v = dataset.row(rows[k]);
    const double norm = v.norm();
    if (norm == 0.0) {
      throw Error(ErrorCode::ZeroVector, "embedding for '" + dataset.meta(rows[k]).image_id + "' has zero norm");
    }
    out.row(static_cast<Eigen::Index>(k)) = v / norm;
  }
  return out;
}

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<std::size_t> rows_at_strength(const FaceDataset& dataset, int strength) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.meta(i).strength_pct == strength) rows.push_back(i);
  }
  return rows;
}

}  // namespace

double cosine(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "cosine of vectors with different lengths");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return clamp_unit(a.dot(b) / (na * nb));
}

std::vector<double> ScoreSet::same_scores() const {
  std::vector<double> out;
  out.reserve(same_id.size());
  for (const auto& p : same_id) out.push_back(p.score);
  return out;
}

std::vector<double> ScoreSet::diff_scores() const {
  std::vector<double> out;
  out.reserve(diff_id.size());
  for (const auto& p : diff_id) out.push_back(p.score);
  return out;
}

ScoreSet build_pairs(const FaceDataset& dataset, int strength_pct, const PairOptions& options) {
  const auto rows = rows_at_strength(dataset, strength_pct);
  if (rows.empty()) {
    throw Error(ErrorCode::EmptySlice, "no images at strength " + std::to_string(strength_pct) + "%");
  }
  const RowMatrix unit = unit_rows(dataset, rows);
  const RowMatrix gram = unit * unit.transpose();

  ScoreSet out;
  out.strength_pct = strength_pct;
  out.same_gender_only = options.same_gender_only;
  Rng reservoir_rng = Rng::substream(options.seed, StreamTag::Reservoir,
                                     static_cast<std::uint64_t>(strength_pct));
  std::uint64_t diff_seen = 0;

  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto& ma = dataset.meta(rows[a]);
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      const auto& mb = dataset.meta(rows[b]);
      const bool same = ma.identity_id == mb.identity_id;
      if (!same && options.same_gender_only && ma.gender != mb.gender) continue;
      const PairScore pair{clamp_unit(gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))),
                           ma.yaw_deg != mb.yaw_deg, ma.illumination != mb.illumination};
      if (same) {
        out.same_id.push_back(pair);
      } else if (options.max_diff_pairs == 0 || out.diff_id.size() < options.max_diff_pairs) {
        out.diff_id.push_back(pair);
        ++diff_seen;
      } else {
        const auto slot = reservoir_rng.below(++diff_seen);
        if (slot < options.max_diff_pairs) out.diff_id[slot] = pair;
      }
    }
  }
  return out;
}

RocSummary auc(std::span<const double> same, std::span<const double> diff) {
  if (same.empty() || diff.empty()) {
    throw Error(ErrorCode::EmptyDistribution,
                same.empty() ? "no same-identity scores" : "no different-identity scores");
  }
  std::vector<std::pair<double, bool>> all;
  all.reserve(same.size() + diff.size());
  for (double s : same) all.emplace_back(s, true);
  for (double d : diff) all.emplace_back(d, false);
  std::ranges::sort(all, {}, &std::pair<double, bool>::first);

  // Twice the rank sum of the same-identity scores, using mid-ranks for ties.
  std::int64_t twice_rank_sum = 0;
  std::size_t k = 0;
  while (k < all.size()) {
    std::size_t end = k;
    std::int64_t same_in_group = 0;
    while (end < all.size() && all[end].first == all[k].first) same_in_group += all[end++].second;
    const auto first_rank = static_cast<std::int64_t>(k + 1);
    const auto last_rank = static_cast<std::int64_t>(end);
    twice_rank_sum += same_in_group * (first_rank + last_rank);
    k = end;
  }
  const auto n_same = static_cast<std::int64_t>(same.size());
  const auto n_diff = static_cast<std::int64_t>(diff.size());
  const std::int64_t twice_u = twice_rank_sum - n_same * (n_same + 1);

  RocSummary out;
  out.n_same = same.size();
  out.n_diff = diff.size();
  out.auc = static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_same) * static_cast<double>(n_diff));
  return out;
}

RocSummary auc(const ScoreSet& scores) {
  const auto s = scores.same_scores();
  const auto d = scores.diff_scores();
  return auc(s, d);
}

std::vector<StrengthAuc> auc_by_strength(const FaceDataset& dataset, const PairOptions& options) {
  const auto levels = strength_levels(dataset);
  if (levels.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two strength levels");
  }
  std::vector<StrengthAuc> out;
  for (int level : levels) out.push_back({level, auc(build_pairs(dataset, level, options))});
  return out;
}

std::string format_auc_table(std::span<const StrengthAuc> rows, const std::string& row_label) {
  std::string header = "| Identity Strength |";
  std::string rule = "|---|";
  std::string values = "| " + row_label + " (AUC) |";
  char buf[32];
  for (const auto& r : rows) {
    header += " " + std::to_string(r.strength_pct) + "% |";
    rule += "---|";
    std::snprintf(buf, sizeof(buf), " %.3f |", r.roc.auc);
    values += buf;
  }
  return header + "\n" + rule + "\n" + values + "\n";
}

SummaryStats summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyDistribution, "cannot summarize an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::ranges::sort(sorted);
  SummaryStats s;
  s.n = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

const SummaryStats* VeridicalProfile::at(int strength_pct) const {
  for (const auto& l : levels) {
    if (l.strength_pct == strength_pct) return &l.stats;
  }
  return nullptr;
}

VeridicalProfile veridical_profile(const FaceDataset& dataset) {
  const auto levels = strength_levels(dataset);
  if (!std::ranges::binary_search(levels, 100)) {
    throw Error(ErrorCode::MissingVeridical, "dataset has no 100% (veridical) images");
  }
  if (levels.size() < 2) throw Error(ErrorCode::InvalidArgument, "need a level other than 100%");

  std::vector<std::size_t> all_rows(dataset.size());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;
  const RowMatrix unit = unit_rows(dataset, all_rows);

  std::map<std::uint64_t, std::vector<std::size_t>> veridical_by_id;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.meta(i).strength_pct == 100) veridical_by_id[dataset.meta(i).identity_id].push_back(i);
  }

  std::map<int, std::vector<double>> scores;
  std::vector<double> baseline;
  for (std::size_t j = 0; j < dataset.size(); ++j) {
    const auto& mj = dataset.meta(j);
    const auto it = veridical_by_id.find(mj.identity_id);
    if (it == veridical_by_id.end()) continue;
    for (auto v : it->second) {
      if (mj.strength_pct == 100) {
        if (v < j) baseline.push_back(clamp_unit(unit.row(static_cast<Eigen::Index>(v)).dot(unit.row(static_cast<Eigen::Index>(j)))));
      } else {
        scores[mj.strength_pct].push_back(
            clamp_unit(unit.row(static_cast<Eigen::Index>(v)).dot(unit.row(static_cast<Eigen::Index>(j)))));
      }
    }
  }

  VeridicalProfile out;
  for (auto& [level, values] : scores) out.levels.push_back({level, summarize(values)});
  if (!baseline.empty()) out.baseline = summarize(baseline);
  return out;
}

std::string_view to_string(ConditionChange c) noexcept {
  switch (c) {
    case ConditionChange::None: return "none";
    case ConditionChange::ViewOnly: return "view";
    case ConditionChange::IllumOnly: return "illumination";
    case ConditionChange::Both: return "view+illumination";
  }
  return "unknown";
}

ConditionChange condition_change(const PairScore& p) noexcept {
  if (p.view_changed && p.illum_changed) return ConditionChange::Both;
  if (p.view_changed) return ConditionChange::ViewOnly;
  if (p.illum_changed) return ConditionChange::IllumOnly;
  return ConditionChange::None;
}

std::array<std::vector<double>, 4> partition_by_condition(std::span<const PairScore> pairs) {
  std::array<std::vector<double>, 4> out;
  for (const auto& p : pairs) out[static_cast<std::size_t>(condition_change(p))].push_back(p.score);
  return out;
}

std::vector<CompressionRow> compression_stats(const FaceDataset& dataset) {
  std::vector<CompressionRow> out;
  for (int level : strength_levels(dataset)) {
    const auto pairs = build_pairs(dataset, level, {.same_gender_only = true, .max_diff_pairs = 1});
    if (pairs.same_id.empty()) continue;
    CompressionRow row;
    row.strength_pct = level;
    row.all = summarize(pairs.same_scores());
    const auto parts = partition_by_condition(pairs.same_id);
    for (std::size_t c = 0; c < parts.size(); ++c) {
      if (!parts[c].empty()) row.by_condition[c] = summarize(parts[c]);
    }
    out.push_back(row);
  }
  if (out.size() < 2) {
    throw Error(ErrorCode::EmptyDistribution, "need same-identity pairs at two or more strengths");
  }
  return out;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreSet& scores) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "kind,score,view_changed,illum_changed\n";
  const auto emit = [&](const char* kind, const std::vector<PairScore>& pairs) {
    for (const auto& p : pairs) {
      out << kind << ',' << format_double(p.score) << ',' << int{p.view_changed} << ','
          << int{p.illum_changed} << '\n';
    }
  };
  emit("same", scores.same_id);
  emit("diff", scores.diff_id);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace facespace
