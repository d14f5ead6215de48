#include "facespace/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "facespace/error.hpp"
#include "facespace/rng.hpp"

namespace facespace {
namespace {

/// Adds 1e-12 jitter to every repeat of an exactly duplicated row.
RowMatrix jitter_duplicates(const RowMatrix& data, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto row_less = [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double va = data(static_cast<Eigen::Index>(a), c);
      const double vb = data(static_cast<Eigen::Index>(b), c);
      if (va != vb) return va < vb;
    }
    return a < b;
  };
  std::ranges::sort(order, row_less);

  RowMatrix out = data;
  for (std::size_t k = 1; k < n; ++k) {
    const auto prev = static_cast<Eigen::Index>(order[k - 1]);
    const auto cur = static_cast<Eigen::Index>(order[k]);
    if (data.row(prev) != data.row(cur)) continue;
    Rng rng = Rng::substream(seed, StreamTag::TsneJitter, order[k]);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(cur, c) += 1e-12 * rng.normal();
  }
  return out;
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void TsneConfig::validate() const {
  if (!(perplexity > 1.0)) throw Error(ErrorCode::InvalidConfig, "perplexity must exceed 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidConfig, "theta must lie in [0, 1]");
  if (n_iter == 0) throw Error(ErrorCode::InvalidConfig, "n_iter must be positive");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be positive");
  if (!(early_exaggeration > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "early_exaggeration must be positive");
  }
  if (kl_every == 0) throw Error(ErrorCode::InvalidConfig, "kl_every must be positive");
}

KeyValues TsneConfig::to_key_values() const {
  return {
      {"perplexity", format_double(perplexity)},
      {"theta", format_double(theta)},
      {"n_iter", std::to_string(n_iter)},
      {"learning_rate", format_double(learning_rate)},
      {"momentum_initial", format_double(momentum_initial)},
      {"momentum_final", format_double(momentum_final)},
      {"momentum_switch_iter", std::to_string(momentum_switch_iter)},
      {"early_exaggeration", format_double(early_exaggeration)},
      {"exaggeration_iters", std::to_string(exaggeration_iters)},
      {"kl_every", std::to_string(kl_every)},
      {"dense_limit", std::to_string(dense_limit)},
      {"seed", std::to_string(seed)},
  };
}

TsneConfig TsneConfig::from_key_values(const KeyValues& kv, const std::string& origin) {
  static const std::set<std::string> allowed{
      "perplexity",           "theta",      "n_iter",           "learning_rate",
      "momentum_initial",     "momentum_final", "momentum_switch_iter", "early_exaggeration",
      "exaggeration_iters",   "kl_every",   "dense_limit",      "seed"};
  reject_unknown_keys(kv, allowed, origin);
  TsneConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "perplexity") c.perplexity = parse_double(value, key);
    else if (key == "theta") c.theta = parse_double(value, key);
    else if (key == "n_iter") c.n_iter = parse_u64(value, key);
    else if (key == "learning_rate") c.learning_rate = parse_double(value, key);
    else if (key == "momentum_initial") c.momentum_initial = parse_double(value, key);
    else if (key == "momentum_final") c.momentum_final = parse_double(value, key);
    else if (key == "momentum_switch_iter") c.momentum_switch_iter = parse_u64(value, key);
    else if (key == "early_exaggeration") c.early_exaggeration = parse_double(value, key);
    else if (key == "exaggeration_iters") c.exaggeration_iters = parse_u64(value, key);
    else if (key == "kl_every") c.kl_every = parse_u64(value, key);
    else if (key == "dense_limit") c.dense_limit = parse_u64(value, key);
    else if (key == "seed") c.seed = parse_u64(value, key);
  }
  c.validate();
  return c;
}

std::optional<double> TsneLayout::kl_at(std::size_t iteration) const {
  for (const auto& s : kl_trace) {
    if (s.iteration == iteration) return s.kl;
  }
  return std::nullopt;
}

TsneLayout run_tsne(const RowMatrix& data, const TsneConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(data.rows());
  if (!(static_cast<double>(n) > config.perplexity + 1.0)) {
    throw Error(ErrorCode::PerplexityTooLarge,
                "need n > perplexity + 1; n = " + std::to_string(n));
  }

  AffinityOptions options;
  options.dense_limit = config.dense_limit;
  const AffinityMatrix p =
      joint_affinities(jitter_duplicates(data, config.seed), config.perplexity, options);

  TsneLayout result;
  Layout& y = result.points;
  y.resize(static_cast<Eigen::Index>(n), 2);
  Rng init = Rng::substream(config.seed, StreamTag::TsneInit);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    y(i, 0) = 1e-4 * init.normal();
    y(i, 1) = 1e-4 * init.normal();
  }

  // learning_rate uses the reference Barnes-Hut convention, whose gradient
  // omits the constant factor 4 that exact_gradient/bh_gradient include.
  const double step = config.learning_rate / 4.0;
  Layout update = Layout::Zero(y.rows(), 2);
  Layout gains = Layout::Ones(y.rows(), 2);

  for (std::size_t iter = 0; iter < config.n_iter; ++iter) {
    const double exaggeration = iter < config.exaggeration_iters ? config.early_exaggeration : 1.0;
    const double momentum =
        iter < config.momentum_switch_iter ? config.momentum_initial : config.momentum_final;

    const Layout grad = config.theta == 0.0 ? exact_gradient(p, y, exaggeration)
                                            : bh_gradient(p, y, config.theta, exaggeration);

    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        double& gain = gains(i, c);
        // The previous update points against the previous gradient, so
        // differing signs mean the gradient direction persisted.
        gain = sign(grad(i, c)) != sign(update(i, c)) ? gain + 0.2 : gain * 0.8;
        gain = std::max(gain, 0.01);
        update(i, c) = momentum * update(i, c) - step * gain * grad(i, c);
        y(i, c) += update(i, c);
      }
    }
    const Eigen::RowVector2d centroid = y.colwise().mean();
    y.rowwise() -= centroid;

    if (!y.allFinite()) {
      throw Error(ErrorCode::NonFinite,
                  "layout diverged at iteration " + std::to_string(iter + 1));
    }
    const auto done = iter + 1;
    if (done % config.kl_every == 0 || done == config.n_iter) {
      result.kl_trace.push_back({done, kl_divergence(p, y)});
    }
  }
  return result;
}

TsneLayout run_tsne(const FaceDataset& dataset, const TsneConfig& config) {
  if (!is_unit_normalized(dataset, 1e-6)) {
    throw Error(ErrorCode::NotNormalized, "t-SNE input rows must be unit length; normalize first");
  }
  return run_tsne(dataset.embeddings(), config);
}

void write_layout_csv(const std::filesystem::path& path, std::span<const ImageMeta> meta,
                      const Layout& points) {
  if (meta.size() != static_cast<std::size_t>(points.rows())) {
    throw Error(ErrorCode::MismatchedIds, "layout and metadata differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "image_id,x,y\n";
  for (std::size_t i = 0; i < meta.size(); ++i) {
    out << meta[i].image_id << ',' << format_double(points(static_cast<Eigen::Index>(i), 0)) << ','
        << format_double(points(static_cast<Eigen::Index>(i), 1)) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

void write_kl_trace_csv(const std::filesystem::path& path, std::span<const KlSample> trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "iteration,kl\n";
  for (const auto& s : trace) out << s.iteration << ',' << format_double(s.kl) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace facespace
