#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "facespace/affinity.hpp"
#include "facespace/dataset.hpp"
#include "facespace/gradient.hpp"
#include "facespace/kvconfig.hpp"

namespace facespace {

/// Optimizer settings. Perplexity and theta are the knobs that matter for the
/// face-space figures (30 and 0.5); the schedule below follows the usual
/// Barnes-Hut t-SNE practice.
struct TsneConfig {
  double perplexity = 30.0;
  double theta = 0.5;
  std::size_t n_iter = 1000;
  double learning_rate = 200.0;  // reference convention: applied to gradient / 4
  double momentum_initial = 0.5;
  double momentum_final = 0.8;
  std::size_t momentum_switch_iter = 250;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  std::size_t kl_every = 50;
  std::size_t dense_limit = 10000;
  std::uint64_t seed = 1;

  void validate() const;
  KeyValues to_key_values() const;
  static TsneConfig from_key_values(const KeyValues& kv, const std::string& origin = "<config>");
};

struct KlSample {
  std::size_t iteration = 0;  // number of completed iterations
  double kl = 0.0;
};

struct TsneLayout {
  Layout points;
  std::vector<KlSample> kl_trace;

  /// KL recorded after exactly `iteration` iterations, if sampled.
  std::optional<double> kl_at(std::size_t iteration) const;
};

/// Embeds unit-length rows in 2-D.
///
/// Initial layout ~ N(0, (1e-4)^2) from the seed; gradient descent with
/// momentum and per-coordinate gains (+0.2 while the gradient sign persists,
/// x0.8 when it flips, floor 0.01); P multiplied by early_exaggeration for
/// the first exaggeration_iters iterations; layout re-centred every
/// iteration; KL recorded every kl_every iterations and at the end. Exact
/// duplicate rows get 1e-12 seeded jitter. Bitwise deterministic for a given
/// seed and input regardless of thread count.
TsneLayout run_tsne(const RowMatrix& data, const TsneConfig& config);

/// Requires normalized rows (NotNormalized otherwise).
TsneLayout run_tsne(const FaceDataset& dataset, const TsneConfig& config);

/// `image_id,x,y` per row.
void write_layout_csv(const std::filesystem::path& path, std::span<const ImageMeta> meta,
                      const Layout& points);
/// `iteration,kl` per sample.
void write_kl_trace_csv(const std::filesystem::path& path, std::span<const KlSample> trace);

}  // namespace facespace
