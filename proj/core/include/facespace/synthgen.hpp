#pragma once

#include <cstdint>
#include <vector>

#include "facespace/dataset.hpp"
#include "facespace/kvconfig.hpp"

namespace facespace {

/// Factors of the synthetic face space. Defaults give 140 identities x 5 yaw
/// x 2 illuminations x 5 strengths = 7,000 rows of dimension 512.
struct SynthConfig {
  std::size_t dim = 512;
  std::size_t n_identities_per_gender = 70;
  std::vector<double> yaw_levels{0, 20, 30, 45, 60};
  std::vector<int> strength_levels{25, 50, 75, 100, 125};
  double sigma_identity = 1.0;
  double sigma_gender = 8.0;
  double sigma_illum = 0.35;
  double beta_view = 0.02;
  double sigma_noise = 0.5;
  std::uint64_t seed = 1;

  static constexpr std::size_t kIllumLevels = 2;

  std::size_t n_identities() const noexcept { return 2 * n_identities_per_gender; }
  std::size_t n_rows() const noexcept {
    return n_identities() * yaw_levels.size() * kIllumLevels * strength_levels.size();
  }

  /// Throws InvalidConfig / DimTooSmall on a bad config.
  void validate() const;

  KeyValues to_key_values() const;
  /// Keys absent from `kv` keep their defaults; unknown keys are rejected.
  static SynthConfig from_key_values(const KeyValues& kv, const std::string& origin = "<config>");
};

/// Generative directions. Identity i uses identity_dirs.row(i); identities
/// [0, n_per_gender) are male and the rest female.
struct LatentBasis {
  RowMatrix identity_dirs;
  Eigen::VectorXd gender_axis;
  Eigen::VectorXd illum_axis;
  Eigen::VectorXd view_axis;

  std::size_t n_identities() const noexcept {
    return static_cast<std::size_t>(identity_dirs.rows());
  }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(identity_dirs.cols()); }
};

/// Draws the three condition axes (Gram-Schmidt orthonormalized) and one unit
/// identity direction per identity. Identity directions are isotropic draws
/// with the condition axes projected out, so identity carries no yaw, gender
/// or illumination signal; they are not orthogonal to each other.
LatentBasis sample_basis(const SynthConfig& config);

/// Image-level conditions for one synthetic embedding.
struct SynthConditions {
  Gender gender = Gender::Male;
  Illumination illumination = Illumination::Ambient;
  double yaw_deg = 0.0;
  int strength_pct = 100;
};

/// normalize(s*sigma_identity*d_i + g*sigma_gender*G + l*sigma_illum*L
///           + yaw*beta_view*V + sigma_noise*noise_draw)
/// with s = strength_pct/100, g = +1 male / -1 female, l = +1 ambient / -1
/// spotlight. `noise_draw` must have length dim (or be empty for no noise);
/// generate_dataset passes N(0, I/dim) draws so sigma_noise is the expected
/// noise norm. strength_pct = 0 gives the average face of the gender and
/// illumination cell (dataset rows still need a positive strength).
Eigen::VectorXd synth_embedding(const LatentBasis& basis, const SynthConfig& config,
                                std::uint64_t identity_id, const SynthConditions& conditions,
                                const Eigen::Ref<const Eigen::VectorXd>& noise_draw);

/// The noise draw for dataset row `row`, taken from its own substream.
Eigen::VectorXd row_noise(const SynthConfig& config, std::uint64_t row);

/// Full factorial grid, ordered identity > yaw > illumination > strength.
/// Deterministic given config (including seed).
FaceDataset generate_dataset(const SynthConfig& config);

}  // namespace facespace
