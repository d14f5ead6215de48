#include "facespace/synthgen.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "facespace/error.hpp"
#include "facespace/parallel.hpp"
#include "facespace/rng.hpp"

namespace facespace {
namespace {

Eigen::VectorXd normal_vector(Rng& rng, std::size_t dim) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.normal();
  return v;
}

std::string image_id_for(std::uint64_t identity, double yaw, Illumination illum, int strength) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "id%03llu", static_cast<unsigned long long>(identity));
  return std::string(buf) + "_yaw" + format_double(yaw) + "_" + std::string(to_string(illum)) +
         "_s" + std::to_string(strength);
}

std::vector<int> parse_int_list(const std::string& value, const std::string& key) {
  std::vector<int> out;
  for (double v : parse_double_list(value, key)) {
    if (v != std::floor(v) || std::abs(v) > 1e9) {
      throw Error(ErrorCode::InvalidConfig, "'" + key + "': expected integers");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

void SynthConfig::validate() const {
  if (dim < 4) {
    throw Error(ErrorCode::DimTooSmall, "dim must be at least 4, got " + std::to_string(dim));
  }
  if (n_identities_per_gender == 0) {
    throw Error(ErrorCode::InvalidConfig, "n_identities_per_gender must be at least 1");
  }
  if (yaw_levels.empty() || strength_levels.empty()) {
    throw Error(ErrorCode::InvalidConfig, "yaw_levels and strength_levels must be non-empty");
  }
  for (double y : yaw_levels) {
    if (!std::isfinite(y)) throw Error(ErrorCode::InvalidConfig, "yaw level is not finite");
  }
  for (int s : strength_levels) {
    if (s <= 0) throw Error(ErrorCode::InvalidConfig, "strength levels must be positive");
  }
  if (std::set<double>(yaw_levels.begin(), yaw_levels.end()).size() != yaw_levels.size() ||
      std::set<int>(strength_levels.begin(), strength_levels.end()).size() !=
          strength_levels.size()) {
    throw Error(ErrorCode::InvalidConfig, "yaw_levels and strength_levels must be distinct");
  }
  for (double v : {sigma_identity, sigma_gender, sigma_illum, beta_view, sigma_noise}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidConfig, "sigma/beta values must be finite and >= 0");
    }
  }
}

KeyValues SynthConfig::to_key_values() const {
  std::vector<double> strengths(strength_levels.begin(), strength_levels.end());
  return {
      {"dim", std::to_string(dim)},
      {"n_identities_per_gender", std::to_string(n_identities_per_gender)},
      {"yaw_levels", format_double_list(yaw_levels)},
      {"strength_levels", format_double_list(strengths)},
      {"sigma_identity", format_double(sigma_identity)},
      {"sigma_gender", format_double(sigma_gender)},
      {"sigma_illum", format_double(sigma_illum)},
      {"beta_view", format_double(beta_view)},
      {"sigma_noise", format_double(sigma_noise)},
      {"seed", std::to_string(seed)},
  };
}

SynthConfig SynthConfig::from_key_values(const KeyValues& kv, const std::string& origin) {
  static const std::set<std::string> allowed{
      "dim",         "n_identities_per_gender", "yaw_levels", "strength_levels",
      "sigma_identity", "sigma_gender",        "sigma_illum", "beta_view",
      "sigma_noise", "seed"};
  reject_unknown_keys(kv, allowed, origin);
  SynthConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "dim") c.dim = parse_u64(value, key);
    else if (key == "n_identities_per_gender") c.n_identities_per_gender = parse_u64(value, key);
    else if (key == "yaw_levels") c.yaw_levels = parse_double_list(value, key);
    else if (key == "strength_levels") c.strength_levels = parse_int_list(value, key);
    else if (key == "sigma_identity") c.sigma_identity = parse_double(value, key);
    else if (key == "sigma_gender") c.sigma_gender = parse_double(value, key);
    else if (key == "sigma_illum") c.sigma_illum = parse_double(value, key);
    else if (key == "beta_view") c.beta_view = parse_double(value, key);
    else if (key == "sigma_noise") c.sigma_noise = parse_double(value, key);
    else if (key == "seed") c.seed = parse_u64(value, key);
  }
  c.validate();
  return c;
}

LatentBasis sample_basis(const SynthConfig& config) {
  config.validate();
  const auto dim = config.dim;
  LatentBasis basis;

  // Modified Gram-Schmidt over three isotropic draws.
  Rng axis_rng = Rng::substream(config.seed, StreamTag::ConditionAxes);
  std::array<Eigen::VectorXd, 3> axes;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    Eigen::VectorXd v = normal_vector(axis_rng, dim);
    for (std::size_t b = 0; b < a; ++b) v -= axes[b].dot(v) * axes[b];
    axes[a] = v / v.norm();
  }
  basis.gender_axis = axes[0];
  basis.illum_axis = axes[1];
  basis.view_axis = axes[2];

  const auto n_ids = config.n_identities();
  basis.identity_dirs.resize(static_cast<Eigen::Index>(n_ids), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < n_ids; ++i) {
    Rng rng = Rng::substream(config.seed, StreamTag::IdentityDirections, i);
    Eigen::VectorXd d = normal_vector(rng, dim);
    for (const auto& axis : axes) d -= axis.dot(d) * axis;
    basis.identity_dirs.row(static_cast<Eigen::Index>(i)) = d / d.norm();
  }
  return basis;
}

Eigen::VectorXd synth_embedding(const LatentBasis& basis, const SynthConfig& config,
                                std::uint64_t identity_id, const SynthConditions& conditions,
                                const Eigen::Ref<const Eigen::VectorXd>& noise_draw) {
  if (identity_id >= basis.n_identities()) {
    throw Error(ErrorCode::UnknownIdentity, "identity " + std::to_string(identity_id) +
                                                " not in basis of " +
                                                std::to_string(basis.n_identities()));
  }
  if (conditions.strength_pct < 0) {
    throw Error(ErrorCode::InvalidArgument, "strength_pct must be non-negative");
  }
  const double s = conditions.strength_pct / 100.0;
  const double g = conditions.gender == Gender::Male ? 1.0 : -1.0;
  const double l = conditions.illumination == Illumination::Ambient ? 1.0 : -1.0;

  Eigen::VectorXd v = (s * config.sigma_identity) *
                      basis.identity_dirs.row(static_cast<Eigen::Index>(identity_id)).transpose();
  v += (g * config.sigma_gender) * basis.gender_axis;
  v += (l * config.sigma_illum) * basis.illum_axis;
  v += (conditions.yaw_deg * config.beta_view) * basis.view_axis;
  if (noise_draw.size() != 0) {
    if (noise_draw.size() != v.size()) {
      throw Error(ErrorCode::ShapeMismatch, "noise draw length differs from dim");
    }
    v += config.sigma_noise * noise_draw;
  }
  const double norm = v.norm();
  if (norm == 0.0) throw Error(ErrorCode::ZeroVector, "synthetic embedding has zero norm");
  return v / norm;
}

Eigen::VectorXd row_noise(const SynthConfig& config, std::uint64_t row) {
  Rng rng = Rng::substream(config.seed, StreamTag::RowNoise, row);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.dim));
  return normal_vector(rng, config.dim) * scale;
}

FaceDataset generate_dataset(const SynthConfig& config) {
  const LatentBasis basis = sample_basis(config);
  const auto n_rows = config.n_rows();

  std::vector<ImageMeta> meta;
  meta.reserve(n_rows);
  for (std::size_t id = 0; id < config.n_identities(); ++id) {
    const Gender gender = id < config.n_identities_per_gender ? Gender::Male : Gender::Female;
    for (double yaw : config.yaw_levels) {
      for (Illumination illum : {Illumination::Ambient, Illumination::Spotlight}) {
        for (int strength : config.strength_levels) {
          meta.push_back(ImageMeta{image_id_for(id, yaw, illum, strength), id, gender, illum,
                                   yaw, strength});
        }
      }
    }
  }

  RowMatrix emb(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(config.dim));
  parallel_for(n_rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const auto& m = meta[r];
      const Eigen::VectorXd noise = row_noise(config, r);
      emb.row(static_cast<Eigen::Index>(r)) =
          synth_embedding(basis, config, m.identity_id,
                          {m.gender, m.illumination, m.yaw_deg, m.strength_pct}, noise)
              .transpose();
    }
  });
  return FaceDataset(std::move(meta), std::move(emb));
}

}  // namespace facespace
