#include "facespace_cli/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "facespace/crossval.hpp"
#include "facespace/dataset.hpp"
#include "facespace/error.hpp"
#include "facespace/kde.hpp"
#include "facespace/kvconfig.hpp"
#include "facespace/parallel.hpp"
#include "facespace/purity.hpp"
#include "facespace/similarity.hpp"
#include "facespace/svg.hpp"
#include "facespace/synthgen.hpp"
#include "facespace/tsne.hpp"

namespace facespace::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kMetaFile = "metadata.csv";
constexpr const char* kEmbFile = "embeddings.fse";

// ---------------------------------------------------------------------------
// Settings: config file < --set < named flags.

struct Settings {
  SynthConfig synth;
  TsneConfig tsne;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::size_t k_folds = 10;
  std::size_t n_perm = 1000;
  std::size_t k_neighbors = 5;
  bool same_gender_only = true;
  std::size_t max_diff_pairs = 0;
};

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw Error(ErrorCode::InvalidConfig, key + ": expected a boolean, got '" + value + "'");
}

Settings resolve_settings(const KeyValues& kv, const std::string& origin) {
  static const std::set<std::string> top{"seed",        "threads",          "k_folds",       "n_perm",
                                         "k_neighbors", "same_gender_only", "max_diff_pairs"};
  KeyValues synth_kv, tsne_kv, top_kv;
  for (const auto& [key, value] : kv) {
    if (key.starts_with("synth.") && key != "synth.seed") {
      synth_kv[key.substr(6)] = value;
    } else if (key.starts_with("tsne.") && key != "tsne.seed") {
      tsne_kv[key.substr(5)] = value;
    } else if (top.contains(key)) {
      top_kv[key] = value;
    } else {
      throw Error(ErrorCode::InvalidConfig, origin + ": unknown key '" + key + "'");
    }
  }
  Settings s;
  for (const auto& [key, value] : top_kv) {
    if (key == "seed") s.seed = parse_u64(value, key);
    else if (key == "threads") s.threads = parse_u64(value, key);
    else if (key == "k_folds") s.k_folds = parse_u64(value, key);
    else if (key == "n_perm") s.n_perm = parse_u64(value, key);
    else if (key == "k_neighbors") s.k_neighbors = parse_u64(value, key);
    else if (key == "same_gender_only") s.same_gender_only = parse_bool(value, key);
    else if (key == "max_diff_pairs") s.max_diff_pairs = parse_u64(value, key);
  }
  // One global seed; each module derives its own substreams from it.
  synth_kv["seed"] = std::to_string(s.seed);
  tsne_kv["seed"] = std::to_string(s.seed);
  s.synth = SynthConfig::from_key_values(synth_kv, origin);
  s.tsne = TsneConfig::from_key_values(tsne_kv, origin);
  return s;
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string data;
  std::string out = "out";
  // Named flags folded into the key-value overrides.
  KeyValues flag_overrides;
};

void add_common(CLI::App* sub, Common& c, bool needs_data = true) {
  sub->add_option("-c,--config", c.config, "Flat key=value config file");
  sub->add_option("--set", c.sets, "Override a config key (KEY=VALUE), repeatable");
  sub->add_option("--seed", c.seed, "Global seed");
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  if (needs_data) {
    sub->add_option("-d,--data", c.data,
                    std::string("Dataset directory holding ") + kMetaFile + " and " + kEmbFile +
                        " (default: generate the synthetic set in memory)");
  }
  sub->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
}

Settings build_settings(const Common& c) {
  KeyValues kv;
  std::string origin = "<flags>";
  if (!c.config.empty()) {
    kv = read_key_values(c.config);
    origin = c.config;
  }
  for (const auto& item : c.sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::InvalidArgument, "--set expects KEY=VALUE, got '" + item + "'");
    }
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (const auto& [key, value] : c.flag_overrides) kv[key] = value;
  if (c.seed) kv["seed"] = std::to_string(*c.seed);
  if (c.threads) kv["threads"] = std::to_string(*c.threads);
  Settings s = resolve_settings(kv, origin);
  if (s.threads > 0) set_thread_count(s.threads);
  return s;
}

template <typename T>
void flag_to_key(Common& c, const std::optional<T>& value, const std::string& key) {
  if (!value) return;
  if constexpr (std::is_same_v<T, bool>) {
    c.flag_overrides[key] = *value ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    c.flag_overrides[key] = format_double(*value);
  } else {
    c.flag_overrides[key] = std::to_string(*value);
  }
}

void check_input_paths(const Common& c) {
  if (c.data.empty()) return;
  for (const char* name : {kMetaFile, kEmbFile}) {
    const fs::path p = fs::path(c.data) / name;
    if (!fs::is_regular_file(p)) throw Error(ErrorCode::IoError, "missing input file " + p.string());
  }
}

FaceDataset load_input(const Common& c, const Settings& s) {
  if (!c.data.empty()) return load_dataset(fs::path(c.data) / kMetaFile, fs::path(c.data) / kEmbFile);
  return generate_dataset(s.synth);
}

fs::path prepare_out(const std::string& out) {
  const fs::path p(out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw Error(ErrorCode::IoError, "cannot create output directory " + p.string());
  return p;
}

// ---------------------------------------------------------------------------
// Shared helpers.

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

/// KDE that tolerates tiny or constant samples (common in small test sets).
std::optional<DensityCurve> plot_kde(const std::vector<double>& scores) {
  if (scores.size() < 2) return std::nullopt;
  if (silverman_bandwidth(scores) > 0.0) return kde(scores);
  return kde(scores, 1e-3);
}

KeyValues prefixed(const KeyValues& kv, const std::string& prefix) {
  KeyValues out;
  for (const auto& [k, v] : kv) out[prefix + k] = v;
  return out;
}

void merge_into(KeyValues& dst, const KeyValues& src) {
  for (const auto& [k, v] : src) dst[k] = v;
}

struct Section {
  std::string markdown;
};

// ---------------------------------------------------------------------------
// Subcommands. Each writes into `out` and returns a markdown section.

Section do_generate(const Settings& s, const FaceDataset& data, const fs::path& out) {
  write_dataset(data, out / kMetaFile, out / kEmbFile);
  write_key_values(out / "synth_config.txt", s.synth.to_key_values());
  std::ostringstream md;
  md << "## Dataset\n\n" << data.size() << " images, dimension " << data.dim() << ", "
     << identity_ids(data).size() << " identities, " << strength_levels(data).size()
     << " strength levels. Files: [" << kMetaFile << "](" << kMetaFile << "), [" << kEmbFile << "](" << kEmbFile
     << ").\n\n";
  return {md.str()};
}

struct TsneOptions {
  std::vector<std::string> color_by{"identity"};
  std::optional<int> strength_min;
};

Section do_tsne(const Settings& s, const FaceDataset& data, const fs::path& out, const TsneOptions& o) {
  std::vector<ColorAttribute> attrs;
  for (const auto& name : o.color_by) attrs.push_back(parse_color_attribute(name));
  FaceDataset slice = o.strength_min ? filter(data, [m = *o.strength_min](const ImageMeta& im) {
    return im.strength_pct >= m;
  })
                                     : data;
  slice = normalize_rows(slice);
  const TsneLayout layout = run_tsne(slice, s.tsne);
  write_layout_csv(out / "tsne_layout.csv", slice.meta(), layout.points);
  write_kl_trace_csv(out / "tsne_kl.csv", layout.kl_trace);

  LabeledLayout labeled;
  labeled.points = layout.points;
  for (const auto& m : slice.meta()) labeled.image_ids.push_back(m.image_id);
  std::ostringstream md;
  md << "## t-SNE\n\n" << slice.size() << " images, perplexity " << format_double(s.tsne.perplexity) << ", theta "
     << format_double(s.tsne.theta) << ", " << s.tsne.n_iter << " iterations; final KL "
     << fixed(layout.kl_trace.empty() ? 0.0 : layout.kl_trace.back().kl, 4) << ".\n\n";
  for (auto a : attrs) {
    const std::string name = "tsne_" + std::string(to_string(a)) + ".svg";
    write_text_file(out / name, svg_scatter(labeled, slice.meta(), a,
                                            {.title = "t-SNE coloured by " + std::string(to_string(a))}));
    md << "![t-SNE by " << to_string(a) << "](" << name << ")\n\n";
  }
  return {md.str()};
}

std::vector<ReadoutTarget> parse_targets(const std::vector<std::string>& names) {
  std::vector<ReadoutTarget> out;
  for (const auto& n : names) {
    if (n == "all") return {ReadoutTarget::Gender, ReadoutTarget::Illumination, ReadoutTarget::Viewpoint};
    out.push_back(parse_readout_target(n));
  }
  return out;
}

Section do_classify(const Settings& s, const FaceDataset& data, const fs::path& out,
                    const std::vector<ReadoutTarget>& targets) {
  const ReadoutOptions options{.k_folds = s.k_folds, .seed = s.seed};
  KeyValues report;
  std::ostringstream md;
  md << "## Linear readout (" << s.k_folds << "-fold, identity-grouped)\n\n"
     << "| Target | Metric | Pooled | Mean of folds |\n|---|---|---|---|\n";
  for (auto t : targets) {
    const ReadoutResult r = grouped_cv(data, t, options);
    merge_into(report, prefixed(r.to_key_values(), std::string(to_string(t)) + "."));
    std::string pooled = fixed(r.metric, 2);
    if (!is_classification(t)) pooled += " (SD " + fixed(r.metric_sd, 2) + ")";
    md << "| " << to_string(t) << " | " << (is_classification(t) ? "% correct" : "MAE (deg)") << " | " << pooled
       << " | " << fixed(r.per_fold_mean(), 2) << " |\n";
  }
  md << "\n";
  write_key_values(out / "readout.txt", report);
  return {md.str()};
}

struct PermOptions {
  std::string target = "gender";
  bool shuffle_labels = false;
};

Section do_permtest(const Settings& s, const FaceDataset& data, const fs::path& out, const PermOptions& o) {
  const ReadoutTarget target = parse_readout_target(o.target);
  const ReadoutOptions options{.k_folds = s.k_folds, .seed = s.seed};
  const FaceDataset input = o.shuffle_labels ? shuffle_target_labels(data, target, s.seed) : data;
  const PermutationResult r = permutation_test(input, target, s.n_perm, options);
  const std::string stem = "permtest_" + std::string(to_string(target));
  KeyValues kv = r.to_key_values();
  kv["shuffled_control"] = o.shuffle_labels ? "true" : "false";
  write_key_values(out / (stem + ".txt"), kv);
  write_null_csv(out / (stem + "_null.csv"), r);
  const std::string x_label = is_classification(target) ? "percent correct" : "MAE (deg)";
  write_text_file(out / (stem + ".svg"),
                  svg_histogram(r.null_values, r.observed, x_label,
                                {.title = "Permutation null: " + std::string(to_string(target))}));
  std::ostringstream md;
  md << "## Permutation test (" << to_string(target) << (o.shuffle_labels ? ", shuffled-label control" : "")
     << ")\n\nObserved " << fixed(r.observed, 2) << ", null range [" << kv["null_min"] << ", " << kv["null_max"]
     << "] over " << r.null_values.size() << " permutations, p = " << format_double(r.p_value) << ".\n\n![null]("
     << stem << ".svg)\n\n";
  return {md.str()};
}

struct RocOptions {
  bool write_scores = false;
};

Section do_roc(const Settings& s, const FaceDataset& data, const fs::path& out, const RocOptions& o) {
  const PairOptions pairs{.same_gender_only = s.same_gender_only, .max_diff_pairs = s.max_diff_pairs, .seed = s.seed};
  const auto levels = strength_levels(data);
  if (levels.size() < 2) throw Error(ErrorCode::InvalidArgument, "roc needs at least two strength levels");
  std::vector<StrengthAuc> rows;
  KeyValues kv;
  std::ostringstream figs;
  for (int level : levels) {
    const ScoreSet scores = build_pairs(data, level, pairs);
    const RocSummary roc = auc(scores);
    rows.push_back({level, roc});
    const std::string key = "auc_" + std::to_string(level);
    kv[key] = format_double(roc.auc);
    kv["n_same_" + std::to_string(level)] = std::to_string(roc.n_same);
    kv["n_diff_" + std::to_string(level)] = std::to_string(roc.n_diff);
    if (o.write_scores) write_scores_csv(out / ("scores_s" + std::to_string(level) + ".csv"), scores);

    std::vector<LabeledCurve> curves;
    if (auto c = plot_kde(scores.same_scores())) curves.push_back({"same identity", *c});
    if (auto c = plot_kde(scores.diff_scores())) curves.push_back({"different identity", *c});
    if (!curves.empty()) {
      const std::string name = "roc_scores_s" + std::to_string(level) + ".svg";
      write_text_file(out / name,
                      svg_density(curves, {.title = "Pair similarity at " + std::to_string(level) + "% strength"}));
      figs << "![" << level << "%](" << name << ")\n";
    }
  }
  kv["same_gender_only"] = s.same_gender_only ? "true" : "false";
  write_key_values(out / "auc.txt", kv);
  const std::string table = format_auc_table(rows, "Synthetic");
  write_text_file(out / "auc_table.md", table);
  return {"## Verification AUC by identity strength\n\n" + table + "\n" + figs.str() + "\n"};
}

std::string stats_row(const std::string& label, const SummaryStats& st) {
  return "| " + label + " | " + std::to_string(st.n) + " | " + fixed(st.mean, 4) + " | " + fixed(st.sd, 4) + " | " +
         fixed(st.min, 4) + " | " + fixed(st.q1, 4) + " | " + fixed(st.median, 4) + " | " + fixed(st.q3, 4) +
         " | " + fixed(st.iqr(), 4) + " |\n";
}

KeyValues stats_kv(const SummaryStats& st, const std::string& prefix) {
  return {{prefix + "n", std::to_string(st.n)},       {prefix + "mean", format_double(st.mean)},
          {prefix + "sd", format_double(st.sd)},      {prefix + "min", format_double(st.min)},
          {prefix + "q1", format_double(st.q1)},      {prefix + "median", format_double(st.median)},
          {prefix + "q3", format_double(st.q3)},      {prefix + "max", format_double(st.max)},
          {prefix + "iqr", format_double(st.iqr())}};
}

constexpr const char* kStatsHeader =
    "| Level | n | mean | sd | min | q1 | median | q3 | IQR |\n|---|---|---|---|---|---|---|---|---|\n";

Section do_profile(const Settings& s, const FaceDataset& data, const fs::path& out) {
  const VeridicalProfile profile = veridical_profile(data);
  const auto compression = compression_stats(data);
  KeyValues kv;
  std::ostringstream md;
  md << "## Veridical similarity profile\n\nCosine between each 100% image and same-identity images at each "
        "level.\n\n"
     << kStatsHeader;
  for (const auto& l : profile.levels) {
    md << stats_row("100 vs " + std::to_string(l.strength_pct), l.stats);
    merge_into(kv, stats_kv(l.stats, "veridical." + std::to_string(l.strength_pct) + "."));
  }
  if (profile.baseline.n > 0) {
    md << stats_row("100 vs 100", profile.baseline);
    merge_into(kv, stats_kv(profile.baseline, "veridical.100."));
  }
  md << "\n## Same-identity score compression\n\n" << kStatsHeader;
  std::vector<LabeledCurve> curves;
  const PairOptions pairs{.same_gender_only = true, .max_diff_pairs = 1, .seed = s.seed};
  for (const auto& row : compression) {
    md << stats_row(std::to_string(row.strength_pct) + "%", row.all);
    merge_into(kv, stats_kv(row.all, "compression." + std::to_string(row.strength_pct) + "."));
    if (auto c = plot_kde(build_pairs(data, row.strength_pct, pairs).same_scores())) {
      curves.push_back({std::to_string(row.strength_pct) + "%", *c});
    }
  }
  write_key_values(out / "profile.txt", kv);
  if (!curves.empty()) {
    write_text_file(out / "compression.svg", svg_density(curves, {.title = "Same-identity similarity by strength"}));
    md << "\n![compression](compression.svg)\n";
  }
  md << "\n";
  return {md.str()};
}

Section do_density(const Settings& s, const FaceDataset& data, const fs::path& out) {
  const PairOptions pairs{.same_gender_only = s.same_gender_only, .max_diff_pairs = s.max_diff_pairs, .seed = s.seed};
  std::ostringstream md;
  md << "## Condition-partitioned similarity\n\n| Strength | view only | illumination only | both | different id |\n"
        "|---|---|---|---|---|\n";
  std::ostringstream figs;
  KeyValues kv;
  for (int level : strength_levels(data)) {
    const ScoreSet scores = build_pairs(data, level, pairs);
    const auto parts = partition_by_condition(scores.same_id);
    const auto diff = scores.diff_scores();
    std::vector<LabeledCurve> curves;
    md << "| " << level << "% ";
    for (auto c : {ConditionChange::ViewOnly, ConditionChange::IllumOnly, ConditionChange::Both}) {
      const auto& part = parts[static_cast<std::size_t>(c)];
      const std::string key = std::to_string(level) + "." + std::string(to_string(c));
      kv[key + ".n"] = std::to_string(part.size());
      std::string cell = "n=" + std::to_string(part.size());
      if (!part.empty()) {
        const auto st = summarize(part);
        kv[key + ".mean"] = format_double(st.mean);
        cell += ", mean " + fixed(st.mean, 4);
      }
      md << "| " << cell << " ";
      if (auto curve = plot_kde(part)) curves.push_back({std::string(to_string(c)) + " changed", *curve});
    }
    kv[std::to_string(level) + ".different.n"] = std::to_string(diff.size());
    md << "| n=" << diff.size() << " |\n";
    if (auto curve = plot_kde(diff)) curves.push_back({"different identity", *curve});
    if (!curves.empty()) {
      const std::string name = "density_s" + std::to_string(level) + ".svg";
      write_text_file(out / name,
                      svg_density(curves, {.title = "Similarity by condition change, " + std::to_string(level) +
                                                        "% strength"}));
      figs << "![" << level << "%](" << name << ")\n";
    }
  }
  write_key_values(out / "density.txt", kv);
  md << "\n" << figs.str() << "\n";
  return {md.str()};
}

Section do_purity(const Settings& s, const FaceDataset& data, const fs::path& out) {
  std::ostringstream md;
  md << "## Neighbour purity (k = " << s.k_neighbors << ")\n\n| Slice | n | identity | gender | illumination | "
        "viewpoint |\n|---|---|---|---|---|---|\n";
  KeyValues kv;
  const auto add = [&](const std::string& label, const std::string& key, const MetaPredicate& keep) {
    const PurityReport r = neighbor_purity(data, s.k_neighbors, keep);
    merge_into(kv, prefixed(r.to_key_values(), key + "."));
    md << "| " << label << " | " << r.n << " | " << fixed(r.identity, 4) << " | " << fixed(r.gender, 4) << " | "
       << fixed(r.illumination, 4) << " | " << fixed(r.viewpoint, 4) << " |\n";
  };
  add("all", "all", {});
  for (int level : strength_levels(data)) {
    add(std::to_string(level) + "%", "s" + std::to_string(level),
        [level](const ImageMeta& m) { return m.strength_pct == level; });
  }
  const auto levels = strength_levels(data);
  if (std::ranges::any_of(levels, [](int l) { return l >= 75; }) &&
      std::ranges::any_of(levels, [](int l) { return l < 75; })) {
    add(">= 75%", "s75plus", [](const ImageMeta& m) { return m.strength_pct >= 75; });
  }
  write_key_values(out / "purity.txt", kv);
  md << "\n";
  return {md.str()};
}

// ---------------------------------------------------------------------------

int exit_code_for(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Usage: return kUsage;
    case ErrorCategory::Data: return kData;
    case ErrorCategory::Numerical: return kNumerical;
  }
  return kData;
}

/// Writes everything into a sibling temp directory, then swaps it into place.
template <typename Fn>
void write_atomically(const fs::path& out, Fn&& fill) {
  const fs::path target = fs::absolute(out).lexically_normal();
  const fs::path parent = target.parent_path();
  fs::create_directories(parent);
  const std::string tag = std::to_string(::getpid());
  const fs::path tmp = parent / (target.filename().string() + ".tmp-" + tag);
  const fs::path old = parent / (target.filename().string() + ".old-" + tag);
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  try {
    fill(tmp);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  if (fs::exists(target)) {
    fs::rename(target, old);
    fs::rename(tmp, target);
    fs::remove_all(old);
  } else {
    fs::rename(tmp, target);
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"facespace: synthetic face-space probing toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Common gen_c, tsne_c, cls_c, perm_c, roc_c, prof_c, dens_c, pur_c, rep_c;

  auto* gen = app.add_subcommand("generate", "Generate the synthetic dataset");
  add_common(gen, gen_c, false);
  std::optional<double> gen_noise;
  std::optional<std::size_t> gen_dim, gen_ids;
  gen->add_option("--sigma-noise", gen_noise, "Row noise scale");
  gen->add_option("--dim", gen_dim, "Embedding dimension");
  gen->add_option("--identities-per-gender", gen_ids, "Identities per gender");

  auto* tsne = app.add_subcommand("tsne", "2-D t-SNE layout and scatter plots");
  add_common(tsne, tsne_c);
  TsneOptions tsne_o;
  std::optional<double> perplexity, theta;
  std::optional<std::size_t> iters;
  tsne->add_option("--color-by", tsne_o.color_by, "identity|gender|illumination|viewpoint|strength (repeatable)")
      ->capture_default_str();
  tsne->add_option("--strength-min", tsne_o.strength_min, "Only embed images at or above this strength");
  tsne->add_option("--perplexity", perplexity);
  tsne->add_option("--theta", theta);
  tsne->add_option("--iters", iters);

  auto* cls = app.add_subcommand("classify", "Identity-grouped cross-validated linear readout");
  add_common(cls, cls_c);
  std::vector<std::string> cls_targets{"all"};
  std::optional<std::size_t> cls_folds;
  cls->add_option("--target", cls_targets, "gender|illumination|viewpoint|all")->capture_default_str();
  cls->add_option("--k-folds", cls_folds);

  auto* perm = app.add_subcommand("permtest", "Permutation null distribution for a readout");
  add_common(perm, perm_c);
  PermOptions perm_o;
  std::optional<std::size_t> perm_n, perm_folds;
  perm->add_option("--target", perm_o.target)->capture_default_str();
  perm->add_option("--n-perm", perm_n);
  perm->add_option("--k-folds", perm_folds);
  perm->add_flag("--shuffle-labels", perm_o.shuffle_labels, "Negative control: shuffle the true labels first");

  auto* roc = app.add_subcommand("roc", "Per-strength verification AUC and score distributions");
  add_common(roc, roc_c);
  RocOptions roc_o;
  std::optional<bool> roc_gender;
  roc->add_flag("--write-scores", roc_o.write_scores, "Also write per-strength pair scores as CSV");
  roc->add_flag("--same-gender-only,!--all-genders", roc_gender, "Restrict different-identity pairs by gender");

  auto* prof = app.add_subcommand("profile", "Veridical similarity profile and score compression");
  add_common(prof, prof_c);

  auto* dens = app.add_subcommand("density", "Condition-partitioned similarity densities");
  add_common(dens, dens_c);

  auto* pur = app.add_subcommand("purity", "k-nearest-neighbour attribute purity");
  add_common(pur, pur_c);
  std::optional<std::size_t> pur_k;
  pur->add_option("-k,--k-neighbors", pur_k);

  auto* rep = app.add_subcommand("report", "Run every analysis and write a markdown summary");
  add_common(rep, rep_c);
  TsneOptions rep_tsne{.color_by = {"identity", "viewpoint", "strength"}};
  rep->add_option("--color-by", rep_tsne.color_by)->capture_default_str();
  bool rep_skip_tsne = false;
  rep->add_flag("--skip-tsne", rep_skip_tsne, "Leave out the t-SNE figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "facespace: usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    flag_to_key(gen_c, gen_noise, "synth.sigma_noise");
    flag_to_key(gen_c, gen_dim, "synth.dim");
    flag_to_key(gen_c, gen_ids, "synth.n_identities_per_gender");
    flag_to_key(tsne_c, perplexity, "tsne.perplexity");
    flag_to_key(tsne_c, theta, "tsne.theta");
    flag_to_key(tsne_c, iters, "tsne.n_iter");
    flag_to_key(cls_c, cls_folds, "k_folds");
    flag_to_key(perm_c, perm_n, "n_perm");
    flag_to_key(perm_c, perm_folds, "k_folds");
    flag_to_key(roc_c, roc_gender, "same_gender_only");
    flag_to_key(pur_c, pur_k, "k_neighbors");

    const auto run = [](Common& c, auto&& body) {
      const Settings s = build_settings(c);
      check_input_paths(c);
      const fs::path out = prepare_out(c.out);
      const FaceDataset data = load_input(c, s);
      const Section section = body(s, data, out);
      std::cout << section.markdown;
    };

    if (gen->parsed()) {
      const Settings s = build_settings(gen_c);
      const fs::path out = prepare_out(gen_c.out);
      std::cout << do_generate(s, generate_dataset(s.synth), out).markdown;
    } else if (tsne->parsed()) {
      run(tsne_c, [&](const Settings& s, const FaceDataset& d, const fs::path& o) { return do_tsne(s, d, o, tsne_o); });
    } else if (cls->parsed()) {
      const auto targets = parse_targets(cls_targets);
      run(cls_c, [&](const Settings& s, const FaceDataset& d, const fs::path& o) {
        return do_classify(s, d, o, targets);
      });
    } else if (perm->parsed()) {
      run(perm_c, [&](const Settings& s, const FaceDataset& d, const fs::path& o) {
        return do_permtest(s, d, o, perm_o);
      });
    } else if (roc->parsed()) {
      run(roc_c, [&](const Settings& s, const FaceDataset& d, const fs::path& o) { return do_roc(s, d, o, roc_o); });
    } else if (prof->parsed()) {
      run(prof_c, do_profile);
    } else if (dens->parsed()) {
      run(dens_c, do_density);
    } else if (pur->parsed()) {
      run(pur_c, do_purity);
    } else if (rep->parsed()) {
      const Settings s = build_settings(rep_c);
      check_input_paths(rep_c);
      for (const auto& name : rep_tsne.color_by) parse_color_attribute(name);
      const FaceDataset data = load_input(rep_c, s);
      write_atomically(rep_c.out, [&](const fs::path& dir) {
        std::ostringstream md;
        md << "# Face-space report\n\nSeed " << s.seed << ".\n\n";
        if (rep_c.data.empty()) {
          md << do_generate(s, data, dir).markdown;
        } else {
          md << "## Dataset\n\nLoaded " << data.size() << " images from `" << rep_c.data << "`.\n\n";
        }
        md << do_roc(s, data, dir, {}).markdown;
        md << do_profile(s, data, dir).markdown;
        md << do_density(s, data, dir).markdown;
        md << do_classify(s, data, dir, parse_targets({"all"})).markdown;
        md << do_permtest(s, data, dir, {}).markdown;
        md << do_purity(s, data, dir).markdown;
        if (!rep_skip_tsne) md << do_tsne(s, data, dir, rep_tsne).markdown;
        write_key_values(dir / "settings.txt",
                         [&] {
                           KeyValues kv = prefixed(s.synth.to_key_values(), "synth.");
                           merge_into(kv, prefixed(s.tsne.to_key_values(), "tsne."));
                           kv["k_folds"] = std::to_string(s.k_folds);
                           kv["n_perm"] = std::to_string(s.n_perm);
                           kv["k_neighbors"] = std::to_string(s.k_neighbors);
                           kv["same_gender_only"] = s.same_gender_only ? "true" : "false";
                           kv["max_diff_pairs"] = std::to_string(s.max_diff_pairs);
                           return kv;
                         }());
        write_text_file(dir / "report.md", md.str());
      });
      std::cout << "report written to " << rep_c.out << "/report.md\n";
    }
  } catch (const Error& e) {
    std::cerr << "facespace: error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "facespace: error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "facespace: error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"facespace"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : storage) argv.push_back(a.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace facespace::cli
