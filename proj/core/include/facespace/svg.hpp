#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facespace/dataset.hpp"
#include "facespace/kde.hpp"
#include "facespace/quadtree.hpp"

namespace facespace {

/// Categorical palette (Tableau 10). Values beyond ten categories cycle.
inline constexpr std::array<std::string_view, 10> kCategoricalPalette = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

/// Sequential anchors (viridis, dark to light) for ordinal attributes.
inline constexpr std::array<std::string_view, 5> kSequentialPalette = {
    "#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"};

enum class ColorAttribute { Identity, Gender, Illumination, Viewpoint, Strength };
std::string_view to_string(ColorAttribute a) noexcept;
/// Throws InvalidArgument.
ColorAttribute parse_color_attribute(std::string_view s);

/// Colour for rank `index` of `count` ordered levels on the sequential palette.
std::string sequential_color(std::size_t index, std::size_t count);

struct LabeledLayout {
  std::vector<std::string> image_ids;
  Layout points;
};

/// Reads the `image_id,x,y` CSV written by write_layout_csv.
LabeledLayout read_layout_csv(const std::filesystem::path& path);

struct PlotOptions {
  std::string title;
  int width = 800;
  int height = 600;
};

/// One <circle> per layout point. Every layout id must appear exactly once in
/// `meta` and vice versa; throws MismatchedIds otherwise.
std::string svg_scatter(const LabeledLayout& layout, std::span<const ImageMeta> meta,
                        ColorAttribute color_by, const PlotOptions& options = {});

struct LabeledCurve {
  std::string label;
  DensityCurve curve;
};

/// Overlaid filled curves, one <path> each, on a shared x range. Throws
/// EmptyCurveList.
std::string svg_density(std::span<const LabeledCurve> curves, const PlotOptions& options = {});

/// Histogram of `values` with a vertical marker at `observed`.
std::string svg_histogram(std::span<const double> values, double observed, std::string_view x_label,
                          const PlotOptions& options = {}, std::size_t bins = 40);

std::string escape_xml(std::string_view s);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace facespace
