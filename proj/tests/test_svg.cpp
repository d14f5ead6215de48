#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "facespace/error.hpp"
#include "facespace/kde.hpp"
#include "facespace/similarity.hpp"
#include "facespace/svg.hpp"
#include "facespace/synthgen.hpp"
#include "helpers.hpp"
#include "svg_parse.hpp"

using namespace facespace;
using testutil::attr;
using testutil::count_elements;
using testutil::parse_xml;

namespace {

LabeledLayout layout_for(const std::vector<ImageMeta>& meta, std::uint64_t seed) {
  Rng rng(seed);
  LabeledLayout l;
  l.points.resize(static_cast<Eigen::Index>(meta.size()), 2);
  for (std::size_t i = 0; i < meta.size(); ++i) {
    l.image_ids.push_back(meta[i].image_id);
    l.points(static_cast<Eigen::Index>(i), 0) = rng.normal() * 10;
    l.points(static_cast<Eigen::Index>(i), 1) = rng.normal() * 10;
  }
  return l;
}

/// Density-weighted mean pixel x of a filled curve path "M x y L x y ... Z".
double path_centroid_x(const std::string& d, double baseline_y) {
  std::istringstream in(d);
  std::string tok;
  double sx = 0.0, sw = 0.0;
  while (in >> tok) {
    if (tok == "Z") break;
    const double x = std::stod(tok.substr(1));
    double y;
    in >> y;
    const double w = baseline_y - y;
    sx += w * x;
    sw += w;
  }
  return sx / sw;
}

}  // namespace

TEST(SvgScatter, OnePointOneMarker) {
  ImageMeta m;
  m.image_id = "only";
  LabeledLayout l{{"only"}, Layout::Zero(1, 2)};
  const auto svg = svg_scatter(l, std::vector<ImageMeta>{m}, ColorAttribute::Gender);
  const auto tree = parse_xml(svg);
  EXPECT_EQ(count_elements(tree, "circle"), 1u);
  EXPECT_TRUE(testutil::self_contained(svg));
}

TEST(SvgScatter, SevenThousandPointsWellFormedAndDeterministic) {
  const auto d = generate_dataset(SynthConfig{.dim = 8});
  const auto l = layout_for(d.meta(), 1);
  for (auto attr_kind : {ColorAttribute::Identity, ColorAttribute::Viewpoint, ColorAttribute::Strength}) {
    const auto a = svg_scatter(l, d.meta(), attr_kind);
    const auto b = svg_scatter(l, d.meta(), attr_kind);
    EXPECT_EQ(a, b);
    EXPECT_EQ(count_elements(parse_xml(a), "circle"), 7000u);
  }
}

TEST(SvgScatter, PaletteAndLegend) {
  const auto d = generate_dataset(SynthConfig{.dim = 8, .n_identities_per_gender = 2});
  const auto l = layout_for(d.meta(), 2);
  const auto tree = parse_xml(svg_scatter(l, d.meta(), ColorAttribute::Illumination));
  std::set<std::string> fills;
  testutil::for_each_element(tree, "circle", [&](const auto& c) { fills.insert(attr(c, "fill")); });
  EXPECT_EQ(fills, (std::set<std::string>{std::string(kCategoricalPalette[0]), std::string(kCategoricalPalette[1])}));
  std::string legend_text;
  testutil::for_each_element(tree, "text", [&](const auto& t) { legend_text += t.template get_value<std::string>() + "|"; });
  EXPECT_NE(legend_text.find("ambient"), std::string::npos);
  EXPECT_NE(legend_text.find("spotlight"), std::string::npos);

  // Viewpoint is ordinal: colours follow the sequential ramp in yaw order.
  const auto vt = parse_xml(svg_scatter(l, d.meta(), ColorAttribute::Viewpoint));
  std::map<std::string, double> yaw_of_fill;
  std::size_t i = 0;
  testutil::for_each_element(vt, "circle", [&](const auto& c) { yaw_of_fill[attr(c, "fill")] = d.meta(i++).yaw_deg; });
  EXPECT_EQ(yaw_of_fill.size(), 5u);
  EXPECT_EQ(yaw_of_fill.at(sequential_color(0, 5)), 0.0);
  EXPECT_EQ(yaw_of_fill.at(sequential_color(4, 5)), 60.0);
  EXPECT_EQ(sequential_color(0, 5), std::string(kSequentialPalette[0]));
  EXPECT_EQ(sequential_color(4, 5), std::string(kSequentialPalette[4]));
}

TEST(SvgScatter, MismatchedIds) {
  const auto d = generate_dataset(SynthConfig{.dim = 8, .n_identities_per_gender = 1});
  auto l = layout_for(d.meta(), 3);
  l.image_ids[3] = "nope";
  EXPECT_FS_ERROR(svg_scatter(l, d.meta(), ColorAttribute::Gender), MismatchedIds);
  auto short_meta = d.meta();
  short_meta.pop_back();
  EXPECT_FS_ERROR(svg_scatter(layout_for(d.meta(), 3), short_meta, ColorAttribute::Gender), MismatchedIds);
}

TEST(SvgScatter, EscapesText) {
  ImageMeta m;
  m.image_id = "x";
  LabeledLayout l{{"x"}, Layout::Zero(1, 2)};
  const auto svg = svg_scatter(l, std::vector<ImageMeta>{m}, ColorAttribute::Gender, {.title = "a<b & \"c\""});
  EXPECT_NO_THROW(parse_xml(svg));
  EXPECT_NE(svg.find("a&lt;b &amp; &quot;c&quot;"), std::string::npos);
}

TEST(SvgDensity, SingleCurveSinglePath) {
  Rng rng(4);
  std::vector<double> s(200);
  for (auto& v : s) v = rng.uniform();
  const std::vector<LabeledCurve> curves{{"uniform", kde(s)}};
  const auto svg = svg_density(curves);
  const auto tree = parse_xml(svg);
  EXPECT_EQ(count_elements(tree, "path"), 1u);
  EXPECT_GE(count_elements(tree, "line"), 2u);
  EXPECT_NE(svg.find(">cosine similarity<"), std::string::npos);
  EXPECT_NE(svg.find(">density<"), std::string::npos);
  EXPECT_EQ(svg, svg_density(curves));
  EXPECT_FS_ERROR(svg_density(std::vector<LabeledCurve>{}), EmptyCurveList);
}

TEST(SvgDensity, DifferentIdentityCurveDriftsLeftWithStrength) {
  SynthConfig c;
  c.n_identities_per_gender = 20;
  c.strength_levels = {25, 125};
  const auto d = generate_dataset(c);
  const std::vector<LabeledCurve> curves{{"diff 25%", kde(build_pairs(d, 25).diff_scores())},
                                         {"diff 125%", kde(build_pairs(d, 125).diff_scores())}};
  const auto tree = parse_xml(svg_density(curves, {.height = 600}));
  std::vector<std::string> paths;
  testutil::for_each_element(tree, "path", [&](const auto& p) { paths.push_back(attr(p, "d")); });
  ASSERT_EQ(paths.size(), 2u);
  // Baseline y is the first "M x y" pair of each path.
  std::istringstream first(paths[0]);
  std::string mx;
  double base;
  first >> mx >> base;
  EXPECT_LT(path_centroid_x(paths[1], base), path_centroid_x(paths[0], base));
}

TEST(SvgHistogram, WellFormedWithObservedMarker) {
  Rng rng(5);
  std::vector<double> null(1000);
  for (auto& v : null) v = 50 + rng.normal();
  const auto svg = svg_histogram(null, 99.0, "percent correct");
  const auto tree = parse_xml(svg);
  EXPECT_GT(count_elements(tree, "rect"), 5u);
  bool marker = false;
  testutil::for_each_element(tree, "line", [&](const auto& l) { marker |= attr(l, "stroke") == "#e15759"; });
  EXPECT_TRUE(marker);
  EXPECT_EQ(svg, svg_histogram(null, 99.0, "percent correct"));
}

TEST(LayoutCsv, ReadBack) {
  testutil::TempDir dir;
  write_text_file(dir / "l.csv", "image_id,x,y\na,1.5,-2\nb,0,3e2\n");
  const auto l = read_layout_csv(dir / "l.csv");
  ASSERT_EQ(l.image_ids.size(), 2u);
  EXPECT_EQ(l.image_ids[1], "b");
  EXPECT_EQ(l.points(1, 1), 300.0);
  write_text_file(dir / "bad.csv", "image_id,x\na,1\n");
  EXPECT_FS_ERROR(read_layout_csv(dir / "bad.csv"), SchemaError);
}

TEST(ColorAttribute, Parse) {
  EXPECT_EQ(parse_color_attribute("Identity"), ColorAttribute::Identity);
  EXPECT_EQ(parse_color_attribute("yaw"), ColorAttribute::Viewpoint);
  EXPECT_FS_ERROR(parse_color_attribute("hue"), InvalidArgument);
}
