#include "facespace/svg.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "facespace/error.hpp"

namespace facespace {
namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr std::size_t kMaxLegendEntries = 12;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  // Avoid "-0.00".
  if (std::string_view(buf) == "-0.00") return "0.00";
  return buf;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi, double pad_fraction = 0.05) {
  if (!(hi > lo)) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = (hi - lo) * pad_fraction;
  return {lo - pad, hi + pad};
}

/// Maps data coordinates into the plot area (y grows upwards).
struct Frame {
  double width, height;
  Range x, y;

  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (width - kLeft - kRight); }
  double py(double v) const {
    return height - kBottom - (v - y.lo) / (y.hi - y.lo) * (height - kTop - kBottom);
  }
  double plot_right() const { return width - kRight; }
  double plot_bottom() const { return height - kBottom; }
};

void open_svg(std::ostringstream& out, const PlotOptions& o) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height
      << "\" viewBox=\"0 0 " << o.width << ' ' << o.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << o.width << "\" height=\"" << o.height << "\" fill=\"#ffffff\"/>\n";
  if (!o.title.empty()) {
    out << "<text x=\"" << fmt(o.width / 2.0) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape_xml(o.title) << "</text>\n";
  }
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

void draw_axes(std::ostringstream& out, const Frame& f, std::string_view x_label, std::string_view y_label) {
  const double x0 = kLeft, x1 = f.plot_right(), y0 = kTop, y1 = f.plot_bottom();
  out << "<g stroke=\"#333333\" stroke-width=\"1\">\n"
      << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x1) << "\" y2=\"" << fmt(y1) << "\"/>\n"
      << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0) << "\" y2=\"" << fmt(y1) << "\"/>\n";
  constexpr int kTicks = 5;
  for (int t = 0; t < kTicks; ++t) {
    const double fx = f.x.lo + (f.x.hi - f.x.lo) * t / (kTicks - 1);
    const double fy = f.y.lo + (f.y.hi - f.y.lo) * t / (kTicks - 1);
    out << "<line x1=\"" << fmt(f.px(fx)) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(f.px(fx)) << "\" y2=\""
        << fmt(y1 + 5) << "\"/>\n"
        << "<line x1=\"" << fmt(x0 - 5) << "\" y1=\"" << fmt(f.py(fy)) << "\" x2=\"" << fmt(x0) << "\" y2=\""
        << fmt(f.py(fy)) << "\"/>\n";
  }
  out << "</g>\n<g fill=\"#333333\">\n";
  for (int t = 0; t < kTicks; ++t) {
    const double fx = f.x.lo + (f.x.hi - f.x.lo) * t / (kTicks - 1);
    const double fy = f.y.lo + (f.y.hi - f.y.lo) * t / (kTicks - 1);
    out << "<text x=\"" << fmt(f.px(fx)) << "\" y=\"" << fmt(y1 + 18) << "\" text-anchor=\"middle\">"
        << tick_label(fx) << "</text>\n"
        << "<text x=\"" << fmt(x0 - 8) << "\" y=\"" << fmt(f.py(fy) + 4) << "\" text-anchor=\"end\">"
        << tick_label(fy) << "</text>\n";
  }
  if (!x_label.empty()) {
    out << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(f.height - 15)
        << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";
  }
  if (!y_label.empty()) {
    out << "<text x=\"18\" y=\"" << fmt((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << fmt((y0 + y1) / 2) << ")\">" << escape_xml(y_label) << "</text>\n";
  }
  out << "</g>\n";
}

struct LegendEntry {
  std::string label;
  std::string color;
};

void draw_legend(std::ostringstream& out, const Frame& f, const std::string& heading,
                 const std::vector<LegendEntry>& entries, std::size_t hidden) {
  const double x = f.plot_right() + 20;
  double y = kTop + 4;
  out << "<g>\n<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-weight=\"bold\">" << escape_xml(heading)
      << "</text>\n";
  for (const auto& e : entries) {
    y += 18;
    out << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y - 10) << "\" width=\"12\" height=\"12\" fill=\"" << e.color
        << "\"/>\n<text x=\"" << fmt(x + 18) << "\" y=\"" << fmt(y) << "\">" << escape_xml(e.label) << "</text>\n";
  }
  if (hidden > 0) {
    y += 18;
    out << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\">(+" << hidden << " more)</text>\n";
  }
  out << "</g>\n";
}

std::string level_label(double v, std::string_view suffix) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g%s", v, std::string(suffix).c_str());
  return buf;
}

}  // namespace

std::string_view to_string(ColorAttribute a) noexcept {
  switch (a) {
    case ColorAttribute::Identity: return "identity";
    case ColorAttribute::Gender: return "gender";
    case ColorAttribute::Illumination: return "illumination";
    case ColorAttribute::Viewpoint: return "viewpoint";
    case ColorAttribute::Strength: return "strength";
  }
  return "unknown";
}

ColorAttribute parse_color_attribute(std::string_view s) {
  std::string lower(s);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (auto a : {ColorAttribute::Identity, ColorAttribute::Gender, ColorAttribute::Illumination,
                 ColorAttribute::Viewpoint, ColorAttribute::Strength}) {
    if (lower == to_string(a)) return a;
  }
  if (lower == "view" || lower == "yaw") return ColorAttribute::Viewpoint;
  throw Error(ErrorCode::InvalidArgument, "unknown colour attribute '" + std::string(s) +
                                              "' (identity, gender, illumination, viewpoint, strength)");
}

std::string sequential_color(std::size_t index, std::size_t count) {
  const double t = count <= 1 ? 0.0 : static_cast<double>(index) / static_cast<double>(count - 1);
  const double pos = t * static_cast<double>(kSequentialPalette.size() - 1);
  const auto lo = std::min(static_cast<std::size_t>(pos), kSequentialPalette.size() - 2);
  const double frac = pos - static_cast<double>(lo);
  const auto channel = [](std::string_view hex, int c) {
    return std::stoi(std::string(hex.substr(1 + 2 * c, 2)), nullptr, 16);
  };
  char buf[8];
  int rgb[3];
  for (int c = 0; c < 3; ++c) {
    const double a = channel(kSequentialPalette[lo], c);
    const double b = channel(kSequentialPalette[lo + 1], c);
    rgb[c] = static_cast<int>(std::lround(a + (b - a) * frac));
  }
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
  return buf;
}

LabeledLayout read_layout_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || (line != "image_id,x,y" && line != "image_id,x,y\r")) {
    throw Error(ErrorCode::SchemaError, path.string() + ": expected header image_id,x,y");
  }
  LabeledLayout out;
  std::vector<double> xy;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
      throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
    }
    try {
      std::size_t used = 0;
      const std::string xs = line.substr(c1 + 1, c2 - c1 - 1);
      const std::string ys = line.substr(c2 + 1);
      const double x = std::stod(xs, &used);
      if (used != xs.size()) throw std::invalid_argument(xs);
      const double y = std::stod(ys, &used);
      if (used != ys.size()) throw std::invalid_argument(ys);
      xy.push_back(x);
      xy.push_back(y);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) + ": bad coordinate");
    }
    out.image_ids.push_back(line.substr(0, c1));
  }
  out.points.resize(static_cast<Eigen::Index>(out.image_ids.size()), 2);
  for (std::size_t i = 0; i < out.image_ids.size(); ++i) {
    out.points(static_cast<Eigen::Index>(i), 0) = xy[2 * i];
    out.points(static_cast<Eigen::Index>(i), 1) = xy[2 * i + 1];
  }
  return out;
}

std::string svg_scatter(const LabeledLayout& layout, std::span<const ImageMeta> meta, ColorAttribute color_by,
                        const PlotOptions& options) {
  const std::size_t n = layout.image_ids.size();
  if (static_cast<std::size_t>(layout.points.rows()) != n) {
    throw Error(ErrorCode::MismatchedIds, "layout has " + std::to_string(layout.points.rows()) +
                                              " points but " + std::to_string(n) + " ids");
  }
  if (meta.size() != n) {
    throw Error(ErrorCode::MismatchedIds, "layout has " + std::to_string(n) + " points but metadata has " +
                                              std::to_string(meta.size()) + " rows");
  }
  std::unordered_map<std::string_view, const ImageMeta*> by_id;
  for (const auto& m : meta) by_id.emplace(m.image_id, &m);
  std::vector<const ImageMeta*> aligned(n);
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = by_id.find(layout.image_ids[i]);
    if (it == by_id.end()) {
      throw Error(ErrorCode::MismatchedIds, "layout id '" + layout.image_ids[i] + "' not in metadata");
    }
    if (!seen.insert(layout.image_ids[i]).second) {
      throw Error(ErrorCode::MismatchedIds, "layout id '" + layout.image_ids[i] + "' repeated");
    }
    aligned[i] = it->second;
  }

  // Attribute value per point as an orderable key, then a colour per level.
  std::vector<double> key(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = *aligned[i];
    switch (color_by) {
      case ColorAttribute::Identity: key[i] = static_cast<double>(m.identity_id); break;
      case ColorAttribute::Gender: key[i] = static_cast<double>(m.gender); break;
      case ColorAttribute::Illumination: key[i] = static_cast<double>(m.illumination); break;
      case ColorAttribute::Viewpoint: key[i] = m.yaw_deg; break;
      case ColorAttribute::Strength: key[i] = m.strength_pct; break;
    }
  }
  std::vector<double> levels(key);
  std::ranges::sort(levels);
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const bool ordinal = color_by == ColorAttribute::Viewpoint || color_by == ColorAttribute::Strength;
  std::map<double, std::string> color_of;
  std::vector<LegendEntry> legend;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::string color =
        ordinal ? sequential_color(l, levels.size()) : std::string(kCategoricalPalette[l % kCategoricalPalette.size()]);
    color_of[levels[l]] = color;
    if (legend.size() >= kMaxLegendEntries) continue;
    std::string label;
    switch (color_by) {
      case ColorAttribute::Identity: label = "id " + level_label(levels[l], ""); break;
      case ColorAttribute::Gender: label = std::string(to_string(static_cast<Gender>(static_cast<int>(levels[l])))); break;
      case ColorAttribute::Illumination:
        label = std::string(to_string(static_cast<Illumination>(static_cast<int>(levels[l]))));
        break;
      case ColorAttribute::Viewpoint: label = level_label(levels[l], " deg"); break;
      case ColorAttribute::Strength: label = level_label(levels[l], "%"); break;
    }
    legend.push_back({label, color});
  }

  Range xr{0.0, 1.0}, yr{0.0, 1.0};
  if (n > 0) {
    xr = padded(layout.points.col(0).minCoeff(), layout.points.col(0).maxCoeff());
    yr = padded(layout.points.col(1).minCoeff(), layout.points.col(1).maxCoeff());
  }
  const Frame frame{static_cast<double>(options.width), static_cast<double>(options.height), xr, yr};

  std::ostringstream out;
  open_svg(out, options);
  draw_axes(out, frame, "t-SNE 1", "t-SNE 2");
  out << "<g fill-opacity=\"0.8\" stroke=\"none\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << "<circle cx=\"" << fmt(frame.px(layout.points(r, 0))) << "\" cy=\"" << fmt(frame.py(layout.points(r, 1)))
        << "\" r=\"2.5\" fill=\"" << color_of[key[i]] << "\"/>\n";
  }
  out << "</g>\n";
  draw_legend(out, frame, std::string(to_string(color_by)), legend, levels.size() - legend.size());
  out << "</svg>\n";
  return out.str();
}

std::string svg_density(std::span<const LabeledCurve> curves, const PlotOptions& options) {
  if (curves.empty()) throw Error(ErrorCode::EmptyCurveList, "no density curves to plot");
  double x_lo = INFINITY, x_hi = -INFINITY, y_hi = 0.0;
  for (const auto& c : curves) {
    if (c.curve.grid.empty() || c.curve.grid.size() != c.curve.density.size()) {
      throw Error(ErrorCode::ShapeMismatch, "density curve '" + c.label + "' has mismatched grid");
    }
    x_lo = std::min(x_lo, c.curve.grid.front());
    x_hi = std::max(x_hi, c.curve.grid.back());
    for (double d : c.curve.density) y_hi = std::max(y_hi, d);
  }
  const Frame frame{static_cast<double>(options.width), static_cast<double>(options.height), Range{x_lo, x_hi},
                    Range{0.0, y_hi > 0.0 ? y_hi * 1.05 : 1.0}};

  std::ostringstream out;
  open_svg(out, options);
  draw_axes(out, frame, "cosine similarity", "density");
  std::vector<LegendEntry> legend;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const std::string color(kCategoricalPalette[c % kCategoricalPalette.size()]);
    const auto& curve = curves[c].curve;
    const double base = frame.py(0.0);
    out << "<path d=\"M" << fmt(frame.px(curve.grid.front())) << ' ' << fmt(base);
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
      out << " L" << fmt(frame.px(curve.grid[g])) << ' ' << fmt(frame.py(curve.density[g]));
    }
    out << " L" << fmt(frame.px(curve.grid.back())) << ' ' << fmt(base) << " Z\" fill=\"" << color
        << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    legend.push_back({curves[c].label, color});
  }
  const std::size_t shown = std::min(legend.size(), kMaxLegendEntries);
  const std::size_t hidden = legend.size() - shown;
  legend.resize(shown);
  draw_legend(out, frame, "distribution", legend, hidden);
  out << "</svg>\n";
  return out.str();
}

std::string svg_histogram(std::span<const double> values, double observed, std::string_view x_label,
                          const PlotOptions& options, std::size_t bins) {
  if (values.empty()) throw Error(ErrorCode::EmptyDistribution, "no values to histogram");
  if (bins == 0) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
  const auto [mn, mx] = std::ranges::minmax_element(values);
  double lo = std::min(*mn, observed);
  double hi = std::max(*mx, observed);
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    ++counts[b];
  }
  const auto peak = static_cast<double>(*std::ranges::max_element(counts));
  const Frame frame{static_cast<double>(options.width), static_cast<double>(options.height), padded(lo, hi),
                    Range{0.0, peak * 1.1}};

  std::ostringstream out;
  open_svg(out, options);
  draw_axes(out, frame, x_label, "count");
  out << "<g fill=\"#4e79a7\" stroke=\"#ffffff\" stroke-width=\"0.5\">\n";
  for (std::size_t b = 0; b < bins; ++b) {
    if (counts[b] == 0) continue;
    const double x0 = frame.px(lo + width * static_cast<double>(b));
    const double x1 = frame.px(lo + width * static_cast<double>(b + 1));
    const double y = frame.py(static_cast<double>(counts[b]));
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(x1 - x0) << "\" height=\""
        << fmt(frame.plot_bottom() - y) << "\"/>\n";
  }
  out << "</g>\n<line x1=\"" << fmt(frame.px(observed)) << "\" y1=\"" << fmt(kTop) << "\" x2=\""
      << fmt(frame.px(observed)) << "\" y2=\"" << fmt(frame.plot_bottom())
      << "\" stroke=\"#e15759\" stroke-width=\"2\"/>\n";
  draw_legend(out, frame, "", {{"null", "#4e79a7"}, {"observed", "#e15759"}}, 0);
  out << "</svg>\n";
  return out.str();
}

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace facespace
