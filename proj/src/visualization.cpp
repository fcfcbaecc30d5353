#include "medxplain/visualization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "medxplain/error.hpp"
#include "medxplain/pipeline.hpp"
#include "medxplain/util.hpp"

namespace medxplain {

namespace {

cv::Scalar bgr(const std::array<std::uint8_t, 3>& rgb) { return cv::Scalar(rgb[2], rgb[1], rgb[0]); }

void put_label(cv::Mat& img, const std::string& text, cv::Point origin, double scale,
               const cv::Scalar& fg, const cv::Scalar& bg) {
  int baseline = 0;
  const cv::Size size = cv::getTextSize(text, cv::FONT_HERSHEY_SIMPLEX, scale, 1, &baseline);
  const cv::Rect box(origin.x, origin.y - size.height - 1, size.width + 2, size.height + baseline + 2);
  cv::rectangle(img, box & cv::Rect(0, 0, img.cols, img.rows), bg, cv::FILLED, cv::LINE_8);
  cv::putText(img, text, {origin.x + 1, origin.y}, cv::FONT_HERSHEY_SIMPLEX, scale, fg, 1, cv::LINE_8);
}

void banner(cv::Mat& img, const std::string& text, double scale) {
  int baseline = 0;
  const cv::Size size = cv::getTextSize(text, cv::FONT_HERSHEY_SIMPLEX, scale, 1, &baseline);
  const int h = size.height + baseline + 6;
  cv::rectangle(img, cv::Rect(0, 0, img.cols, std::min(h, img.rows)), cv::Scalar(40, 40, 40), cv::FILLED,
                cv::LINE_8);
  cv::putText(img, text, {4, size.height + 3}, cv::FONT_HERSHEY_SIMPLEX, scale, cv::Scalar(255, 255, 255), 1,
              cv::LINE_8);
}

}  // namespace

Colormap Colormap::standard() {
  return Colormap({{0.0, {0, 0, 255}}, {1.0 / 3.0, {0, 255, 255}}, {2.0 / 3.0, {255, 255, 0}}, {1.0, {255, 0, 0}}});
}

Colormap Colormap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open colormap: " + path.string());
  std::vector<Stop> stops;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double pos;
    int r, g, b;
    if (!(ls >> pos >> r >> g >> b) || r < 0 || r > 255 || g < 0 || g > 255 || b < 0 || b > 255) {
      throw ConfigError("malformed colormap stop: " + line);
    }
    stops.push_back({pos, {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)}});
  }
  return Colormap(std::move(stops));
}

Colormap::Colormap(std::vector<Stop> stops) : stops_(std::move(stops)) {
  if (stops_.size() < 2) throw ConfigError("colormap needs at least two stops");
  for (std::size_t n = 1; n < stops_.size(); ++n) {
    if (!(stops_[n].position > stops_[n - 1].position)) throw ConfigError("colormap stops must increase");
  }
  if (stops_.front().position != 0.0 || stops_.back().position != 1.0) {
    throw ConfigError("colormap must span [0,1]");
  }
}

std::array<std::uint8_t, 3> Colormap::rgb(double v) const {
  v = std::clamp(v, 0.0, 1.0);
  std::size_t n = 1;
  while (n + 1 < stops_.size() && v > stops_[n].position) ++n;
  const Stop& a = stops_[n - 1];
  const Stop& b = stops_[n];
  const double t = (v - a.position) / (b.position - a.position);
  std::array<std::uint8_t, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::uint8_t>(std::lround(a.rgb[c] + t * (b.rgb[c] - a.rgb[c])));
  }
  return out;
}

void OverlaySpec::validate() const {
  if (!(opacity >= 0.0 && opacity <= 1.0)) throw InvalidInput("overlay opacity must lie in [0,1]");
  if (stroke_width < 1) throw InvalidInput("stroke width must be at least 1");
  if (gutter < 0) throw InvalidInput("gutter must be non-negative");
}

cv::Mat load_image(const std::filesystem::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (img.empty()) throw InvalidInput("cannot read image: " + path.string());
  return img;
}

cv::Mat render_heatmap_overlay(const cv::Mat& image, const AttentionHeatmap& hm, const OverlaySpec& spec) {
  spec.validate();
  if (image.empty() || image.type() != CV_8UC3) throw InvalidInput("overlay expects an 8-bit BGR image");
  if (!hm.normalized) throw InvalidInput("overlay expects a normalized heatmap");
  const auto h = static_cast<std::size_t>(image.rows);
  const auto w = static_cast<std::size_t>(image.cols);
  const AttentionHeatmap sized = (hm.height() == h && hm.width() == w) ? hm : upsample_heatmap(hm, h, w);
  if (sized.height() != h || sized.width() != w) throw InvalidInput("heatmap does not match image size");

  cv::Mat out(image.rows, image.cols, CV_8UC3);
  const double a = spec.opacity;
  for (int i = 0; i < image.rows; ++i) {
    const auto* src = image.ptr<cv::Vec3b>(i);
    auto* dst = out.ptr<cv::Vec3b>(i);
    for (int j = 0; j < image.cols; ++j) {
      const auto rgb = spec.colormap.rgb(sized.values(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      const std::uint8_t color[3] = {rgb[2], rgb[1], rgb[0]};
      for (int c = 0; c < 3; ++c) {
        dst[j][c] = static_cast<std::uint8_t>(std::lround((1.0 - a) * src[j][c] + a * color[c]));
      }
    }
  }
  return out;
}

cv::Mat render_boxes(const cv::Mat& image, const std::vector<RegionBox>& regions, const OverlaySpec& spec) {
  spec.validate();
  cv::Mat out = image.clone();
  const cv::Scalar color = bgr(spec.box_rgb);
  for (const auto& r : regions) {
    const cv::Rect rect(static_cast<int>(r.x), static_cast<int>(r.y), static_cast<int>(r.width),
                        static_cast<int>(r.height));
    // Stroke grows inward so the outer border sits exactly on the box edge.
    for (int s = 0; s < spec.stroke_width && 2 * s < std::min(rect.width, rect.height); ++s) {
      cv::rectangle(out, cv::Point(rect.x + s, rect.y + s),
                    cv::Point(rect.x + rect.width - 1 - s, rect.y + rect.height - 1 - s), color, 1, cv::LINE_8);
    }
  }
  for (const auto& r : regions) {
    const std::string label = "r" + std::to_string(r.rank) + " " + util::format_fixed(r.score, 2);
    int baseline = 0;
    const cv::Size ts = cv::getTextSize(label, cv::FONT_HERSHEY_SIMPLEX, spec.font_scale, 1, &baseline);
    // Label background ends one row above the box; inside the box when there is no room.
    const int above = static_cast<int>(r.y) - 2 - baseline;
    const int y = above - ts.height - 1 >= 0 ? above
                                               : static_cast<int>(r.y) + spec.stroke_width + ts.height + 1;
    put_label(out, label, {static_cast<int>(r.x) + spec.stroke_width, y}, spec.font_scale, cv::Scalar(0, 0, 0),
              color);
  }
  return out;
}

PanelTiles render_tiles(const PipelineRecord& record, const OverlaySpec& spec) {
  spec.validate();
  PanelTiles t;
  t.original = load_image(record.image_path);
  const auto hm = record.degradation == Degradation::attention_free ? std::nullopt : record_heatmap(record);
  if (hm) {
    const AttentionHeatmap sized = upsample_heatmap(*hm, static_cast<std::size_t>(t.original.rows),
                                                    static_cast<std::size_t>(t.original.cols));
    t.boxes = render_boxes(t.original, record.regions, spec);
    t.heatmap = render_heatmap_overlay(t.original, sized, spec);
    t.integrated = render_boxes(t.heatmap, record.regions, spec);
  } else {
    for (cv::Mat* m : {&t.boxes, &t.heatmap, &t.integrated}) {
      *m = t.original.clone();
      banner(*m, "no attention", spec.font_scale * 1.2);
    }
  }
  return t;
}

cv::Mat render_panel(const PipelineRecord& record, const OverlaySpec& spec) {
  const PanelTiles t = render_tiles(record, spec);
  const cv::Mat& original = t.original;
  const int g = spec.gutter;
  const int w = original.cols, h = original.rows;
  cv::Mat panel(2 * h + 3 * g, 2 * w + 3 * g, CV_8UC3, cv::Scalar(255, 255, 255));
  const cv::Mat* tiles[4] = {&t.original, &t.boxes, &t.heatmap, &t.integrated};
  const char* names[4] = {"(a) original", "(b) regions", "(c) attention", "(d) integrated"};
  for (int k = 0; k < 4; ++k) {
    const int x = g + (k % 2) * (w + g);
    const int y = g + (k / 2) * (h + g);
    cv::Mat roi = panel(cv::Rect(x, y, w, h));
    tiles[k]->copyTo(roi);
    int baseline = 0;
    cv::getTextSize(names[k], cv::FONT_HERSHEY_SIMPLEX, spec.font_scale, 1, &baseline);
    put_label(roi, names[k], {2, h - baseline - 3}, spec.font_scale, cv::Scalar(255, 255, 255),
              cv::Scalar(0, 0, 0));
  }
  return panel;
}

cv::Mat render_radar(const std::vector<std::pair<std::string, EvaluationScores>>& configs) {
  if (configs.empty()) throw InvalidInput("radar chart needs at least one configuration");
  constexpr int kSize = 480, kLegend = 200, kRadius = 170;
  const cv::Point centre(kSize / 2, kSize / 2 + 10);
  cv::Mat img(kSize, kSize + kLegend, CV_8UC3, cv::Scalar(255, 255, 255));
  const char* axes[5] = {"Attention Quality", "Reasoning Confidence", "Medical Terminology",
                         "Clinical Structure", "Explanation Coherence"};
  const double pi = std::acos(-1.0);
  auto point = [&](int axis, double v) {
    const double angle = -pi / 2.0 + 2.0 * pi * axis / 5.0;
    return cv::Point(centre.x + static_cast<int>(std::lround(v * kRadius * std::cos(angle))),
                     centre.y + static_cast<int>(std::lround(v * kRadius * std::sin(angle))));
  };

  const cv::Scalar grid(200, 200, 200);
  for (int ring = 1; ring <= 5; ++ring) {
    std::vector<cv::Point> pts;
    for (int a = 0; a < 5; ++a) pts.push_back(point(a, ring / 5.0));
    cv::polylines(img, pts, true, grid, 1, cv::LINE_8);
  }
  for (int a = 0; a < 5; ++a) {
    cv::line(img, centre, point(a, 1.0), grid, 1, cv::LINE_8);
    const cv::Point tip = point(a, 1.08);
    int baseline = 0;
    const cv::Size ts = cv::getTextSize(axes[a], cv::FONT_HERSHEY_SIMPLEX, 0.4, 1, &baseline);
    const int x = std::clamp(tip.x - ts.width / 2, 2, kSize - ts.width - 2);
    cv::putText(img, axes[a], {x, tip.y + ts.height / 2}, cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60),
                1, cv::LINE_8);
  }

  const cv::Scalar palette[] = {cv::Scalar(180, 119, 31), cv::Scalar(14, 127, 255), cv::Scalar(44, 160, 44),
                                cv::Scalar(40, 39, 214),  cv::Scalar(189, 103, 148), cv::Scalar(75, 86, 140)};
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& s = configs[c].second;
    const double values[5] = {s.attention_quality, s.reasoning_confidence, s.terminology, s.structure,
                              s.coherence};
    std::vector<cv::Point> pts;
    for (int a = 0; a < 5; ++a) pts.push_back(point(a, std::clamp(values[a], 0.0, 1.0)));
    const cv::Scalar color = palette[c % std::size(palette)];
    cv::polylines(img, pts, true, color, 2, cv::LINE_8);
    for (const auto& p : pts) cv::circle(img, p, 3, color, cv::FILLED, cv::LINE_8);

    const int ly = 40 + static_cast<int>(c) * 22;
    cv::rectangle(img, cv::Rect(kSize + 10, ly - 10, 14, 14), color, cv::FILLED, cv::LINE_8);
    cv::putText(img, configs[c].first, {kSize + 30, ly + 2}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
                cv::Scalar(30, 30, 30), 1, cv::LINE_8);
  }
  return img;
}

std::string encode_png(const cv::Mat& image) {
  std::vector<unsigned char> buf;
  if (!cv::imencode(".png", image, buf)) throw InvalidInput("PNG encoding failed");
  return std::string(buf.begin(), buf.end());
}

void write_png(const std::filesystem::path& path, const cv::Mat& image) {
  util::write_file(path, encode_png(image));
}

std::uint64_t image_digest(const cv::Mat& image) {
  std::string header = std::to_string(image.rows) + "x" + std::to_string(image.cols) + "x" +
                       std::to_string(image.channels()) + ":";
  std::uint64_t h = util::fnv1a64(header);
  for (int i = 0; i < image.rows; ++i) {
    const auto* row = image.ptr<char>(i);
    h = util::fnv1a64(std::string_view(row, image.cols * image.elemSize()), h);
  }
  return h;
}

}  // namespace medxplain
