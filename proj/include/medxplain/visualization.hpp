#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "medxplain/attention.hpp"
#include "medxplain/evaluation.hpp"
#include "medxplain/regions.hpp"

namespace medxplain {

struct PipelineRecord;

/// Piecewise-linear RGB colour ramp over [0,1].
class Colormap {
 public:
  struct Stop {
    double position;
    std::array<std::uint8_t, 3> rgb;
  };

  /// blue -> cyan -> yellow -> red.
  static Colormap standard();
  /// Text file: one "position r g b" stop per line, `#` comments.
  static Colormap load(const std::filesystem::path& path);

  explicit Colormap(std::vector<Stop> stops);
  std::array<std::uint8_t, 3> rgb(double v) const;

 private:
  std::vector<Stop> stops_;
};

struct OverlaySpec {
  Colormap colormap = Colormap::standard();
  double opacity = 0.45;
  int stroke_width = 1;
  double font_scale = 0.35;
  std::array<std::uint8_t, 3> box_rgb{0, 255, 0};
  int gutter = 8;

  void validate() const;
};

/// Images are 8-bit, three-channel, BGR (OpenCV order).
cv::Mat load_image(const std::filesystem::path& path);

/// Alpha-blends the colour-mapped heatmap over `image`. The heatmap is resized
/// to the image when needed; throws InvalidInput if that does not line up.
cv::Mat render_heatmap_overlay(const cv::Mat& image, const AttentionHeatmap& hm, const OverlaySpec& spec);

/// Strokes each box exactly on its border pixels and labels it "r<rank> <score>".
cv::Mat render_boxes(const cv::Mat& image, const std::vector<RegionBox>& regions, const OverlaySpec& spec);

struct PanelTiles {
  cv::Mat original, boxes, heatmap, integrated;
};

/// The four views of a record; without attention the last three are the
/// original under a "no attention" banner.
PanelTiles render_tiles(const PipelineRecord& record, const OverlaySpec& spec);

/// 2x2 grid: original, boxes, heatmap, boxes over heatmap. Size is
/// (2W + 3g) x (2H + 3g) for gutter g.
cv::Mat render_panel(const PipelineRecord& record, const OverlaySpec& spec);

/// One polygon per configuration over the five evaluation axes, with legend.
cv::Mat render_radar(const std::vector<std::pair<std::string, EvaluationScores>>& configs);

void write_png(const std::filesystem::path& path, const cv::Mat& image);
std::string encode_png(const cv::Mat& image);
/// Hash of dimensions and pixel bytes; stable across PNG encoder versions.
std::uint64_t image_digest(const cv::Mat& image);

}  // namespace medxplain
