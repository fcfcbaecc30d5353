#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "medxplain/attention.hpp"
#include "medxplain/grid.hpp"

namespace medxplain {

enum class Connectivity { four, eight };

struct ExtractionParams {
  double threshold = 0.25;
  std::size_t min_area = 6;
  std::size_t max_regions = 5;
  double expansion = 0.12;
  Connectivity connectivity = Connectivity::four;

  /// Throws InvalidInput when any field is out of range.
  void validate() const;
};

struct Pixel {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Pixel&) const = default;
};

struct Box {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 1;
  std::size_t height = 1;
  bool operator==(const Box&) const = default;
};

struct RegionBox {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t width = 1;
  std::size_t height = 1;
  double score = 0.0;
  std::size_t area_px = 0;
  std::size_t rank = 0;

  bool operator==(const RegionBox&) const = default;
};

struct Labeling {
  LabelGrid labels;  // 0 = background, components numbered 1..count in raster order
  int count = 0;
};

Mask threshold_mask(const AttentionHeatmap& hm, double tau);
Labeling label_components(const Mask& mask, Connectivity connectivity);
double region_score(const AttentionHeatmap& hm, std::span<const Pixel> pixels);
Box expand_box(const Box& box, double fraction, std::size_t image_width, std::size_t image_height);
std::vector<RegionBox> extract_regions(const AttentionHeatmap& hm, const ExtractionParams& params);

}  // namespace medxplain
