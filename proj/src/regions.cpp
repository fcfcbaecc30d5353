#include "medxplain/regions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "medxplain/error.hpp"
#include "medxplain/kernels.hpp"

namespace medxplain {

void ExtractionParams::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) throw InvalidInput("threshold must lie in (0,1)");
  if (min_area < 1) throw InvalidInput("min_area must be at least 1");
  if (max_regions < 1) throw InvalidInput("max_regions must be at least 1");
  if (!(expansion >= 0.0 && expansion < 1.0)) throw InvalidInput("expansion must lie in [0,1)");
}

Mask threshold_mask(const AttentionHeatmap& hm, double tau) {
  if (!hm.normalized) throw InvalidInput("threshold_mask requires a normalized heatmap");
  return kernels::omp::threshold_strict(hm.values, tau);
}

Labeling label_components(const Mask& mask, Connectivity connectivity) {
  const std::size_t h = mask.height();
  const std::size_t w = mask.width();
  Labeling out{LabelGrid(h, w, 0), 0};
  std::vector<Pixel> stack;

  for (std::size_t r0 = 0; r0 < h; ++r0) {
    for (std::size_t c0 = 0; c0 < w; ++c0) {
      if (!mask(r0, c0) || out.labels(r0, c0) != 0) continue;
      const int label = ++out.count;
      out.labels(r0, c0) = label;
      stack.push_back({r0, c0});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (connectivity == Connectivity::four && dr != 0 && dc != 0) continue;
            if ((dr < 0 && p.row == 0) || (dc < 0 && p.col == 0)) continue;
            const std::size_t r = p.row + static_cast<std::size_t>(static_cast<long>(dr));
            const std::size_t c = p.col + static_cast<std::size_t>(static_cast<long>(dc));
            if (r >= h || c >= w) continue;
            if (mask(r, c) && out.labels(r, c) == 0) {
              out.labels(r, c) = label;
              stack.push_back({r, c});
            }
          }
        }
      }
    }
  }
  return out;
}

double region_score(const AttentionHeatmap& hm, std::span<const Pixel> pixels) {
  if (pixels.empty()) throw InvalidInput("region_score needs a non-empty pixel set");
  double sum = 0.0;
  for (const Pixel& p : pixels) {
    if (p.row >= hm.height() || p.col >= hm.width()) {
      throw InvalidInput("region pixel outside heatmap bounds");
    }
    sum += hm.values(p.row, p.col);
  }
  return sum / static_cast<double>(pixels.size());
}

Box expand_box(const Box& box, double fraction, std::size_t image_width,
               std::size_t image_height) {
  // Half the growth goes on each side; std::round rounds halves away from zero.
  const auto pad_x = static_cast<std::size_t>(std::round(static_cast<double>(box.width) * fraction / 2.0));
  const auto pad_y = static_cast<std::size_t>(std::round(static_cast<double>(box.height) * fraction / 2.0));
  const std::size_t x0 = box.x >= pad_x ? box.x - pad_x : 0;
  const std::size_t y0 = box.y >= pad_y ? box.y - pad_y : 0;
  const std::size_t x1 = std::min(image_width, box.x + box.width + pad_x);
  const std::size_t y1 = std::min(image_height, box.y + box.height + pad_y);
  return Box{x0, y0, x1 - x0, y1 - y0};
}

namespace {

struct Component {
  std::vector<Pixel> pixels;
  std::size_t min_row = 0, max_row = 0, min_col = 0, max_col = 0;
  double score = 0.0;
};

}  // namespace

std::vector<RegionBox> extract_regions(const AttentionHeatmap& hm, const ExtractionParams& params) {
  params.validate();
  const Mask mask = threshold_mask(hm, params.threshold);
  const Labeling lab = label_components(mask, params.connectivity);

  std::vector<Component> comps(static_cast<std::size_t>(lab.count));
  for (std::size_t r = 0; r < lab.labels.height(); ++r) {
    for (std::size_t c = 0; c < lab.labels.width(); ++c) {
      const int l = lab.labels(r, c);
      if (l == 0) continue;
      Component& comp = comps[static_cast<std::size_t>(l - 1)];
      if (comp.pixels.empty()) {
        comp.min_row = comp.max_row = r;
        comp.min_col = comp.max_col = c;
      }
      comp.min_row = std::min(comp.min_row, r);
      comp.max_row = std::max(comp.max_row, r);
      comp.min_col = std::min(comp.min_col, c);
      comp.max_col = std::max(comp.max_col, c);
      comp.pixels.push_back({r, c});
    }
  }

  std::vector<Component> kept;
  for (Component& comp : comps) {
    if (comp.pixels.size() < params.min_area) continue;
    comp.score = region_score(hm, comp.pixels);
    kept.push_back(std::move(comp));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Component& a, const Component& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.min_row != b.min_row) return a.min_row < b.min_row;
    return a.min_col < b.min_col;
  });
  if (kept.size() > params.max_regions) kept.resize(params.max_regions);

  std::vector<RegionBox> out;
  out.reserve(kept.size());
  for (std::size_t n = 0; n < kept.size(); ++n) {
    const Component& comp = kept[n];
    const Box tight{comp.min_col, comp.min_row, comp.max_col - comp.min_col + 1,
                    comp.max_row - comp.min_row + 1};
    const Box grown = expand_box(tight, params.expansion, hm.width(), hm.height());
    out.push_back(RegionBox{grown.x, grown.y, grown.width, grown.height, comp.score,
                            comp.pixels.size(), n + 1});
  }
  return out;
}

}  // namespace medxplain
