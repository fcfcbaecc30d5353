#include "medxplain/attention.hpp"

#include <algorithm>
#include <cmath>

#include "medxplain/error.hpp"
#include "medxplain/kernels.hpp"

namespace medxplain {

std::string_view to_string(HeatmapSource s) {
  switch (s) {
    case HeatmapSource::enhanced_gradcam: return "enhanced_gradcam";
    case HeatmapSource::basic_gradcam: return "basic_gradcam";
    case HeatmapSource::none: return "none";
  }
  return "none";
}

HeatmapSource heatmap_source_from_string(std::string_view s) {
  if (s == "enhanced_gradcam") return HeatmapSource::enhanced_gradcam;
  if (s == "basic_gradcam") return HeatmapSource::basic_gradcam;
  if (s == "none") return HeatmapSource::none;
  throw InvalidInput("unknown heatmap source: " + std::string(s));
}

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " contains non-finite values");
  }
}

GridD resize_raw(const GridD& raw, std::size_t h, std::size_t w) {
  if (h == 0 || w == 0) throw InvalidInput("upsample target dimensions must be positive");
  if (raw.height() == h && raw.width() == w) return raw;
  return kernels::omp::bilinear_resize(raw, h, w);
}

}  // namespace

std::vector<double> compute_channel_weights(const GradientStack& gradients) {
  if (gradients.degenerate()) throw InvalidInput("gradient stack has a zero dimension");
  require_finite(gradients.values(), "gradient stack");
  return kernels::omp::channel_means(gradients);
}

GridD compute_cam(const FeatureStack& features, const std::vector<double>& weights) {
  if (features.degenerate()) throw InvalidInput("feature stack has a zero dimension");
  if (weights.size() != features.channels()) {
    throw InvalidInput("weight count " + std::to_string(weights.size()) +
                       " does not match channel count " + std::to_string(features.channels()));
  }
  require_finite(features.values(), "feature stack");
  require_finite(weights, "channel weights");
  return kernels::omp::weighted_relu_sum(features, weights);
}

AttentionHeatmap normalize_heatmap(const GridD& raw) {
  for (double v : raw.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput("raw heatmap must be finite and non-negative");
    }
  }
  AttentionHeatmap hm;
  hm.values = raw;
  hm.normalized = true;
  const double peak = kernels::omp::max_value(raw);
  if (peak > 0.0) {
    kernels::omp::scale_inplace(hm.values, 1.0 / peak);
    // Multiplying by the reciprocal can leave values a ulp away from 1.
    const auto src = raw.values();
    auto dst = hm.values.values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] == peak ? 1.0 : std::min(dst[i], 1.0);
  }
  return hm;
}

AttentionHeatmap upsample_heatmap(const AttentionHeatmap& hm, std::size_t target_height,
                                  std::size_t target_width) {
  AttentionHeatmap out = hm;
  out.values = resize_raw(hm.values, target_height, target_width);
  if (hm.normalized) {
    for (double& v : out.values.values()) v = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

AttentionHeatmap gradcam(const FeatureStack& features, const GradientStack& gradients,
                         std::size_t target_height, std::size_t target_width,
                         std::string target_layer) {
  if (!features.same_shape(gradients)) {
    throw InvalidInput("feature and gradient stacks differ in shape");
  }
  const auto weights = compute_channel_weights(gradients);
  const GridD cam = compute_cam(features, weights);
  AttentionHeatmap hm = normalize_heatmap(resize_raw(cam, target_height, target_width));
  hm.source = HeatmapSource::enhanced_gradcam;
  hm.target_layer = std::move(target_layer);
  return hm;
}

AttentionHeatmap heatmap_from_backend(const GridD& grid, std::size_t target_height,
                                      std::size_t target_width, std::string target_layer) {
  if (grid.empty()) throw InvalidInput("backend heatmap is empty");
  for (double v : grid.values()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw InvalidInput("backend heatmap values must lie in [0,1]");
    }
  }
  // Re-normalise so the max-equals-one invariant holds regardless of the server.
  AttentionHeatmap hm = normalize_heatmap(resize_raw(grid, target_height, target_width));
  hm.source = HeatmapSource::basic_gradcam;
  hm.target_layer = std::move(target_layer);
  return hm;
}

}  // namespace medxplain
