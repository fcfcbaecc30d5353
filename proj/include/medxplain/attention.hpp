#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medxplain/grid.hpp"

namespace medxplain {

enum class HeatmapSource { enhanced_gradcam, basic_gradcam, none };

std::string_view to_string(HeatmapSource s);
HeatmapSource heatmap_source_from_string(std::string_view s);

/// Saliency grid. When `normalized` is set every value is in [0,1] and the
/// maximum is exactly 1 unless the whole grid is zero.
struct AttentionHeatmap {
  GridD values;
  bool normalized = false;
  HeatmapSource source = HeatmapSource::none;
  std::string target_layer;

  std::size_t height() const noexcept { return values.height(); }
  std::size_t width() const noexcept { return values.width(); }
};

/// Global-average-pooled gradients, one weight per channel.
std::vector<double> compute_channel_weights(const GradientStack& gradients);

/// ReLU of the channel sum weighted by `weights`.
GridD compute_cam(const FeatureStack& features, const std::vector<double>& weights);

/// Divides by the grid maximum. An all-zero grid stays all-zero but is still
/// flagged as normalized so degenerate attention can flow downstream.
AttentionHeatmap normalize_heatmap(const GridD& raw);

/// Bilinear resize (half-pixel centres, edge clamped) of a heatmap; values are
/// re-clamped to [0,1] when the input is normalized.
AttentionHeatmap upsample_heatmap(const AttentionHeatmap& hm, std::size_t target_height,
                                  std::size_t target_width);

/// Full Grad-CAM reduction: weights, weighted ReLU sum, resize to the target
/// resolution and normalise. Result source is `enhanced_gradcam`.
AttentionHeatmap gradcam(const FeatureStack& features, const GradientStack& gradients,
                         std::size_t target_height, std::size_t target_width,
                         std::string target_layer = {});

/// Validates a pre-reduced heatmap coming straight from a backend and brings it
/// to target resolution. Source is `basic_gradcam`.
AttentionHeatmap heatmap_from_backend(const GridD& grid, std::size_t target_height,
                                      std::size_t target_width, std::string target_layer = {});

}  // namespace medxplain
