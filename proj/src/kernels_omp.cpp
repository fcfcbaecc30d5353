#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "medxplain/kernels.hpp"

namespace medxplain::kernels::omp {

namespace {
// Below this many cells the thread fork costs more than the loop.
constexpr std::int64_t kParallelCells = 4096;
}  // namespace

std::vector<double> channel_means(const Tensor3& t) {
  const auto channels = static_cast<std::int64_t>(t.channels());
  const auto plane = static_cast<std::int64_t>(t.plane_size());
  std::vector<double> out(t.channels(), 0.0);
  auto values = t.values();
  const double n = static_cast<double>(plane);
#pragma omp parallel for schedule(static) if (channels * plane >= kParallelCells)
  for (std::int64_t k = 0; k < channels; ++k) {
    const double* p = values.data() + k * plane;
    double sum = 0.0;
    for (std::int64_t c = 0; c < plane; ++c) sum += p[c];
    out[static_cast<std::size_t>(k)] = sum / n;
  }
  return out;
}

GridD weighted_relu_sum(const Tensor3& t, std::span<const double> weights) {
  const auto rows = static_cast<std::int64_t>(t.height());
  const std::size_t cols = t.width();
  const std::size_t channels = t.channels();
  GridD out(t.height(), t.width());
#pragma omp parallel for schedule(static) \
    if (static_cast<std::int64_t>(t.plane_size() * channels) >= kParallelCells)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto i = static_cast<std::size_t>(r);
    for (std::size_t j = 0; j < cols; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < channels; ++k) acc += weights[k] * t(k, i, j);
      out(i, j) = acc > 0.0 ? acc : 0.0;
    }
  }
  return out;
}

GridD bilinear_resize(const GridD& src, std::size_t out_h, std::size_t out_w) {
  GridD out(out_h, out_w);
  const double sy = static_cast<double>(src.height()) / static_cast<double>(out_h);
  const double sx = static_cast<double>(src.width()) / static_cast<double>(out_w);
  const double max_y = static_cast<double>(src.height() - 1);
  const double max_x = static_cast<double>(src.width() - 1);

  // Column taps are shared by every output row.
  std::vector<std::size_t> x0s(out_w), x1s(out_w);
  std::vector<double> wxs(out_w);
  for (std::size_t j = 0; j < out_w; ++j) {
    const double fx = std::clamp((static_cast<double>(j) + 0.5) * sx - 0.5, 0.0, max_x);
    x0s[j] = static_cast<std::size_t>(fx);
    x1s[j] = std::min(x0s[j] + 1, src.width() - 1);
    wxs[j] = fx - static_cast<double>(x0s[j]);
  }

  const auto rows = static_cast<std::int64_t>(out_h);
#pragma omp parallel for schedule(static) \
    if (static_cast<std::int64_t>(out_h * out_w) >= kParallelCells)
  for (std::int64_t r = 0; r < rows; ++r) {
    const auto i = static_cast<std::size_t>(r);
    const double fy = std::clamp((static_cast<double>(i) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t j = 0; j < out_w; ++j) {
      const double wx = wxs[j];
      const double top = src(y0, x0s[j]) * (1.0 - wx) + src(y0, x1s[j]) * wx;
      const double bottom = src(y1, x0s[j]) * (1.0 - wx) + src(y1, x1s[j]) * wx;
      out(i, j) = top * (1.0 - wy) + bottom * wy;
    }
  }
  return out;
}

void scale_inplace(GridD& g, double factor) {
  auto v = g.values();
  const auto n = static_cast<std::int64_t>(v.size());
#pragma omp parallel for schedule(static) if (n >= kParallelCells)
  for (std::int64_t c = 0; c < n; ++c) v[static_cast<std::size_t>(c)] *= factor;
}

double max_value(const GridD& g) {
  auto v = g.values();
  if (v.empty()) return 0.0;
  const auto n = static_cast<std::int64_t>(v.size());
  double m = -std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(max : m) if (n >= kParallelCells)
  for (std::int64_t c = 0; c < n; ++c) m = std::max(m, v[static_cast<std::size_t>(c)]);
  return m;
}

Mask threshold_strict(const GridD& g, double tau) {
  Mask out(g.height(), g.width());
  auto src = g.values();
  auto dst = out.values();
  const auto n = static_cast<std::int64_t>(src.size());
#pragma omp parallel for schedule(static) if (n >= kParallelCells)
  for (std::int64_t c = 0; c < n; ++c) {
    const auto s = static_cast<std::size_t>(c);
    dst[s] = src[s] > tau ? 1 : 0;
  }
  return out;
}

}  // namespace medxplain::kernels::omp
