#include <algorithm>
#include <cmath>

#include "medxplain/kernels.hpp"

namespace medxplain::kernels::serial {

std::vector<double> channel_means(const Tensor3& t) {
  std::vector<double> out(t.channels(), 0.0);
  const double n = static_cast<double>(t.plane_size());
  for (std::size_t k = 0; k < t.channels(); ++k) {
    double sum = 0.0;
    for (double v : t.channel(k)) sum += v;
    out[k] = sum / n;
  }
  return out;
}

GridD weighted_relu_sum(const Tensor3& t, std::span<const double> weights) {
  GridD out(t.height(), t.width());
  for (std::size_t i = 0; i < t.height(); ++i) {
    for (std::size_t j = 0; j < t.width(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < t.channels(); ++k) acc += weights[k] * t(k, i, j);
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
  for (std::size_t i = 0; i < out_h; ++i) {
    const double fy = std::clamp((static_cast<double>(i) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t j = 0; j < out_w; ++j) {
      const double fx = std::clamp((static_cast<double>(j) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = src(y0, x0) * (1.0 - wx) + src(y0, x1) * wx;
      const double bottom = src(y1, x0) * (1.0 - wx) + src(y1, x1) * wx;
      out(i, j) = top * (1.0 - wy) + bottom * wy;
    }
  }
  return out;
}

void scale_inplace(GridD& g, double factor) {
  for (double& v : g.values()) v *= factor;
}

double max_value(const GridD& g) {
  double m = 0.0;
  bool first = true;
  for (double v : g.values()) {
    if (first || v > m) m = v;
    first = false;
  }
  return m;
}

Mask threshold_strict(const GridD& g, double tau) {
  Mask out(g.height(), g.width());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t n = 0; n < src.size(); ++n) dst[n] = src[n] > tau ? 1 : 0;
  return out;
}

}  // namespace medxplain::kernels::serial
