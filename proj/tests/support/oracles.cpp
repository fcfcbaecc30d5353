#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

GridD gradcam_cam(const medxplain::Tensor3& f, const medxplain::Tensor3& g) {
  const std::size_t K = f.channels(), H = f.height(), W = f.width();
  std::vector<double> alpha(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < H; ++i) {
      for (std::size_t j = 0; j < W; ++j) s += g(k, i, j);
    }
    alpha[k] = static_cast<double>(s / static_cast<long double>(H * W));
  }
  GridD cam(H, W);
  for (std::size_t i = 0; i < H; ++i) {
    for (std::size_t j = 0; j < W; ++j) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < K; ++k) s += static_cast<long double>(alpha[k]) * f(k, i, j);
      cam(i, j) = s > 0.0L ? static_cast<double>(s) : 0.0;
    }
  }
  return cam;
}

GridD bilinear(const GridD& src, std::size_t out_h, std::size_t out_w) {
  const double H = static_cast<double>(src.height()), W = static_cast<double>(src.width());
  GridD out(out_h, out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    double sy = (static_cast<double>(i) + 0.5) * H / static_cast<double>(out_h) - 0.5;
    sy = std::clamp(sy, 0.0, H - 1.0);
    const auto y0 = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y1 = std::min(y0 + 1, src.height() - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t j = 0; j < out_w; ++j) {
      double sx = (static_cast<double>(j) + 0.5) * W / static_cast<double>(out_w) - 0.5;
      sx = std::clamp(sx, 0.0, W - 1.0);
      const auto x0 = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x1 = std::min(x0 + 1, src.width() - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = src(y0, x0) * (1.0 - fx) + src(y0, x1) * fx;
      const double bottom = src(y1, x0) * (1.0 - fx) + src(y1, x1) * fx;
      out(i, j) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

GridD normalize(const GridD& g) {
  double mx = 0.0;
  for (double v : g.values()) mx = std::max(mx, v);
  GridD out = g;
  if (mx <= 0.0) return out;
  for (double& v : out.values()) v /= mx;
  return out;
}

std::vector<Component> components(const GridD& hm, double tau, bool eight) {
  const std::size_t H = hm.height(), W = hm.width();
  std::vector<std::vector<bool>> seen(H, std::vector<bool>(W, false));
  std::vector<Component> out;
  std::function<void(long, long, Component&)> fill = [&](long r, long c, Component& comp) {
    if (r < 0 || c < 0 || r >= static_cast<long>(H) || c >= static_cast<long>(W)) return;
    const auto ur = static_cast<std::size_t>(r), uc = static_cast<std::size_t>(c);
    if (seen[ur][uc] || !(hm(ur, uc) > tau)) return;
    seen[ur][uc] = true;
    comp.pixels.insert({ur, uc});
    for (long dr = -1; dr <= 1; ++dr) {
      for (long dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        if (!eight && dr != 0 && dc != 0) continue;
        fill(r + dr, c + dc, comp);
      }
    }
  };
  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      if (seen[r][c] || !(hm(r, c) > tau)) continue;
      Component comp;
      fill(static_cast<long>(r), static_cast<long>(c), comp);
      comp.first_row = r;
      comp.first_col = c;
      comp.min_row = comp.min_col = static_cast<std::size_t>(-1);
      double sum = 0.0;
      for (const auto& [pr, pc] : comp.pixels) {
        comp.min_row = std::min(comp.min_row, pr);
        comp.max_row = std::max(comp.max_row, pr);
        comp.min_col = std::min(comp.min_col, pc);
        comp.max_col = std::max(comp.max_col, pc);
        sum += hm(pr, pc);
      }
      comp.score = sum / static_cast<double>(comp.pixels.size());
      out.push_back(std::move(comp));
    }
  }
  return out;
}

namespace {

// True when a ranks strictly before b.
bool better(const Component& a, const Component& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.min_row != b.min_row) return a.min_row < b.min_row;
  if (a.min_col != b.min_col) return a.min_col < b.min_col;
  if (a.first_row != b.first_row) return a.first_row < b.first_row;
  return a.first_col < b.first_col;
}

}  // namespace

std::vector<Region> extract(const GridD& hm, double tau, std::size_t min_area, std::size_t max_regions,
                            double expansion, bool eight) {
  std::vector<Component> pool;
  for (auto& c : components(hm, tau, eight)) {
    if (c.pixels.size() >= min_area) pool.push_back(std::move(c));
  }
  std::vector<Region> out;
  while (!pool.empty() && out.size() < max_regions) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (better(pool[i], pool[best])) best = i;
    }
    const Component& c = pool[best];
    const long w = static_cast<long>(c.max_col - c.min_col + 1);
    const long h = static_cast<long>(c.max_row - c.min_row + 1);
    const long px = std::lround(static_cast<double>(w) * expansion / 2.0);
    const long py = std::lround(static_cast<double>(h) * expansion / 2.0);
    const long x0 = std::max(0L, static_cast<long>(c.min_col) - px);
    const long y0 = std::max(0L, static_cast<long>(c.min_row) - py);
    const long x1 = std::min(static_cast<long>(hm.width()), static_cast<long>(c.max_col) + 1 + px);
    const long y1 = std::min(static_cast<long>(hm.height()), static_cast<long>(c.max_row) + 1 + py);
    out.push_back({static_cast<std::size_t>(x0), static_cast<std::size_t>(y0),
                   static_cast<std::size_t>(x1 - x0), static_cast<std::size_t>(y1 - y0), c.score,
                   c.pixels.size()});
    pool.erase(pool.begin() + static_cast<long>(best));
  }
  return out;
}

double harmonic(const std::vector<double>& c, const std::vector<double>& w) {
  double sw = 0.0, inv = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    sw += w[i];
    inv += w[i] / c[i];
  }
  return sw / inv;
}

TwoSample two_sample(const std::vector<double>& a, const std::vector<double>& b, bool welch) {
  const auto n1 = static_cast<long double>(a.size()), n2 = static_cast<long double>(b.size());
  long double m1 = 0, m2 = 0;
  for (double v : a) m1 += v;
  for (double v : b) m2 += v;
  m1 /= n1;
  m2 /= n2;
  long double ss1 = 0, ss2 = 0;
  for (double v : a) ss1 += (v - m1) * (v - m1);
  for (double v : b) ss2 += (v - m2) * (v - m2);
  const long double v1 = ss1 / (n1 - 1), v2 = ss2 / (n2 - 1);
  const long double pooled = (ss1 + ss2) / (n1 + n2 - 2);
  TwoSample r;
  r.diff = static_cast<double>(m1 - m2);
  r.d = static_cast<double>((m1 - m2) / std::sqrt(pooled));
  if (welch) {
    const long double q1 = v1 / n1, q2 = v2 / n2;
    r.se = static_cast<double>(std::sqrt(q1 + q2));
    r.df = static_cast<double>((q1 + q2) * (q1 + q2) / (q1 * q1 / (n1 - 1) + q2 * q2 / (n2 - 1)));
  } else {
    r.se = static_cast<double>(std::sqrt(pooled * (1 / n1 + 1 / n2)));
    r.df = static_cast<double>(n1 + n2 - 2);
  }
  r.t = r.diff / r.se;
  return r;
}

GridD random_heatmap(std::mt19937_64& rng, std::size_t h, std::size_t w, bool quantized) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> q(0, 16);
  GridD g(h, w);
  for (double& v : g.values()) v = quantized ? q(rng) / 16.0 : u(rng);
  return g;
}

GridD random_blobs(std::mt19937_64& rng, std::size_t h, std::size_t w, bool quantized) {
  std::uniform_real_distribution<double> base(0.0, 0.3), level(0.2, 1.0);
  std::uniform_int_distribution<int> q(3, 16), count(0, 9);
  GridD g(h, w);
  for (double& v : g.values()) v = quantized ? std::floor(base(rng) * 16.0) / 16.0 : base(rng);
  const int blobs = count(rng);
  for (int b = 0; b < blobs; ++b) {
    std::uniform_int_distribution<std::size_t> r0(0, h - 1), c0(0, w - 1), ext(1, 6);
    const std::size_t r = r0(rng), c = c0(rng);
    const std::size_t bh = ext(rng), bw = ext(rng);
    const double v = quantized ? q(rng) / 16.0 : level(rng);
    for (std::size_t i = r; i < std::min(h, r + bh); ++i) {
      for (std::size_t j = c; j < std::min(w, c + bw); ++j) g(i, j) = std::max(g(i, j), v);
    }
  }
  return normalize(g);
}

}  // namespace oracle
