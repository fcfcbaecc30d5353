#include "doctest.h"

#include <map>
#include <random>
#include <set>

#include "medxplain/error.hpp"
#include "medxplain/regions.hpp"
#include "support/oracles.hpp"

using namespace medxplain;

namespace {

AttentionHeatmap make(const GridD& g) {
  AttentionHeatmap hm;
  hm.values = g;
  hm.normalized = true;
  return hm;
}

void plateau(GridD& g, std::size_t r, std::size_t c, std::size_t h, std::size_t w, double v) {
  for (std::size_t i = r; i < r + h; ++i) {
    for (std::size_t j = c; j < c + w; ++j) g(i, j) = v;
  }
}

using PixelSet = std::set<std::pair<std::size_t, std::size_t>>;

std::set<PixelSet> label_sets(const Labeling& lab) {
  std::map<int, PixelSet> by_label;
  for (std::size_t r = 0; r < lab.labels.height(); ++r) {
    for (std::size_t c = 0; c < lab.labels.width(); ++c) {
      if (lab.labels(r, c) != 0) by_label[lab.labels(r, c)].insert({r, c});
    }
  }
  std::set<PixelSet> out;
  for (auto& [l, s] : by_label) out.insert(s);
  return out;
}

}  // namespace

TEST_CASE("threshold mask is strict and needs a normalized map") {
  GridD g(1, 3, std::vector<double>{0.25, 0.26, 1.0});
  const Mask m = threshold_mask(make(g), 0.25);
  CHECK(m(0, 0) == 0);
  CHECK(m(0, 1) == 1);
  CHECK(m(0, 2) == 1);
  AttentionHeatmap raw;
  raw.values = g;
  CHECK_THROWS_AS(threshold_mask(raw, 0.25), InvalidInput);
  const Mask full = threshold_mask(make(GridD(4, 4, 1.0)), 0.25);
  for (auto v : full.values()) CHECK(v == 1);
}

TEST_CASE("connectivity decides whether diagonal neighbours join") {
  Mask m(2, 2, 0);
  m(0, 0) = 1;
  m(1, 1) = 1;
  CHECK(label_components(m, Connectivity::four).count == 2);
  CHECK(label_components(m, Connectivity::eight).count == 1);
  CHECK(label_components(Mask(3, 3, 0), Connectivity::four).count == 0);
}

TEST_CASE("labels follow raster order from 1") {
  Mask m(3, 4, 0);
  m(0, 3) = 1;
  m(2, 0) = 1;
  const Labeling lab = label_components(m, Connectivity::four);
  CHECK(lab.count == 2);
  CHECK(lab.labels(0, 3) == 1);
  CHECK(lab.labels(2, 0) == 2);
}

TEST_CASE("labeling matches flood fill on random masks") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    const GridD g = oracle::random_heatmap(rng, 8, 8, false);
    for (bool eight : {false, true}) {
      const Labeling lab = label_components(threshold_mask(make(g), 0.5),
                                            eight ? Connectivity::eight : Connectivity::four);
      std::set<PixelSet> want;
      for (const auto& c : oracle::components(g, 0.5, eight)) want.insert(c.pixels);
      REQUIRE(label_sets(lab) == want);
      REQUIRE(lab.count == static_cast<int>(want.size()));
    }
  }
}

TEST_CASE("region score is the mean over the pixel set") {
  GridD g(2, 2, std::vector<double>{0.4, 0.6, 0.8, 1.0});
  const std::vector<Pixel> all{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  CHECK(region_score(make(g), all) == doctest::Approx(0.7));
  const std::vector<Pixel> one{{1, 0}};
  CHECK(region_score(make(g), one) == doctest::Approx(0.8));
  CHECK_THROWS_AS(region_score(make(g), std::vector<Pixel>{}), InvalidInput);
  CHECK_THROWS_AS(region_score(make(g), std::vector<Pixel>{{5, 5}}), InvalidInput);
}

TEST_CASE("box expansion") {
  CHECK(expand_box({100, 100, 50, 50}, 0.12, 224, 224) == Box{97, 97, 56, 56});
  CHECK(expand_box({10, 20, 30, 40}, 0.0, 224, 224) == Box{10, 20, 30, 40});
  // flush against the origin: growth only toward the interior
  CHECK(expand_box({0, 0, 50, 50}, 0.12, 224, 224) == Box{0, 0, 53, 53});
  CHECK(expand_box({200, 200, 24, 24}, 0.5, 224, 224) == Box{194, 194, 30, 30});
  // half-pixel padding rounds away from zero: 25 * 0.12 / 2 = 1.5 -> 2
  CHECK(expand_box({50, 50, 25, 25}, 0.12, 224, 224) == Box{48, 48, 29, 29});
}

TEST_CASE("extraction on hand-built fixtures") {
  CHECK(extract_regions(make(GridD(16, 16, 0.0)), {}).empty());

  GridD two(16, 16, 0.0);
  plateau(two, 1, 1, 3, 3, 0.9);    // area 9
  plateau(two, 10, 8, 3, 4, 0.5);   // area 12
  two(15, 15) = 1.0;                // peak, area 1: filtered by min_area
  const auto r = extract_regions(make(two), {});
  REQUIRE(r.size() == 2);
  CHECK(r[0].score == doctest::Approx(0.9));
  CHECK(r[0].rank == 1);
  CHECK(r[0].area_px == 9);
  CHECK(r[1].score == doctest::Approx(0.5));
  CHECK(r[1].area_px == 12);
  CHECK(r[1].rank == 2);

  GridD seven(32, 32, 0.0);
  for (std::size_t b = 0; b < 7; ++b) plateau(seven, 1 + 4 * b, 1 + 4 * b, 3, 3, 0.3 + 0.1 * static_cast<double>(b));
  const auto top = extract_regions(make(seven), {});
  REQUIRE(top.size() == 5);
  CHECK(top[0].score == doctest::Approx(0.9));
  CHECK(top[4].score == doctest::Approx(0.5));
}

TEST_CASE("equal scores are ordered by top-left row then column") {
  GridD g(12, 12, 0.0);
  plateau(g, 6, 0, 2, 3, 0.8);
  plateau(g, 0, 7, 2, 3, 0.8);
  plateau(g, 0, 1, 2, 3, 0.8);
  const auto r = extract_regions(make(g), {});
  REQUIRE(r.size() == 3);
  CHECK(r[0].y == 0);
  CHECK(r[0].x == 1);
  CHECK(r[1].y == 0);
  CHECK(r[1].x == 7);
  CHECK(r[2].y == 6);
}

TEST_CASE("invalid params are rejected") {
  const AttentionHeatmap hm = make(GridD(4, 4, 0.5));
  ExtractionParams p;
  p.threshold = 1.0;
  CHECK_THROWS_AS(extract_regions(hm, p), InvalidInput);
  p = {};
  p.min_area = 0;
  CHECK_THROWS_AS(extract_regions(hm, p), InvalidInput);
  p = {};
  p.max_regions = 0;
  CHECK_THROWS_AS(extract_regions(hm, p), InvalidInput);
  p = {};
  p.expansion = 1.0;
  CHECK_THROWS_AS(extract_regions(hm, p), InvalidInput);
}

TEST_CASE("extraction properties and oracle agreement on random heatmaps") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 20);
  for (int trial = 0; trial < 300; ++trial) {
    const GridD g = oracle::random_blobs(rng, dim(rng), dim(rng), trial % 2 == 0);
    const AttentionHeatmap hm = make(g);
    for (bool eight : {false, true}) {
      ExtractionParams p;
      p.connectivity = eight ? Connectivity::eight : Connectivity::four;
      const auto got = extract_regions(hm, p);
      const auto want = oracle::extract(g, 0.25, 6, 5, 0.12, eight);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        REQUIRE(got[i].x == want[i].x);
        REQUIRE(got[i].y == want[i].y);
        REQUIRE(got[i].width == want[i].w);
        REQUIRE(got[i].height == want[i].h);
        REQUIRE(got[i].area_px == want[i].area);
        REQUIRE(got[i].score == want[i].score);
        REQUIRE(got[i].rank == i + 1);
        REQUIRE(got[i].x + got[i].width <= g.width());
        REQUIRE(got[i].y + got[i].height <= g.height());
        REQUIRE(got[i].score > 0.0);
        REQUIRE(got[i].score <= 1.0);
        if (i > 0) REQUIRE(got[i].score <= got[i - 1].score);
      }
      // positive rescaling before normalisation changes nothing (a power of two
      // keeps the comparison exact, so ties cannot reorder)
      GridD scaled = g;
      for (double& v : scaled.values()) v *= 4.0;
      const auto again = extract_regions(normalize_heatmap(scaled), p);
      REQUIRE(again.size() == got.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        REQUIRE(again[i].x == got[i].x);
        REQUIRE(again[i].y == got[i].y);
        REQUIRE(again[i].area_px == got[i].area_px);
        REQUIRE(again[i].score == doctest::Approx(got[i].score).epsilon(1e-12));
      }
      REQUIRE(extract_regions(hm, p) == got);
    }
  }
}
