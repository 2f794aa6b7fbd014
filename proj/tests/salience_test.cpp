#include <gtest/gtest.h>

#include <set>
#include <utility>
#include <vector>

#include "tacoma/forest.hpp"
#include "tacoma/glcm.hpp"
#include "tacoma/mask.hpp"
#include "tacoma/rng.hpp"
#include "tacoma/salience.hpp"

namespace tacoma {
namespace {

QuantizedImage hand_image() { return QuantizedImage::from_rows({{1, 2, 3}, {2, 3, 3}, {3, 1, 2}}, 3); }

QuantizedImage random_image(Rng& rng, int w, int h, int levels) {
  QuantizedImage im(w, h, levels, 1);
  for (auto& v : im.pixels) v = static_cast<std::uint16_t>(rng.integer(1, levels));
  return im;
}

using Positions = std::vector<std::pair<int, int>>;

TEST(SalientPixels, EmptyFeatureList) {
  const auto map = salient_pixels(hand_image(), {Direction::E, 1}, {});
  EXPECT_EQ(map.count(), 0u);
  EXPECT_EQ(map.width, 3);
  EXPECT_EQ(map.height, 3);
}

TEST(SalientPixels, ConstantImageFlagsEveryPairedPixel) {
  QuantizedImage im(6, 5, 4, 3);
  EXPECT_EQ(salient_pixels(im, {Direction::E, 1}, {{3, 3}}).count(), 30u);
  // Distance 4 east: only columns 0,1 (sources) and 4,5 (targets) take part.
  const auto far = salient_pixels(im, {Direction::E, 4}, {{3, 3}});
  EXPECT_EQ(far.count(), 20u);
  for (int y = 0; y < 5; ++y) {
    EXPECT_FALSE(far.flagged(2, y));
    EXPECT_FALSE(far.flagged(3, y));
  }
  EXPECT_EQ(salient_pixels(im, {Direction::E, 6}, {{3, 3}}).count(), 0u);
}

TEST(SalientPixels, HandImageEast) {
  const auto map = salient_pixels(hand_image(), {Direction::E, 1}, {{2, 3}});
  // Pairs (1,0)->(2,0) and (0,1)->(1,1), 0-based (x, y).
  EXPECT_EQ(map.positions(), (Positions{{1, 0}, {2, 0}, {0, 1}, {1, 1}}));
  EXPECT_EQ(coordinates_text(map), "1 0\n2 0\n0 1\n1 1\n");
}

TEST(SalientPixels, RejectsOutOfRangeFeature) {
  EXPECT_THROW(salient_pixels(hand_image(), {Direction::E, 1}, {{0, 1}}), ArgumentError);
  EXPECT_THROW(salient_pixels(hand_image(), {Direction::E, 1}, {{1, 4}}), ArgumentError);
}

TEST(SalientPixels, UnionOfFeatureSets) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto im = random_image(rng, 12, 9, 4);
    const SpatialRelationship rel{kAllDirections[static_cast<std::size_t>(rng.index(8))], rng.integer(1, 3)};
    std::vector<std::pair<int, int>> f1, f2;
    for (int k = 0; k < 3; ++k) f1.emplace_back(rng.integer(1, 4), rng.integer(1, 4));
    for (int k = 0; k < 3; ++k) f2.emplace_back(rng.integer(1, 4), rng.integer(1, 4));
    auto both = f1;
    both.insert(both.end(), f2.begin(), f2.end());
    const auto a = salient_pixels(im, rel, f1);
    const auto b = salient_pixels(im, rel, f2);
    const auto u = salient_pixels(im, rel, both);
    for (std::size_t i = 0; i < u.flags.size(); ++i) EXPECT_EQ(u.flags[i], a.flags[i] | b.flags[i]);
  }
}

TEST(SalientPixels, CountBoundedByTwiceThePairs) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto im = random_image(rng, 10, 10, 5);
    const SpatialRelationship rel{kAllDirections[static_cast<std::size_t>(rng.index(8))], rng.integer(1, 2)};
    const auto g = compute_glcm(im, rel);
    std::set<std::pair<int, int>> fs;
    for (int k = 0; k < 4; ++k) fs.emplace(rng.integer(1, 5), rng.integer(1, 5));
    std::int64_t pairs = 0;
    for (const auto& [a, b] : fs) pairs += g.at(a, b);
    const auto map = salient_pixels(im, rel, {fs.begin(), fs.end()});
    EXPECT_LE(static_cast<std::int64_t>(map.count()), 2 * pairs);
  }
  // Two disjoint pairs: equality.
  const auto im = QuantizedImage::from_rows({{1, 2, 3, 3}}, 3);
  const auto map = salient_pixels(im, {Direction::E, 2}, {{1, 3}, {2, 3}});
  EXPECT_EQ(map.count(), 4u);
}

struct Fixture {
  std::vector<QuantizedImage> images;
  FeatureMask mask;
  Forest forest;
  SpatialRelationship rel{Direction::E, 1};
};

// Class 1 images contain a two-row band of level 4; class 0 never does.
Fixture planted() {
  Fixture fx;
  Rng rng(12);
  Dataset d;
  d.classes = 2;
  for (int i = 0; i < 40; ++i) {
    auto im = random_image(rng, 12, 12, 3);
    im.levels = 4;
    if (i % 2) {
      const int y = rng.integer(0, 10);
      for (int x = 0; x < 24; ++x) im.pixels[static_cast<std::size_t>(y) * 12 + x] = 4;
    }
    fx.images.push_back(im);
  }
  fx.mask = build_mask(std::span<const QuantizedImage>(fx.images.data() + 1, 1), fx.rel);
  for (std::size_t i = 0; i < fx.images.size(); ++i) {
    d.features.push_row(apply_mask(compute_glcm(fx.images[i], fx.rel), fx.mask).values);
    d.labels.push_back(static_cast<int>(i % 2));
  }
  fx.forest = train_forest(d, {50, 0, 2});
  return fx;
}

TEST(TopSalient, TopFeatureIsThePlantedTransition) {
  const auto fx = planted();
  const auto top = top_features(fx.forest, fx.mask, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0], (std::pair<int, int>{4, 4}));
  const auto& im = fx.images[1];
  const auto map = top_salient(im, fx.rel, fx.forest, fx.mask, 1);
  EXPECT_EQ(map.flags, salient_pixels(im, fx.rel, top).flags);
  EXPECT_EQ(map.count(), 24u);
  EXPECT_EQ(top_salient(fx.images[0], fx.rel, fx.forest, fx.mask, 1).count(), 0u);
}

TEST(TopSalient, ExhaustionAndClamping) {
  const auto fx = planted();
  const auto& im = fx.images[3];
  const auto all = salient_pixels(im, fx.rel, fx.mask.indices);
  const auto full = top_salient(im, fx.rel, fx.forest, fx.mask, fx.mask.size());
  EXPECT_EQ(full.flags, all.flags);
  const auto clamped = top_salient(im, fx.rel, fx.forest, fx.mask, fx.mask.size() + 10);
  EXPECT_EQ(clamped.flags, all.flags);
  EXPECT_EQ(clamped.requested, fx.mask.size() + 10);
  EXPECT_EQ(clamped.source_features.size(), fx.mask.size());
  EXPECT_THROW(top_salient(im, fx.rel, fx.forest, fx.mask, 0), ArgumentError);
}

TEST(TopFeatures, RespectsBlockOffset) {
  const auto fx = planted();
  EXPECT_THROW(top_features(fx.forest, fx.mask, 3, 1), ArgumentError);
  const auto f = top_features(fx.forest, fx.mask, fx.mask.size(), 0);
  using Set = std::set<std::pair<int, int>>;
  EXPECT_EQ(Set(f.begin(), f.end()), Set(fx.mask.indices.begin(), fx.mask.indices.end()));
}

TEST(RenderOverlay, EmptyFullAndIdempotent) {
  GrayImage im(4, 3, 7);
  im.pixels[5] = 200;
  SalienceMap none(4, 3);
  EXPECT_EQ(render_overlay(im, none).pixels, im.pixels);
  SalienceMap all(4, 3);
  std::fill(all.flags.begin(), all.flags.end(), 1);
  for (auto v : render_overlay(im, all).pixels) EXPECT_EQ(v, 255);
  SalienceMap some(4, 3);
  some.flags[1] = some.flags[5] = 1;
  const auto once = render_overlay(im, some);
  EXPECT_EQ(render_overlay(once, some).pixels, once.pixels);
  EXPECT_EQ(once.at(1, 0), 255);
  EXPECT_EQ(once.at(0, 0), 7);
  EXPECT_THROW(render_overlay(im, SalienceMap(3, 4)), ArgumentError);
}

}  // namespace
}  // namespace tacoma
