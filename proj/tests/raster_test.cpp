#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "tacoma/raster.hpp"
#include "tacoma/rng.hpp"

namespace tacoma {
namespace {

std::vector<std::uint8_t> bytes(const std::string& header, std::vector<std::uint8_t> payload) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

TEST(Pgm, DecodesTwoByTwo) {
  const auto im = read_pgm(bytes("P5 2 2 255\n", {0, 128, 255, 7}));
  EXPECT_EQ(im.width, 2);
  EXPECT_EQ(im.height, 2);
  EXPECT_EQ(im.pixels, (std::vector<std::uint8_t>{0, 128, 255, 7}));
  EXPECT_EQ(im.at(1, 0), 128);
  EXPECT_EQ(im.at(0, 1), 255);
}

TEST(Pgm, WritesCanonicalHeader) {
  GrayImage im(1, 1, 0);
  EXPECT_EQ(write_pgm(im), bytes("P5\n1 1\n255\n", {0}));
  GrayImage wide(2, 3, 9);
  EXPECT_EQ(write_pgm(wide).size(), std::string("P5\n2 3\n255\n").size() + 6);
}

TEST(Pgm, RejectsOtherMagic) {
  try {
    read_pgm(bytes("P6 1 1 255\n", {0, 0, 0}));
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported magic"), std::string::npos);
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Pgm, RejectsWideMaxval) {
  try {
    read_pgm(bytes("P5 1 1 65535\n", {0, 0}));
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
}

TEST(Pgm, ReportsTruncationOffset) {
  const auto b = bytes("P5\n3 3\n255\n", {1, 2, 3});
  try {
    read_pgm(b);
    FAIL() << "expected DecodeError";
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), b.size());
  }
}

TEST(Pgm, SkipsHeaderComments) {
  const auto im = read_pgm(bytes("P5\n# made by hand\n1 2\n255\n", {4, 5}));
  EXPECT_EQ(im.pixels, (std::vector<std::uint8_t>{4, 5}));
}

TEST(Pgm, RoundTripIsBitExact) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    GrayImage im(rng.integer(1, 40), rng.integer(1, 40));
    for (auto& p : im.pixels) p = static_cast<std::uint8_t>(rng.integer(0, 255));
    const auto encoded = write_pgm(im);
    EXPECT_EQ(read_pgm(encoded), im);
    EXPECT_EQ(write_pgm(read_pgm(encoded)), encoded);
  }
}

TEST(Quantize, Endpoints) {
  EXPECT_EQ(quantize_level(0, 51), 1);
  EXPECT_EQ(quantize_level(255, 51), 51);
  // floor(127 * 51 / 256) + 1 = floor(25.30) + 1
  EXPECT_EQ(quantize_level(127, 51), 26);
}

TEST(Quantize, RejectsLevelCount) {
  GrayImage im(2, 2);
  EXPECT_THROW(quantize(im, 1), ArgumentError);
  EXPECT_THROW(quantize(im, 257), ArgumentError);
  EXPECT_NO_THROW(quantize(im, 256));
}

TEST(Quantize, MonotoneAndOntoForEveryLevelCount) {
  GrayImage ramp(256, 1);
  for (int v = 0; v < 256; ++v) ramp.pixels[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(v);
  for (int levels = 2; levels <= 256; ++levels) {
    const auto q = quantize(ramp, levels);
    std::vector<bool> hit(static_cast<std::size_t>(levels) + 1, false);
    for (int v = 0; v < 256; ++v) {
      const int l = q.pixels[static_cast<std::size_t>(v)];
      ASSERT_GE(l, 1);
      ASSERT_LE(l, levels);
      if (v > 0) ASSERT_LE(q.pixels[static_cast<std::size_t>(v - 1)], l);
      hit[static_cast<std::size_t>(l)] = true;
    }
    for (int l = 1; l <= levels; ++l) ASSERT_TRUE(hit[static_cast<std::size_t>(l)]) << "levels=" << levels << " l=" << l;
  }
}

}  // namespace
}  // namespace tacoma
