#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "terrashadow/maxmip.hpp"

using namespace terrashadow;

TEST_CASE("constant field gives constant levels") {
  const MaxMipPyramid pyr(testing::constant_field(32, 0.3f));
  CHECK(pyr.level_count() == 6);
  for (int m = 0; m < pyr.level_count(); ++m) {
    for (const float v : pyr.level(m)) CHECK(v == 0.3f);
  }
}

TEST_CASE("two by two field tops out at its maximum") {
  const HeightField hf(2, {0.1f, 0.2f, 0.5f, 0.4f}, testing::local_meta(2));
  const MaxMipPyramid pyr = build_max_mipmap(hf);
  REQUIRE(pyr.level_count() == 2);
  CHECK(pyr.at(1, 0, 0) == 0.5f);
}

TEST_CASE("every texel equals the brute force window max") {
  const int n = 8;
  const HeightField hf(n, testing::random_values(n, 17), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  for (int m = 0; m < pyr.level_count(); ++m) {
    const int span = 1 << m;
    CHECK(pyr.delta_M(m) == doctest::Approx(static_cast<double>(span) / n));
    for (int j = 0; j < pyr.size(m); ++j) {
      for (int i = 0; i < pyr.size(m); ++i) {
        float mx = 0.0f;
        for (int y = j * span; y < (j + 1) * span; ++y) {
          for (int x = i * span; x < (i + 1) * span; ++x) mx = std::max(mx, hf.at(x, y));
        }
        CHECK(pyr.at(m, i, j) == mx);
      }
    }
  }
}

TEST_CASE("sample_max is conservative and monotone in level") {
  const int n = 64;
  const HeightField hf(n, testing::random_values(n, 23), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const TexCoord t{uni(rng), uni(rng)};
    const int m = static_cast<int>(uni(rng) * pyr.level_count());
    const float v = pyr.sample_max(t, m);
    const TexelIndex tx = pyr.texel_at(t, m);
    const int span = 1 << m;
    for (int y = tx.j * span; y < (tx.j + 1) * span; ++y) {
      for (int x = tx.i * span; x < (tx.i + 1) * span; ++x) {
        CHECK(v >= sample_height(hf, {(x + 0.5) / n, (y + 0.5) / n}, Filter::point));
      }
    }
    for (int mm = 1; mm < pyr.level_count(); ++mm) CHECK(pyr.sample_max(t, mm) >= pyr.sample_max(t, mm - 1));
  }
}

TEST_CASE("sample_max edge cases") {
  const int n = 16;
  const HeightField hf(n, testing::random_values(n, 31), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  const float global = *std::max_element(hf.values().begin(), hf.values().end());
  CHECK(pyr.sample_max({0.01, 0.99}, pyr.top_level()) == global);
  CHECK(pyr.sample_max({(3 + 0.5) / n, (7 + 0.5) / n}, 0) == hf.at(3, 7));
  CHECK(pyr.sample_max({1.0, 1.0}, 0) == hf.at(n - 1, n - 1));
  CHECK_THROWS_AS(pyr.sample_max({0.5, 0.5}, pyr.level_count()), std::out_of_range);
  CHECK_THROWS_AS(pyr.sample_max({0.5, 0.5}, -1), std::out_of_range);
}
