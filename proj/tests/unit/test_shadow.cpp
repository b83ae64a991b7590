#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "support.hpp"
#include "terrashadow/oracles.hpp"
#include "terrashadow/shadow.hpp"
#include "terrashadow/synth.hpp"

using namespace terrashadow;

namespace {

Vec3 light_toward_u(double elevation) { return {std::cos(elevation), 0.0, std::sin(elevation)}; }

// Face-coordinate displacement of the projection of p + L tau from that of p.
double downrange(const ObjPoint& p, Vec3 L, double tau) {
  const TexCoord a = obj_to_tex(p), b = obj_to_tex(p + L * tau);
  return std::hypot(b.u - a.u, b.v - a.v);
}

// Ray parameter whose projection sits `target` face units downrange of p,
// by bisection on the monotone projected distance.
double bisect_downrange(const ObjPoint& p, Vec3 L, double target) {
  double lo = 0.0, hi = 1e-3;
  while (downrange(p, L, hi) < target) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (downrange(p, L, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Field with h = 0 everywhere except a plateau over columns [c0, c1].
HeightField ridge_field(int n, int c0, int c1, float top) {
  std::vector<float> v(static_cast<std::size_t>(n) * n, 0.0f);
  for (int j = 0; j < n; ++j) {
    for (int i = c0; i <= c1; ++i) v[static_cast<std::size_t>(j) * n + i] = top;
  }
  return {n, v, testing::local_meta(n)};
}

ObjPoint point_at_texel(const HeightField& hf, double x, double y, double h) {
  return hf.surface_point({x / hf.size(), y / hf.size()}, h);
}

}  // namespace

TEST_CASE("compute_T rejects a radial ray") {
  CHECK_FALSE(compute_T({0, 0, 1.01}, {0, 0, 1}, 1.0 / 32).has_value());
  const ObjPoint p{0.1, 0.2, 1.0};
  CHECK_FALSE(compute_T(p, normalize(p), 1.0 / 32).has_value());
}

TEST_CASE("compute_T matches an independent numeric solve") {
  const ObjPoint p{0, 0, 1.01};
  const Vec3 L{1, 0, 0};
  const double dm = 1.0 / 32;
  const auto T = compute_T(p, L, dm);
  REQUIRE(T.has_value());
  CHECK(std::abs(*T - bisect_downrange(p, L, dm)) < 1e-9);
  CHECK(std::abs(downrange(p, L, *T) - dm) < 1e-9);
}

TEST_CASE("compute_T tip lands delta_M downrange for random rays") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const ObjPoint p{0.3 * uni(rng), 0.3 * uni(rng), 1.0 + 0.01 * (uni(rng) + 1.0)};
    const Vec3 L = normalize(Vec3{uni(rng), uni(rng), 0.5 * (uni(rng) + 1.0)});
    const double dm = 1.0 / (16 << static_cast<int>(4 * (uni(rng) + 1.0)));
    // The projected ray approaches a vanishing point and never gets further.
    const double reach = 0.5 * std::hypot(L.x / L.z - p.x / p.z, L.y / L.z - p.y / p.z);
    const auto T1 = compute_T(p, L, dm);
    const auto T2 = compute_T(p, L, 2.0 * dm);
    REQUIRE(T1.has_value() == (dm < reach));
    REQUIRE(T2.has_value() == (2.0 * dm < reach));
    if (!T2) continue;
    CHECK(*T1 > 0.0);
    CHECK(std::abs(downrange(p, L, *T1) - dm) < 1e-9);
    CHECK(std::abs(downrange(p, L, *T2) - 2.0 * dm) < 1e-9);
  }
}

TEST_CASE("dda_candidates") {
  const int n = 16;
  SUBCASE("axis aligned from a texel center") {
    const auto c = dda_candidates({(5 + 0.5) / n, (9 + 0.5) / n}, {1, 0}, n);
    REQUIRE(c.size() == 2);
    CHECK(c[0] == TexelIndex{5, 9});
    CHECK(c[1] == TexelIndex{6, 9});
    const auto d = dda_candidates({(5 + 0.5) / n, (9 + 0.5) / n}, {0, -1}, n);
    REQUIRE(d.size() == 2);
    CHECK(d[1] == TexelIndex{5, 8});
  }
  SUBCASE("zero length") {
    const auto c = dda_candidates({0.3, 0.3}, {0, 0}, n);
    REQUIRE(c.size() == 1);
    CHECK(c[0] == TexelIndex{4, 4});
  }
  SUBCASE("diagonal segments equal the conservative rasterization") {
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
      const TexCoord a{0.1 + 0.8 * uni(rng), 0.1 + 0.8 * uni(rng)};
      const double ang = std::numbers::pi / 4.0 * (1 + 2 * static_cast<int>(4 * uni(rng))) + 0.2 * (uni(rng) - 0.5);
      const Vec2 dir{std::cos(ang), std::sin(ang)};
      const auto c = dda_candidates(a, dir, n);
      const TexCoord b{a.u + 0.5 * dir.x / n, a.v + 0.5 * dir.y / n};
      const auto ref = conservative_raster(a, b, n);
      CHECK(c.size() <= 3);
      CHECK(std::set<TexelIndex>(c.begin(), c.end()) == std::set<TexelIndex>(ref.begin(), ref.end()));
    }
  }
  SUBCASE("superset of the canonical grid walk") {
    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
      const TexCoord a{0.1 + 0.8 * uni(rng), 0.1 + 0.8 * uni(rng)};
      const double ang = 2.0 * std::numbers::pi * uni(rng);
      const Vec2 dir{std::cos(ang), std::sin(ang)};
      const auto c = dda_candidates(a, dir, n);
      const std::set<TexelIndex> have(c.begin(), c.end());
      for (const auto t : segment_texels(a, {a.u + 0.5 * dir.x / n, a.v + 0.5 * dir.y / n}, n)) {
        CHECK(have.count(t) == 1);
      }
    }
  }
}

TEST_CASE("flat terrain never shadows") {
  const HeightField hf = testing::constant_field(256, 0.0f);
  const MaxMipPyramid pyr(hf);
  const ObjPoint p = point_at_texel(hf, 60.5, 128.5, 0.1);
  for (const double el : {0.05, 0.3, 1.0}) {
    const Vec3 L = light_toward_u(el);
    const auto start = first_interval_start(p, L, hf);
    REQUIRE(start.has_value());
    const auto T = compute_T(p + L * *start, L, hf.window().scale * pyr.delta_M(4));
    REQUIRE(T.has_value());
    const ShadowTraceState st = trace_shadow_interval({p, L, *start, *T}, {hf, pyr}, 5, TraversalMode::conservative);
    CHECK(st.delta_maxh_star >= 0.1);
    CHECK(st.J_star > 0.0);
    CHECK(occlusion_fraction({st.J_star, 0.48, 1.0}).s == 0.0);
  }
}

TEST_CASE("one interval of five levels reads at most fifteen texels") {
  const int n = 1024;
  const HeightField hf(n, fractal_terrain(n, 3), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (const TraversalMode mode : {TraversalMode::conservative, TraversalMode::literal}) {
    for (int k = 0; k < 300; ++k) {
      const TexCoord t{0.2 + 0.6 * uni(rng), 0.2 + 0.6 * uni(rng)};
      const ObjPoint p = hf.surface_point(t, sample_height(hf, t, Filter::bilinear));
      const double az = 2.0 * std::numbers::pi * uni(rng), el = 0.3 * uni(rng) + 0.01;
      const Vec3 L{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
      const auto start = first_interval_start(p, L, hf);
      const auto T = compute_T(p + L * *start, L, hf.window().scale * pyr.delta_M(4));
      const ShadowTraceState st = trace_shadow_interval({p, L, *start, *T}, {hf, pyr}, 5, mode);
      CHECK(st.samples <= 15);
      CHECK(st.k == 5);
      CHECK(st.m == -1);
      CHECK(st.J_star <= 1.0);
    }
  }
}

TEST_CASE("default schedule stays within 45 samples") {
  const TraceConfig cfg;
  CHECK(cfg.schedule == std::vector<int>{5, 5, 5});
  CHECK(cfg.max_samples() == 45);
  const int n = 512;
  const HeightField hf(n, fractal_terrain(n, 4), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int max_samples = 0;
  for (int k = 0; k < 500; ++k) {
    const TexCoord t{uni(rng), uni(rng)};
    const ObjPoint p = hf.surface_point(t, sample_height(hf, t, Filter::bilinear));
    const double az = 2.0 * std::numbers::pi * uni(rng), el = 0.2 * uni(rng) + 0.01;
    const ShadowResult r = trace_shadow(p, {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)},
                                        {hf, pyr}, cfg);
    max_samples = std::max(max_samples, r.samples);
  }
  CHECK(max_samples <= 45);
  CHECK(max_samples > 0);
}

TEST_CASE("schedule validation") {
  TraceConfig cfg;
  CHECK_NOTHROW(cfg.validate(32));
  CHECK_THROWS_AS(cfg.validate(16), std::invalid_argument);
  cfg.schedule = {};
  CHECK_THROWS_AS(cfg.validate(1024), std::invalid_argument);
  cfg.schedule = {0};
  CHECK_THROWS_AS(cfg.validate(1024), std::invalid_argument);
}

TEST_CASE("occluder in the third interval only") {
  const int n = 256;
  // Intervals span 16 base texels from x = 15.5; the third covers [47.5, 63.5].
  const HeightField hf = ridge_field(n, 54, 58, 0.9f);
  const MaxMipPyramid pyr(hf);
  const ObjPoint p = point_at_texel(hf, 14.5, 128.5, 0.0);
  const Vec3 L = light_toward_u(std::atan(0.1));

  for (int intervals = 1; intervals <= 3; ++intervals) {
    TraceConfig cfg;
    cfg.schedule.assign(static_cast<std::size_t>(intervals), 5);
    const ShadowResult r = trace_shadow(p, L, {hf, pyr}, cfg);
    CHECK(r.intervals_traced == intervals);
    if (intervals < 3) {
      CHECK(r.J_star == 1.0);
      CHECK(r.interval == -1);
    } else {
      CHECK(r.interval == 2);
      CHECK(r.J_star < 0.0);
      // Dense sampling along the ray locates the deepest point on the ridge.
      const auto start = first_interval_start(p, L, hf);
      double best = 1e9, best_x = 0.0;
      for (int k = 0; k <= 20000; ++k) {
        const double tau = *start * (1.0 + 48.0 * k / 20000.0);
        const ObjPoint tip = p + L * tau;
        const TexCoord t = hf.local_tex(tip);
        const double dh = hf.height_of(tip) - sample_height(hf, t, Filter::point);
        if (dh < best) {
          best = dh;
          best_x = t.u * n;
        }
      }
      const double dp_x = hf.local_tex(p).u * n + r.distance * n;
      CHECK(best_x >= 47.5);
      CHECK(std::abs(dp_x - best_x) <= 1.0);
    }
  }
}

TEST_CASE("later intervals do not change a short shadow") {
  const int n = 256;
  const HeightField hf = ridge_field(n, 20, 23, 0.6f);
  const MaxMipPyramid pyr(hf);
  const ObjPoint p = point_at_texel(hf, 14.5, 100.5, 0.0);
  const Vec3 L = light_toward_u(std::atan(0.1));
  TraceConfig one, three;
  one.schedule = {5};
  const ShadowResult a = trace_shadow(p, L, {hf, pyr}, one);
  const ShadowResult b = trace_shadow(p, L, {hf, pyr}, three);
  CHECK(a.interval == 0);
  CHECK(a.J_star < 1.0);
  CHECK(a.J_star == b.J_star);
  CHECK(a.t_star == b.t_star);
}

TEST_CASE("traces are deterministic") {
  const int n = 512;
  const HeightField hf(n, fractal_terrain(n, 19), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const TexCoord t{uni(rng), uni(rng)};
    const ObjPoint p = hf.surface_point(t, sample_height(hf, t, Filter::bilinear));
    const Vec3 L = normalize(Vec3{uni(rng) - 0.5, uni(rng) - 0.5, 0.1 * uni(rng) + 0.01});
    const ShadowResult a = trace_shadow(p, L, {hf, pyr}, {});
    const ShadowResult b = trace_shadow(p, L, {hf, pyr}, {});
    CHECK(a.J_star == b.J_star);
    CHECK(a.t_star == b.t_star);
    CHECK(a.samples == b.samples);
  }
}

TEST_CASE("every pyramid read bounds the terrain under the tip") {
  const int n = 256;
  const HeightField hf(n, fractal_terrain(n, 5), testing::local_meta(n));
  const MaxMipPyramid pyr(hf);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    const TexCoord t{uni(rng), uni(rng)};
    const int m = static_cast<int>(uni(rng) * pyr.level_count());
    CHECK(pyr.sample_max(t, m) >= sample_height(hf, t, Filter::point));
  }
}

// Rows-constant terrain along an axis-aligned ray: the setting in which the
// descent is expected to reach the exhaustive minimum over texel centers.
TEST_CASE("descent reaches the exhaustive minimum on one-dimensional terrain") {
  const int n = 256;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int mismatches = 0, cases = 0;
  for (int k = 0; k < 20; ++k) {
    const HeightField hf(n, extrude_rows(fractal_profile(n, 500 + k)), testing::local_meta(n));
    const MaxMipPyramid pyr(hf);
    const TexCoord tex{(12 + std::floor(uni(rng) * 70) + 0.5) / n, 0.5 + 0.5 / n};
    const ObjPoint p = hf.surface_point(tex, sample_height(hf, tex, Filter::bilinear));
    const Vec3 L = light_toward_u(std::atan(0.005 + 0.08 * uni(rng)));
    const auto start = first_interval_start(p, L, hf);
    const auto T = compute_T(p + L * *start, L, hf.window().scale * pyr.delta_M(7));
    const ShadowTraceState st = trace_shadow_interval({p, L, *start, *T}, {hf, pyr}, 8, TraversalMode::conservative);
    const BruteForceResult bf = brute_force_min(p, L, hf, 64 * n, *start, *start + *T);
    ++cases;
    if (std::abs(st.delta_maxh_star - bf.min_dh) > 1e-6 || std::abs(st.t_star - bf.t) > 1e-6) ++mismatches;
    CHECK(st.delta_maxh_star >= bf.min_dh - 1e-9);
  }
  INFO(mismatches << " of " << cases << " rays missed the exhaustive minimum");
  CHECK(mismatches == 0);
}

TEST_CASE("occlusion fraction branches") {
  CHECK(segment_fraction(0.0) == 0.5);
  CHECK(segment_fraction(1.0) == 1.0);
  CHECK(segment_fraction(-1.0) == 0.0);

  const OcclusionResult half = occlusion_fraction({0.6, 0.6, 1.0});
  CHECK(half.d == 0.0);
  CHECK(half.segment == 0.5);
  CHECK(half.s == 0.5);

  const OcclusionResult grazing = occlusion_fraction({0.9, 0.6, 1.0});
  CHECK(grazing.d == doctest::Approx(-1.0));
  CHECK(grazing.segment == doctest::Approx(0.0));
  CHECK(grazing.s == doctest::Approx(0.1));

  const OcclusionResult covered = occlusion_fraction({0.3, 0.6, 1.0});
  CHECK(covered.d == doctest::Approx(1.0));
  CHECK(covered.s == doctest::Approx(1.0));

  CHECK(occlusion_fraction({1.0, 0.5, 1.0}).s == 0.0);
  CHECK(occlusion_fraction({0.0, 0.5, 1.0}).s == 1.0);
  CHECK(occlusion_fraction({-3.0, 0.5, 1.0}).s == 1.0);
  CHECK_THROWS_AS(occlusion_fraction({0.5, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(occlusion_fraction({0.5, -0.1, 1.0}), std::invalid_argument);
}

TEST_CASE("occlusion fraction is monotone and bounded") {
  for (const double r_L : {0.01, 0.1, 0.48, 0.9}) {
    for (const double ndn : {0.0, 0.4, 1.0}) {
      double prev = 1.0;
      for (int k = 0; k <= 1000; ++k) {
        const double J = -0.2 + 1.4 * k / 1000.0;
        const double s = occlusion_fraction({J, r_L, ndn}).s;
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
        CHECK(s <= prev);
        prev = s;
      }
    }
  }
}

TEST_CASE("light radius slope and normal factor") {
  const HeightField hf = testing::constant_field(512, 0.0f, 32.0);
  CHECK(light_radius_slope({{0, 0, 1}, 0.015}, hf) == doctest::Approx(std::tan(0.015) * 32.0));
  CHECK(normal_factor({0, 0, 1}, {1, 0, 0}) == doctest::Approx(1.0));
  CHECK(normal_factor({0, 0, 1}, {0, 0, 1}) == doctest::Approx(0.0));
  const Vec3 L = normalize(Vec3{1, 0, 1});
  CHECK(normal_factor({0, 0, 1}, L) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("shadow_term end to end") {
  SUBCASE("sun at zenith over flat terrain") {
    const HeightField hf = testing::constant_field(256, 0.5f);
    const MaxMipPyramid pyr(hf);
    const ObjPoint p = point_at_texel(hf, 100.5, 100.5, 0.5);
    const Vec3 up = normalize(p);
    const ShadowSample s = shadow_term(p, up, up, {hf, pyr}, {}, 0.48);
    CHECK(s.s == 0.0);
  }
  SUBCASE("deep crater with a grazing sun") {
    const int n = 256;
    const HeightField hf(n, crater_bowl(n, 0.5, 0.5, 0.2, 0.0, 1.0, 0.5), testing::local_meta(n));
    const MaxMipPyramid pyr(hf);
    const ObjPoint p = point_at_texel(hf, 150.5, 128.5, sample_height(hf, {150.5 / n, 128.5 / n}, Filter::bilinear));
    const ShadowSample s = shadow_term(p, normalize(p), light_toward_u(0.02), {hf, pyr}, {}, 0.48);
    CHECK(s.s == 1.0);
    CHECK(s.trace.J_star <= 0.0);
  }
}
