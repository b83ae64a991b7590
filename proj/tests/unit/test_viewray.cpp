#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <tuple>

#include "support.hpp"
#include "terrashadow/synth.hpp"
#include "terrashadow/viewray.hpp"

using namespace terrashadow;

namespace {

// Body with one field on face 4 and a mesh laid out the way renders do it.
struct World {
  HeightField hf;
  Body body;
  CubesphereMesh mesh;

  explicit World(HeightField field)
      : hf(std::move(field)), body(std::array<const HeightField*, 6>{nullptr, nullptr, nullptr, nullptr, &hf, nullptr}) {
    mesh.radius = body.outer_radius();
    for (int f = 0; f < 6; ++f) {
      mesh.patches.push_back(f == 4 ? build_patch(f, std::min(4096, hf.size()), hf.window(), mesh.radius)
                                    : build_patch(f, 16, {}, mesh.radius));
    }
    mesh = displace_mesh(mesh, body);
  }

  ViewPolicy policy(bool predisplaced) const {
    ViewPolicy p;
    p.predisplaced = predisplaced;
    p.tolerance = default_tolerance(hf);
    return p;
  }

  // World point above field coordinate t at height h.
  Vec3 above(TexCoord t, double h) const { return face_frame(4).to_world(hf.surface_point(t, h)); }
};

}  // namespace

TEST_CASE("cube sphere construction") {
  const CubesphereMesh cube = build_cubesphere(1, 1.0);
  CHECK(cube.patches.size() == 6);
  CHECK(cube.vertex_count() == vertex_count_for(1));
  CHECK(cube.triangle_count() == 12);
  std::set<std::tuple<long, long, long>> corners;
  for (const auto& p : cube.patches) {
    for (const Vec3& v : p.vertices) {
      const Vec3 w = face_frame(p.face_id).to_world(v) * 1e6;
      corners.insert({std::lround(w.x), std::lround(w.y), std::lround(w.z)});
    }
  }
  CHECK(corners.size() == 8);

  const double r = 1.0 + 3000.0 / 1737.4e3;
  const CubesphereMesh m = build_cubesphere(32, r);
  for (const auto& p : m.patches) {
    for (const Vec3& v : p.vertices) CHECK(std::abs(length(v) - r) < 1e-12);
  }
  CHECK(vertex_count_for(4096) == 6u * 4097u * 4097u);
  CHECK_THROWS_AS(build_cubesphere(0, 1.0), std::invalid_argument);
}

TEST_CASE("displacement moves vertices onto the terrain") {
  const int n = 64;
  SUBCASE("h = 1 leaves the mesh on the outer sphere") {
    const HeightField hf = testing::constant_field(n, 1.0f);
    CubesphereMesh mesh;
    mesh.radius = 1.0 + hf.relief();
    mesh.patches.push_back(build_patch(4, 16, hf.window(), mesh.radius));
    const CubesphereMesh d = displace_mesh(mesh, hf);
    for (std::size_t k = 0; k < mesh.patches[0].vertices.size(); ++k) {
      CHECK(length(d.patches[0].vertices[k] - mesh.patches[0].vertices[k]) < 1e-12);
    }
  }
  SUBCASE("h = 0 drops every vertex to the body sphere") {
    const HeightField hf = testing::constant_field(n, 0.0f);
    CubesphereMesh mesh;
    mesh.radius = 1.0 + hf.relief();
    mesh.patches.push_back(build_patch(4, 16, hf.window(), mesh.radius));
    const CubesphereMesh d = displace_mesh(mesh, hf);
    for (const Vec3& v : d.patches[0].vertices) CHECK(std::abs(length(v) - 1.0) < 1e-12);
  }
  SUBCASE("random field matches direct evaluation") {
    const HeightField hf(n, testing::random_values(n, 77), testing::local_meta(n));
    CubesphereMesh mesh;
    mesh.radius = 1.0 + hf.relief();
    mesh.patches.push_back(build_patch(4, n, hf.window(), mesh.radius));
    const CubesphereMesh d = displace_mesh(mesh, hf);
    const MeshPatch& p = d.patches[0];
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const TexCoord local{static_cast<double>(i) / n, static_cast<double>(j) / n};
        const double h = sample_height(hf, local, Filter::bilinear);
        CHECK(std::abs(length(p.vertex(i, j)) - length(tex_to_obj(p.uv(i, j), h, hf.relief()))) < 1e-9);
      }
    }
  }
}

TEST_CASE("nadir ray onto flat terrain") {
  const World w(testing::constant_field(256, 0.25f));
  for (const TexCoord t : {TexCoord{0.5, 0.5}, TexCoord{0.23, 0.61}, TexCoord{0.8, 0.1}}) {
    const Vec3 target = w.above(t, 0.25);
    const Vec3 origin = target * 1.01;
    const Ray ray{origin, normalize(target - origin)};
    const ViewResult r = view_intersect(ray, w.mesh, w.body, w.policy(true));
    REQUIRE(r.hit.has_value());
    CHECK(r.hit->steps <= 2);
    CHECK(length(r.hit->p - target) < 1e-6);
    CHECK(r.hit->face_id == 4);
    CHECK(std::abs(length(r.hit->N) - 1.0) < 1e-12);
    CHECK(dot(r.hit->N, normalize(target)) > 1.0 - 1e-9);
  }
}

TEST_CASE("view rays agree with a dense march") {
  const int n = 256;
  const World w(HeightField(n, fractal_terrain(n, 13), testing::local_meta(n, 16.0)));
  const double texel = 2.0 * w.hf.window().scale / n;
  std::mt19937_64 rng(500);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  int far_off = 0, misses = 0, budget = 0;
  for (int k = 0; k < 500; ++k) {
    const TexCoord t{0.2 + 0.6 * uni(rng), 0.2 + 0.6 * uni(rng)};
    const Vec3 target = w.above(t, 0.0);
    const double az = 2.0 * std::numbers::pi * uni(rng), el = 0.35 + 1.1 * uni(rng);
    const FaceFrame& fr = face_frame(4);
    const Vec3 up = normalize(target);
    const Vec3 east = normalize(fr.right - up * dot(fr.right, up));
    const Vec3 north = cross(up, east);
    const Vec3 back = (east * std::cos(az) + north * std::sin(az)) * std::cos(el) + up * std::sin(el);
    const Ray ray{target + back * (40.0 * texel + 3.0 * w.hf.relief()), -back};
    const ViewResult r = view_intersect(ray, w.mesh, w.body, w.policy(true));
    const auto ref = dense_march(ray, w.body, 10000);
    if (!r.hit || !ref) {
      ++misses;
      continue;
    }
    if (r.hit->steps >= w.policy(true).budget) ++budget;
    if (length(r.hit->p - *ref) > texel) ++far_off;
  }
  CHECK(misses == 0);
  CHECK(budget == 0);
  CHECK(far_off == 0);
}

TEST_CASE("pre-displacement never costs more steps") {
  const int n = 256;
  const World w(HeightField(n, fractal_terrain(n, 14), testing::local_meta(n, 16.0)));
  std::mt19937_64 rng(501);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double pre = 0.0, raw = 0.0;
  for (int k = 0; k < 300; ++k) {
    const TexCoord t{0.2 + 0.6 * uni(rng), 0.2 + 0.6 * uni(rng)};
    const Vec3 target = w.above(t, 0.0);
    const Vec3 origin = target + normalize(target) * 0.01 + face_frame(4).right * (0.01 * (uni(rng) - 0.5));
    const Ray ray{origin, normalize(target - origin)};
    const ViewResult a = view_intersect(ray, w.mesh, w.body, w.policy(true));
    const ViewResult b = view_intersect(ray, w.mesh, w.body, w.policy(false));
    REQUIRE(a.hit.has_value());
    REQUIRE(b.hit.has_value());
    CHECK(a.steps <= b.steps);
    pre += a.steps;
    raw += b.steps;
  }
  CHECK(raw > pre);
}

TEST_CASE("rays that leave the terrain volume miss") {
  const World w(testing::constant_field(64, 0.5f));
  const Ray away{{0, 0, 3}, {0, 0, 1}};
  CHECK_FALSE(view_intersect(away, w.mesh, w.body, w.policy(true)).hit.has_value());
  CHECK_FALSE(view_intersect(away, w.mesh, w.body, w.policy(false)).hit.has_value());
  const Ray past{{3, 3, 3}, normalize(Vec3{1, 0, 0})};
  CHECK_FALSE(view_intersect(past, w.mesh, w.body, w.policy(true)).hit.has_value());
}

TEST_CASE("body rejects mismatched fields") {
  const HeightField a = testing::constant_field(64, 0.5f, 32.0);
  const HeightField b = testing::constant_field(64, 0.5f, 16.0);
  CHECK_THROWS_AS(Body(std::array<const HeightField*, 6>{&a, nullptr, nullptr, nullptr, nullptr, nullptr}),
                  std::invalid_argument);
  HeightFieldMeta m = b.meta();
  m.face_id = 0;
  const HeightField b0(64, std::vector<float>(64 * 64, 0.5f), m);
  CHECK_THROWS_AS(Body(std::array<const HeightField*, 6>{&b0, nullptr, nullptr, nullptr, &a, nullptr}),
                  std::invalid_argument);
}
