#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "terrashadow/geometry.hpp"
#include "terrashadow/heightfield.hpp"
#include "terrashadow/maxmip.hpp"
#include "terrashadow/oracles.hpp"
#include "terrashadow/shadow.hpp"
#include "terrashadow/viewray.hpp"

namespace terrashadow {

/// Raised for unusable scene descriptions or assets.
class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Camera {
  Vec3 position{0, 0, 3};  ///< world, body radii
  Vec3 look_at{0, 0, 1};
  Vec3 up{0, 1, 0};
  double vfov = 0.5;  ///< vertical field of view, radians
  int width = 256;
  int height = 256;

  /// Normalized ray through image position (x, y), y growing downward;
  /// pixel centers sit at half-integers.
  Ray ray(double x, double y) const;
};

enum class Method { dp, uniform, reference };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct ViewConfig {
  bool predisplaced = true;
  int subdiv = 0;          ///< mesh cells per field edge; min(4096, N) when 0
  int bare_subdiv = 64;    ///< mesh cells per edge on faces without terrain
  int budget = 4096;
  double oblique_max = 8.0;
  double tolerance = 0.0;  ///< h units; a quarter base texel when 0
};

struct Scene {
  std::array<std::optional<HeightField>, 6> fields;
  Light light{{0, 0, 1}, 0.00465};
  Camera camera;
  Method method = Method::dp;
  TraceConfig trace;
  UniformStepConfig uniform;
  int reference_samples = 64;
  std::uint64_t seed = 1;
  ViewConfig view;

  /// Throws SceneError when the scene cannot be rendered.
  void validate() const;
  const HeightField& first_field() const;
};

/// Reads a scene file; height field paths resolve against its directory.
Scene load_scene(const std::filesystem::path& path);

/// Writes the scene file and each field next to it as raw float32
/// `<stem>_face<k>.f32` with a JSON sidecar, so a reload is bit-exact.
void save_scene(const std::filesystem::path& path, const Scene& scene);

/// Grayscale or RGB float raster, rows stored top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c = 1) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c) {}
  float& at(int x, int y, int c = 0) { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int x, int y, int c = 0) const { return data[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
};

/// Little-endian PFM with scale -1.0, bottom row first on disk.
void write_pfm(const std::filesystem::path& path, const Image& img);
Image read_pfm(const std::filesystem::path& path);

/// 8-bit PNG after the sRGB transfer function; values clamp to [0, 1].
void write_png(const std::filesystem::path& path, const Image& img);
/// 8-bit PNG of values already in display space.
void write_png_linear(const std::filesystem::path& path, const Image& img);

double srgb_encode(double linear);

/// Terrain, pyramids and meshes shared by every pixel of a render.
class PreparedScene {
 public:
  explicit PreparedScene(const Scene& scene);

  const Scene& scene() const { return *scene_; }
  const Body& body() const { return *body_; }
  const CubesphereMesh& mesh() const { return mesh_; }
  const MaxMipPyramid* pyramid(int face_id) const;
  std::optional<TerrainView> terrain(int face_id) const;
  ViewPolicy view_policy() const;
  /// Light directions of the distributed reference, world frame.
  const std::vector<Vec3>& reference_directions() const { return reference_dirs_; }

 private:
  const Scene* scene_;
  std::unique_ptr<Body> body_;
  std::array<std::optional<MaxMipPyramid>, 6> pyramids_;
  CubesphereMesh mesh_;
  std::vector<Vec3> reference_dirs_;
};

/// Per-pixel outcome of one primary ray.
struct PixelSample {
  bool hit = false;
  float radiance = 0.0f;
  float s = 0.0f;
  float J = 1.0f;
  int shadow_samples = 0;
  int view_steps = 0;
  int interval = -1;
  bool face_edge = false;
  double segment = 0.0;  ///< circular-segment branch of the occlusion
  double linear = 0.0;   ///< 1 - J branch of the occlusion
};

PixelSample shade_pixel(const PreparedScene& prepared, Method method, const Ray& ray);
PixelSample shade_pixel(const PreparedScene& prepared, Method method, const Ray& ray, const ViewPolicy& policy);

struct RenderStats {
  int pixels = 0;
  int hits = 0;
  int shadow_tests = 0;  ///< lit-facing hits that ran a shadow query
  double mean_samples = 0.0;
  int p50_samples = 0;
  int p95_samples = 0;
  int max_samples = 0;
  double mean_view_steps = 0.0;
  int max_view_steps = 0;
  int face_edge_pixels = 0;
  int umbra_pixels = 0;
  int penumbra_pixels = 0;
  double mean_segment_branch = 0.0;
  double mean_linear_branch = 0.0;
  double wall_ms = 0.0;
  int threads = 1;
};

struct RenderResult {
  Image image;              ///< irradiance in [0, 1]
  Image shadow;             ///< s per pixel
  Image cost;               ///< J* per pixel
  Image samples;            ///< shadow samples per pixel
  Image steps;              ///< view refinement steps per pixel
  std::vector<std::uint8_t> hit;  ///< 1 where the view ray found terrain
  RenderStats stats;
};

struct RenderOptions {
  int threads = 0;  ///< TERRAIN_SHADOW_THREADS, then hardware concurrency, when 0
  std::optional<Method> method;
  std::optional<bool> predisplaced;
};

int resolve_threads(int requested);

RenderResult render_scene(const Scene& scene, const RenderOptions& options = {});
RenderResult render_scene(const PreparedScene& prepared, const RenderOptions& options = {});

/// Signed-error statistics of a against b, each normalized by its own maximum.
struct ImageStats {
  int pixels = 0;
  double mean_error = 0.0;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  double sigma = 0.0;
  double within_3sigma = 1.0;  ///< fraction of pixels with |e - mean| <= 3 sigma
  double dark_offset = 0.0;
};

/// Throws std::invalid_argument on a size mismatch. The dark offset is
/// subtracted from the normalized b before differencing.
ImageStats compare_images(const Image& a, const Image& b, double dark_offset = 0.0);

enum class DebugChannel { cost, steps, penumbra };

DebugChannel parse_debug_channel(const std::string& name);

/// False-color RGB view of one diagnostic channel. The penumbra channel
/// paints umbra blue, penumbra red and leaves lit terrain gray.
Image render_debug(const RenderResult& result, DebugChannel channel);
Image render_debug(const Scene& scene, DebugChannel channel, const RenderOptions& options = {});

/// Raw float raster behind a debug channel.
const Image& debug_raster(const RenderResult& result, DebugChannel channel);

std::string stats_json(const RenderStats& stats, int indent = 2);
std::string stats_json(const ImageStats& stats, int indent = 2);

}  // namespace terrashadow
