#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "terrashadow/heightfield.hpp"

namespace testing {

inline terrashadow::HeightFieldMeta local_meta(int n, double slope_ratio = 32.0) {
  terrashadow::HeightFieldMeta m;
  m.width = m.height = n;
  m.horizontal_scale = 30.0;
  m.vertical_scale = n * m.horizontal_scale / slope_ratio;
  m.face_id = 4;
  return m;
}

inline terrashadow::HeightField constant_field(int n, float h, double slope_ratio = 32.0) {
  return {n, std::vector<float>(static_cast<std::size_t>(n) * n, h), local_meta(n, slope_ratio)};
}

inline std::vector<float> random_values(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  std::vector<float> v(static_cast<std::size_t>(n) * n);
  for (float& x : v) x = uni(rng);
  return v;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("terrashadow_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
