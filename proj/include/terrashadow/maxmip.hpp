#pragma once

#include <span>
#include <vector>

#include "terrashadow/heightfield.hpp"

namespace terrashadow {

/// Integer texel address at one pyramid level.
struct TexelIndex {
  int i = 0;
  int j = 0;
  constexpr bool operator==(const TexelIndex&) const = default;
  constexpr auto operator<=>(const TexelIndex&) const = default;
};

/// Maximum mipmap: level 0 is the height field, each coarser texel holds the
/// maximum of its 2x2 children. Every texel therefore bounds the terrain it
/// covers from above.
class MaxMipPyramid {
 public:
  MaxMipPyramid() = default;
  explicit MaxMipPyramid(const HeightField& hf);

  int base_size() const { return base_size_; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  int top_level() const { return level_count() - 1; }
  int size(int m) const { return base_size_ >> m; }
  std::span<const float> level(int m) const { return levels_.at(static_cast<std::size_t>(m)); }
  float at(int m, int i, int j) const {
    return levels_[static_cast<std::size_t>(m)][static_cast<std::size_t>(j) * size(m) + i];
  }
  float at(int m, TexelIndex t) const { return at(m, t.i, t.j); }

  /// Texel edge length at level m in field texture units, 2^m / N.
  double delta_M(int m) const { return static_cast<double>(1 << m) / base_size_; }

  /// Level-m texel containing t, edge-clamped.
  TexelIndex texel_at(TexCoord t, int m) const;

  /// Nearest-texel (unfiltered) maximum at level m. Throws std::out_of_range
  /// for a level outside the pyramid.
  float sample_max(TexCoord t, int m) const;

 private:
  int base_size_ = 0;
  std::vector<std::vector<float>> levels_;
};

inline MaxMipPyramid build_max_mipmap(const HeightField& hf) { return MaxMipPyramid(hf); }

}  // namespace terrashadow
