#include "terrashadow/maxmip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace terrashadow {

MaxMipPyramid::MaxMipPyramid(const HeightField& hf) : base_size_(hf.size()) {
  levels_.emplace_back(hf.values().begin(), hf.values().end());
  for (int n = base_size_ / 2; n >= 1; n /= 2) {
    const auto& fine = levels_.back();
    const int fn = 2 * n;
    std::vector<float> coarse(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      const float* r0 = &fine[static_cast<std::size_t>(2 * j) * fn];
      const float* r1 = r0 + fn;
      for (int i = 0; i < n; ++i) {
        coarse[static_cast<std::size_t>(j) * n + i] =
            std::max(std::max(r0[2 * i], r0[2 * i + 1]), std::max(r1[2 * i], r1[2 * i + 1]));
      }
    }
    levels_.push_back(std::move(coarse));
  }
}

TexelIndex MaxMipPyramid::texel_at(TexCoord t, int m) const {
  const int n = size(m);
  return {std::clamp(static_cast<int>(std::floor(t.u * n)), 0, n - 1),
          std::clamp(static_cast<int>(std::floor(t.v * n)), 0, n - 1)};
}

float MaxMipPyramid::sample_max(TexCoord t, int m) const {
  if (m < 0 || m >= level_count()) throw std::out_of_range("mip level out of range");
  return at(m, texel_at(t, m));
}

}  // namespace terrashadow
