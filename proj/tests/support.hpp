#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "tailor/renderer.hpp"
#include "tailor/scenes.hpp"
#include "tailor/segmenter.hpp"

namespace tailor::testing {

// Pixels whose ray hits object `index`, straight from the renderer's hit buffer.
inline MaskImage hit_mask(const HitImage& hits, int index) {
  MaskImage m(hits.width, hits.height, 0);
  for (int v = 0; v < hits.height; ++v)
    for (int u = 0; u < hits.width; ++u)
      if (hits.at(u, v) == index) m.at(u, v) = 1;
  return m;
}

inline MaskImage any_object_mask(const HitImage& hits) {
  MaskImage m(hits.width, hits.height, 0);
  for (int v = 0; v < hits.height; ++v)
    for (int u = 0; u < hits.width; ++u)
      if (hits.at(u, v) >= 0) m.at(u, v) = 1;
  return m;
}

inline BoundingBox mask_box(const MaskImage& m) { return make_mask(m).bbox; }

inline double angle_between(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do v = Vec3(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-9);
  return v.normalized();
}

// Hue in degrees of an RGB color, standard hexcone formula.
inline double hue_of(const Rgb& c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b}), d = mx - mn;
  if (d <= 0.0) return 0.0;
  double h;
  if (mx == r) h = std::fmod((g - b) / d, 6.0);
  else if (mx == g) h = (b - r) / d + 2.0;
  else h = (r - g) / d + 4.0;
  h *= 60.0;
  return h < 0 ? h + 360.0 : h;
}

}  // namespace tailor::testing
