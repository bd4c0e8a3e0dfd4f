#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailor/explorer.hpp"

namespace tailor {

struct TrainingSample {
  ColorImage image;
  ObjectMask mask;
  std::string label;
  int source_view = -1;
  std::string transform;  // human-readable provenance, e.g. "rot=15 scale=1.25 flip=0 bg=keep"
};

struct Augment2dParams {
  std::vector<double> rotations_deg{0.0, 15.0, -15.0, 90.0};
  std::vector<double> scales{0.8, 1.0, 1.25};
  std::vector<bool> flips{false, true};
  // nullopt keeps the warped original background.
  std::vector<std::optional<Rgb>> backgrounds{Rgb{40, 40, 40}, Rgb{220, 220, 220}};

  static Augment2dParams identity() { return {{0.0}, {1.0}, {false}, {std::nullopt}}; }
};

// One output per (rotation, scale, flip, background) combination, in that
// nesting order. Image and mask are warped about the mask centroid; masks use
// nearest-neighbor sampling, images bilinear.
std::vector<TrainingSample> augment_2d(const TrainingSample& sample, const Augment2dParams& params);

struct Augment3dParams {
  double jitter = 0.08;  // radians, < pi/8
  int count = 4;
  std::uint64_t seed = 11;
};

struct Augment3dResult {
  std::vector<TrainingSample> samples;
  int shortfall = 0;  // draws where segmentation found no object
};

// Direction within `angle` of `axis`, parameterized by the polar offset and azimuth.
Vec3 cone_direction(const Vec3& axis, double angle, double azimuth);

// Re-renders `count` seeded poses drawn within the jitter cone around the
// canonical viewpoint and segments each one.
Augment3dResult augment_3d(const SceneSpec& scene, const ViewSphere& sphere, int view_index,
                           const Augment3dParams& params, const PerceptionConfig& perception,
                           const std::string& label);

TrainingSample sample_from_view(const CanonicalView& view, const std::string& label);

// Full training set for one object: every view with a nonempty mask
// contributes its 2D variations plus its 3D re-renders. The 3D seed is mixed
// with the view index so each view draws its own poses.
std::vector<TrainingSample> expand_views(const SceneSpec& scene, const ViewSphere& sphere,
                                         const std::vector<CanonicalView>& views, const std::string& label,
                                         const Augment2dParams& params2d, const Augment3dParams& params3d,
                                         const PerceptionConfig& perception);

std::uint64_t view_seed(std::uint64_t seed, int view_index);

}  // namespace tailor
