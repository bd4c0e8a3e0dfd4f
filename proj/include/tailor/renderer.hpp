#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailor/image.hpp"
#include "tailor/mesh.hpp"
#include "tailor/viewsphere.hpp"

namespace tailor {

// Depth value for pixels whose ray hit nothing.
inline constexpr double kInvalidDepth = 0.0;

struct SceneObject {
  std::string name;
  Mesh mesh;
  RigidTransform pose;
};

// Finite square tabletop centered on `point`.
struct TablePlane {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Rgb color{150, 150, 150};
  double half_extent = 600.0;
};

struct Lighting {
  double ambient = 0.35;
  double diffuse = 0.65;
  Vec3 direction = Vec3(0.3, 0.2, 1.0).normalized();  // towards the light, world frame
};

struct SceneSpec {
  std::vector<SceneObject> objects;
  std::optional<TablePlane> table;
  Lighting light;

  // Center of the world-space bounding box of all objects (the view-sphere center).
  Vec3 object_center() const;
  double max_vertex_distance(const Vec3& from) const;
};

// Turns every object upside down (half turn about the world x axis through
// its own center) and sets it back on the table.
SceneSpec flip_objects(const SceneSpec& scene);

struct Intrinsics {
  double fx = 120.0, fy = 120.0, cx = 80.0, cy = 60.0;
  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;

  static Intrinsics centered(int width, int height, double f) {
    return {f, f, width / 2.0, height / 2.0};
  }
};

struct RgbdFrame {
  int width = 0, height = 0;
  Intrinsics intrinsics;
  ColorImage color;
  DepthImage depth;  // mm along the optical axis, kInvalidDepth where empty

  bool valid(int u, int v) const { return depth.at(u, v) > 0.0; }
  friend bool operator==(const RgbdFrame&, const RgbdFrame&) = default;
};

// Per-pixel ground truth: index into SceneSpec::objects, or one of the tags below.
inline constexpr int kHitTable = -1;
inline constexpr int kHitNone = -2;
using HitImage = Grid<int>;

struct RenderOptions {
  int width = 160, height = 120;
  Intrinsics intrinsics;
  double near_plane = 1.0;       // mm
  double noise_sigma = 0.0;      // additive Gaussian depth noise, mm
  std::uint64_t noise_seed = 0;
};

struct LabeledRender {
  RgbdFrame frame;
  HitImage hits;
};

LabeledRender render_labeled(const SceneSpec& scene, const CameraPose& pose, const RenderOptions& options);
RgbdFrame render(const SceneSpec& scene, const CameraPose& pose, const RenderOptions& options);

struct CloudPoint {
  Vec3 position;  // camera frame, mm
  Rgb color;
  int u = 0, v = 0;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  std::size_t size() const { return points.size(); }
};

Vec3 back_project_pixel(const Intrinsics& k, int u, int v, double depth);
// Pixel coordinates (not rounded) of a camera-frame point.
Eigen::Vector2d project(const Intrinsics& k, const Vec3& camera_point);

PointCloud back_project(const RgbdFrame& frame);

}  // namespace tailor
