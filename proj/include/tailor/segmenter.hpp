#pragma once

#include <cstdint>
#include <vector>

#include "tailor/renderer.hpp"

namespace tailor {

// Plane n . x = offset in the camera frame. The normal is oriented towards the
// camera, so points above the table have positive height.
struct PlaneModel {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  std::size_t inlier_count = 0;

  double height(const Vec3& p) const { return normal.dot(p) - offset; }
  friend bool operator==(const PlaneModel&, const PlaneModel&) = default;
};

using MaskImage = Grid<std::uint8_t>;

struct ObjectMask {
  MaskImage bits;
  BoundingBox bbox;
  std::size_t pixel_count = 0;

  bool test(int u, int v) const { return bits.contains(u, v) && bits.at(u, v) != 0; }
  friend bool operator==(const ObjectMask&, const ObjectMask&) = default;
};

// Builds the tight box and count from the bitmask.
ObjectMask make_mask(MaskImage bits);

struct PlaneFitParams {
  int iterations = 200;
  double inlier_threshold = 3.0;   // mm
  double min_inlier_fraction = 0.2;
  std::uint64_t seed = 7;
};

struct SegmentParams {
  double min_height = 5.0;  // mm
  std::size_t min_pixels = 30;
};

PlaneModel fit_dominant_plane(const PointCloud& cloud, const PlaneFitParams& params);

std::vector<ObjectMask> extract_object_masks(const RgbdFrame& frame, const PlaneModel& plane, const SegmentParams& params);

// Largest mask; ties keep the earlier (scanline-first) component.
const ObjectMask& primary_mask(const std::vector<ObjectMask>& masks);

// Least-squares plane through the points (smallest-eigenvalue normal).
PlaneModel fit_plane_least_squares(const std::vector<Vec3>& points);

double mask_iou(const MaskImage& a, const MaskImage& b);

}  // namespace tailor
