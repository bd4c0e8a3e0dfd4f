#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tailor/image.hpp"

namespace tailor {

struct Triangle {
  std::array<int, 3> v{};
  Rgb color;
};

// Closed triangle mesh with flat per-face colors, in the object's own frame.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  std::size_t triangle_count() const { return triangles.size(); }
  double triangle_area(std::size_t t) const;
  double surface_area() const;
  // Axis-aligned bounds; empty meshes return zeros.
  std::pair<Vec3, Vec3> bounds() const;
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
};

// Palette used by the procedural generators; all colors are saturated enough
// to land in hue bins rather than gray bins.
struct ColorScheme {
  Rgb primary{200, 60, 40};
  Rgb secondary{60, 90, 190};
  Rgb accent{230, 200, 40};
};

// h in degrees, s and v in [0, 1].
Rgb hsv_to_rgb(double h, double s, double v);

ColorScheme color_scheme_from_seed(std::uint64_t seed);

// Box of the given extents, base on z = 0, centered in x/y. 12 triangles.
Mesh make_box(double size_x, double size_y, double size_z, std::uint64_t seed);
// Closed cylinder, base on z = 0. 4n triangles (2n side, n per cap).
Mesh make_cylinder(double radius, double height, int segments, std::uint64_t seed);
// Extruded spur-gear outline with a trapezoidal tooth profile. 16 triangles per tooth.
Mesh make_gear_like(int teeth, double root_radius, double tip_radius, double thickness, std::uint64_t seed);
// Stepped shaft: coaxial cylinders of decreasing radius stacked along z.
Mesh make_shaft(const std::vector<std::pair<double, double>>& sections, int segments, std::uint64_t seed);
// Geodesic sphere resting on z = 0.
Mesh make_sphere(double radius, int frequency, Rgb color);

}  // namespace tailor
