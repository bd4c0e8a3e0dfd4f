#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tailor/renderer.hpp"

namespace tailor {

// Object resting on the z = 0 table, rotated by `yaw` (radians) about z and
// shifted to (x, y).
SceneObject place_object(std::string name, Mesh mesh, double x = 0.0, double y = 0.0, double yaw = 0.0);

// Scene with the default table at z = 0 under the given objects.
SceneSpec tabletop_scene(std::vector<SceneObject> objects);

// Replaces every face color equal to a color of `from` with the matching color of `to`.
void recolor(Mesh& mesh, const ColorScheme& from, const ColorScheme& to);

// Scheme whose three hues all fall inside [hue_lo, hue_hi) degrees.
ColorScheme hue_band_scheme(double hue_lo, double hue_hi, std::uint64_t seed);

SceneSpec sample_gear_scene();
SceneSpec sample_cube_scene();

}  // namespace tailor
