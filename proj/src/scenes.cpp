#include "tailor/scenes.hpp"

#include <cmath>
#include <random>

#include "tailor/error.hpp"

namespace tailor {

SceneObject place_object(std::string name, Mesh mesh, double x, double y, double yaw) {
  SceneObject o;
  o.name = std::move(name);
  o.mesh = std::move(mesh);
  o.pose.rotation = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  o.pose.translation = Vec3(x, y, 0.0);
  return o;
}

SceneSpec tabletop_scene(std::vector<SceneObject> objects) {
  SceneSpec s;
  s.objects = std::move(objects);
  s.table = TablePlane{};
  return s;
}

void recolor(Mesh& mesh, const ColorScheme& from, const ColorScheme& to) {
  for (auto& t : mesh.triangles) {
    if (t.color == from.primary) t.color = to.primary;
    else if (t.color == from.secondary) t.color = to.secondary;
    else if (t.color == from.accent) t.color = to.accent;
  }
}

ColorScheme hue_band_scheme(double hue_lo, double hue_hi, std::uint64_t seed) {
  require(hue_lo < hue_hi && hue_hi - hue_lo <= 360.0, "hue band must be a nonempty interval of at most 360 degrees");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hue(hue_lo, hue_hi);
  std::uniform_real_distribution<double> sat(0.6, 0.95);
  std::uniform_real_distribution<double> val(0.6, 0.95);
  auto pick = [&] { return hsv_to_rgb(std::fmod(hue(rng) + 360.0, 360.0), sat(rng), val(rng)); };
  ColorScheme s;
  s.primary = pick();
  s.secondary = pick();
  s.accent = pick();
  return s;
}

SceneSpec sample_gear_scene() {
  return tabletop_scene({place_object("gear", make_gear_like(12, 45.0, 58.0, 20.0, 3))});
}

SceneSpec sample_cube_scene() {
  return tabletop_scene({place_object("cube", make_box(80.0, 80.0, 80.0, 5))});
}

}  // namespace tailor
