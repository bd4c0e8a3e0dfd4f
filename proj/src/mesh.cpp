#include "tailor/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tailor/error.hpp"
#include "tailor/viewsphere.hpp"

namespace tailor {

Rgb hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h / 60.0, 6.0);
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  auto q = [&](double t) { return static_cast<std::uint8_t>(std::lround(255.0 * (t + m))); };
  return {q(r), q(g), q(b)};
}

namespace {

void add_quad(Mesh& m, int a, int b, int c, int d, Rgb color) {
  m.triangles.push_back({{a, b, c}, color});
  m.triangles.push_back({{a, c, d}, color});
}

// Extrudes a star-shaped closed outline (counter-clockwise, around the origin)
// between z = z0 and z = z1. Caps are fans around a center vertex.
void extrude(Mesh& m, const std::vector<std::pair<double, double>>& outline, double z0, double z1,
             Rgb cap_color, Rgb side_color, const std::vector<Rgb>* side_colors = nullptr) {
  const int n = static_cast<int>(outline.size());
  const int base = static_cast<int>(m.vertices.size());
  for (const auto& [x, y] : outline) m.vertices.emplace_back(x, y, z0);
  for (const auto& [x, y] : outline) m.vertices.emplace_back(x, y, z1);
  const int bottom_center = static_cast<int>(m.vertices.size());
  m.vertices.emplace_back(0, 0, z0);
  const int top_center = bottom_center + 1;
  m.vertices.emplace_back(0, 0, z1);
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    const Rgb side = side_colors ? (*side_colors)[i] : side_color;
    add_quad(m, base + i, base + j, base + n + j, base + n + i, side);
    m.triangles.push_back({{top_center, base + n + i, base + n + j}, cap_color});
    m.triangles.push_back({{bottom_center, base + j, base + i}, cap_color});
  }
}

std::vector<std::pair<double, double>> circle(double r, int segments) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / segments;
    pts.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return pts;
}

}  // namespace

double Mesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles.at(t);
  const Vec3& a = vertices.at(tri.v[0]);
  const Vec3& b = vertices.at(tri.v[1]);
  const Vec3& c = vertices.at(tri.v[2]);
  return 0.5 * (b - a).cross(c - a).norm();
}

double Mesh::surface_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
  return s;
}

std::pair<Vec3, Vec3> Mesh::bounds() const {
  if (vertices.empty()) return {Vec3::Zero(), Vec3::Zero()};
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const auto& v : vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return {lo, hi};
}

ColorScheme color_scheme_from_seed(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> hue(0.0, 360.0);
  std::uniform_real_distribution<double> sat(0.55, 0.95);
  std::uniform_real_distribution<double> val(0.6, 0.95);
  const double h0 = hue(rng);
  const double h1 = std::fmod(h0 + 90.0 + hue(rng) / 2.0, 360.0);
  const double h2 = std::fmod(h1 + 60.0 + hue(rng) / 3.0, 360.0);
  ColorScheme s;
  s.primary = hsv_to_rgb(h0, sat(rng), val(rng));
  s.secondary = hsv_to_rgb(h1, sat(rng), val(rng));
  s.accent = hsv_to_rgb(h2, sat(rng), val(rng));
  return s;
}

Mesh make_box(double sx, double sy, double sz, std::uint64_t seed) {
  require(sx > 0 && sy > 0 && sz > 0, "box dimensions must be positive");
  const ColorScheme cs = color_scheme_from_seed(seed);
  Mesh m;
  const double hx = sx / 2, hy = sy / 2;
  for (int k = 0; k < 8; ++k)
    m.vertices.emplace_back((k & 1) ? hx : -hx, (k & 2) ? hy : -hy, (k & 4) ? sz : 0.0);
  // Outward-wound faces: -z, +z, -y, +y, -x, +x.
  add_quad(m, 0, 2, 3, 1, cs.secondary);
  add_quad(m, 4, 5, 7, 6, cs.primary);
  add_quad(m, 0, 1, 5, 4, cs.accent);
  add_quad(m, 2, 6, 7, 3, cs.accent);
  add_quad(m, 0, 4, 6, 2, cs.secondary);
  add_quad(m, 1, 3, 7, 5, cs.secondary);
  return m;
}

Mesh make_cylinder(double radius, double height, int segments, std::uint64_t seed) {
  require(radius > 0 && height > 0, "cylinder dimensions must be positive");
  require(segments >= 3, "cylinder needs at least 3 segments");
  const ColorScheme cs = color_scheme_from_seed(seed);
  Mesh m;
  extrude(m, circle(radius, segments), 0.0, height, cs.primary, cs.secondary);
  return m;
}

Mesh make_gear_like(int teeth, double root_radius, double tip_radius, double thickness, std::uint64_t seed) {
  require(teeth >= 3, "gear needs at least 3 teeth");
  require(root_radius > 0 && tip_radius > root_radius && thickness > 0, "gear dimensions must be positive");
  const ColorScheme cs = color_scheme_from_seed(seed);
  // Per tooth: root start, tip start, tip end, root end.
  std::vector<std::pair<double, double>> outline;
  std::vector<Rgb> sides;
  const double pitch = 2.0 * std::numbers::pi / teeth;
  const std::array<double, 4> frac{0.0, 0.2, 0.45, 0.65};
  const std::array<double, 4> rad{root_radius, tip_radius, tip_radius, root_radius};
  for (int t = 0; t < teeth; ++t) {
    for (int k = 0; k < 4; ++k) {
      const double a = pitch * (t + frac[k]);
      outline.emplace_back(rad[k] * std::cos(a), rad[k] * std::sin(a));
      sides.push_back(k == 1 ? cs.accent : cs.secondary);
    }
  }
  Mesh m;
  extrude(m, outline, 0.0, thickness, cs.primary, cs.secondary, &sides);
  return m;
}

Mesh make_shaft(const std::vector<std::pair<double, double>>& sections, int segments, std::uint64_t seed) {
  require(!sections.empty(), "shaft needs at least one section");
  require(segments >= 3, "shaft needs at least 3 segments");
  const ColorScheme cs = color_scheme_from_seed(seed);
  Mesh m;
  double z = 0.0;
  int i = 0;
  for (const auto& [radius, length] : sections) {
    require(radius > 0 && length > 0, "shaft section dimensions must be positive");
    const Rgb side = (i % 2 == 0) ? cs.primary : cs.secondary;
    extrude(m, circle(radius, segments), z, z + length, cs.accent, side);
    z += length;
    ++i;
  }
  return m;
}

Mesh make_sphere(double radius, int frequency, Rgb color) {
  require(radius > 0, "sphere radius must be positive");
  const GeodesicMesh g = build_geodesic_mesh(frequency);
  Mesh m;
  for (const auto& v : g.vertices) m.vertices.push_back(radius * v + Vec3(0, 0, radius));
  // Recover faces as edge triangles: (a, b, c) with a < b < c all pairwise adjacent.
  std::vector<std::vector<int>> adj(g.vertices.size());
  for (const auto& [a, b] : g.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& n : adj) std::sort(n.begin(), n.end());
  for (int a = 0; a < static_cast<int>(adj.size()); ++a) {
    for (int b : adj[a]) {
      if (b <= a) continue;
      for (int c : adj[b]) {
        if (c <= b || !std::binary_search(adj[a].begin(), adj[a].end(), c)) continue;
        std::array<int, 3> tri{a, b, c};
        const Vec3 n = (g.vertices[b] - g.vertices[a]).cross(g.vertices[c] - g.vertices[a]);
        if (n.dot(g.vertices[a]) < 0) std::swap(tri[1], tri[2]);
        m.triangles.push_back({tri, color});
      }
    }
  }
  return m;
}

}  // namespace tailor
