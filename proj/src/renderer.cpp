#include "tailor/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tailor/error.hpp"

namespace tailor {
namespace {

struct CameraTriangle {
  Vec3 a, b, c;
};

// Moller-Trumbore from the camera origin; returns the ray parameter, which for
// rays with unit z component is the depth along the optical axis.
std::optional<double> intersect(const Vec3& dir, const CameraTriangle& tri) {
  const Vec3 e1 = tri.b - tri.a;
  const Vec3 e2 = tri.c - tri.a;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-12) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = -tri.a;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(q) * inv;
}

std::uint8_t shade_channel(std::uint8_t c, double k) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(c * k), 0L, 255L));
}

Rgb shade(Rgb c, double k) { return {shade_channel(c.r, k), shade_channel(c.g, k), shade_channel(c.b, k)}; }

double lambert(const Lighting& light, const Vec3& world_normal) {
  return light.ambient + light.diffuse * std::max(0.0, world_normal.dot(light.direction));
}

void plane_axes(const Vec3& n, Vec3& e1, Vec3& e2) {
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = n.cross(seed).normalized();
  e2 = n.cross(e1);
}

}  // namespace

Vec3 SceneSpec::object_center() const {
  bool any = false;
  Vec3 lo = Vec3::Zero(), hi = Vec3::Zero();
  for (const auto& o : objects) {
    for (const auto& v : o.mesh.vertices) {
      const Vec3 w = o.pose.apply(v);
      if (!any) {
        lo = hi = w;
        any = true;
      }
      lo = lo.cwiseMin(w);
      hi = hi.cwiseMax(w);
    }
  }
  return any ? Vec3(0.5 * (lo + hi)) : (table ? table->point : Vec3::Zero());
}

double SceneSpec::max_vertex_distance(const Vec3& from) const {
  double d = 0.0;
  for (const auto& o : objects)
    for (const auto& v : o.mesh.vertices) d = std::max(d, (o.pose.apply(v) - from).norm());
  return d;
}

SceneSpec flip_objects(const SceneSpec& scene) {
  SceneSpec out = scene;
  const Mat3 half_turn = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
  for (auto& o : out.objects) {
    if (o.mesh.vertices.empty()) continue;
    Vec3 lo = o.pose.apply(o.mesh.vertices.front()), hi = lo;
    for (const auto& v : o.mesh.vertices) {
      lo = lo.cwiseMin(o.pose.apply(v));
      hi = hi.cwiseMax(o.pose.apply(v));
    }
    const Vec3 center = 0.5 * (lo + hi);
    RigidTransform flipped;
    flipped.rotation = half_turn * o.pose.rotation;
    flipped.translation = half_turn * (o.pose.translation - center) + center;
    double zmin = std::numeric_limits<double>::infinity();
    for (const auto& v : o.mesh.vertices) zmin = std::min(zmin, flipped.apply(v).z());
    flipped.translation.z() += lo.z() - zmin;
    o.pose = flipped;
  }
  return out;
}

LabeledRender render_labeled(const SceneSpec& scene, const CameraPose& pose, const RenderOptions& options) {
  require(options.width >= 16 && options.height >= 16, "frame must be at least 16x16");
  const Intrinsics& k = options.intrinsics;
  require(k.fx > 0 && k.fy > 0, "focal lengths must be positive");

  const int w = options.width, h = options.height;
  LabeledRender out;
  RgbdFrame& f = out.frame;
  f.width = w;
  f.height = h;
  f.intrinsics = k;
  f.color = ColorImage(w, h);
  f.depth = DepthImage(w, h, kInvalidDepth);
  out.hits = HitImage(w, h, kHitNone);

  auto ray = [&](int u, int v) { return Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0); };
  const double inf = std::numeric_limits<double>::infinity();
  DepthImage zbuf(w, h, inf);

  if (scene.table) {
    const TablePlane& t = *scene.table;
    const Vec3 n_cam = pose.rotation.transpose() * t.normal.normalized();
    const Vec3 p_cam = pose.to_camera(t.point);
    Vec3 e1, e2;
    plane_axes(t.normal.normalized(), e1, e2);
    const Vec3 e1c = pose.rotation.transpose() * e1, e2c = pose.rotation.transpose() * e2;
    const Rgb c = shade(t.color, lambert(scene.light, t.normal.normalized()));
    const double num = n_cam.dot(p_cam);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const Vec3 d = ray(u, v);
        const double den = n_cam.dot(d);
        if (std::abs(den) < 1e-12) continue;
        const double tt = num / den;
        if (tt < options.near_plane) continue;
        const Vec3 rel = tt * d - p_cam;
        if (std::abs(rel.dot(e1c)) > t.half_extent || std::abs(rel.dot(e2c)) > t.half_extent) continue;
        zbuf.at(u, v) = tt;
        f.color.at(u, v) = c;
        out.hits.at(u, v) = kHitTable;
      }
    }
  }

  for (std::size_t oi = 0; oi < scene.objects.size(); ++oi) {
    const SceneObject& obj = scene.objects[oi];
    std::vector<Vec3> cam(obj.mesh.vertices.size());
    for (std::size_t i = 0; i < cam.size(); ++i) cam[i] = pose.to_camera(obj.pose.apply(obj.mesh.vertices[i]));

    for (const Triangle& tri : obj.mesh.triangles) {
      const CameraTriangle ct{cam[tri.v[0]], cam[tri.v[1]], cam[tri.v[2]]};
      const double zmax = std::max({ct.a.z(), ct.b.z(), ct.c.z()});
      if (zmax < options.near_plane) continue;

      int u0 = 0, u1 = w - 1, v0 = 0, v1 = h - 1;
      const double zmin = std::min({ct.a.z(), ct.b.z(), ct.c.z()});
      if (zmin > options.near_plane) {
        double pu_lo = inf, pu_hi = -inf, pv_lo = inf, pv_hi = -inf;
        for (const Vec3* p : {&ct.a, &ct.b, &ct.c}) {
          const auto px = project(k, *p);
          pu_lo = std::min(pu_lo, px.x());
          pu_hi = std::max(pu_hi, px.x());
          pv_lo = std::min(pv_lo, px.y());
          pv_hi = std::max(pv_hi, px.y());
        }
        u0 = std::max(0, static_cast<int>(std::floor(pu_lo)) - 1);
        u1 = std::min(w - 1, static_cast<int>(std::ceil(pu_hi)) + 1);
        v0 = std::max(0, static_cast<int>(std::floor(pv_lo)) - 1);
        v1 = std::min(h - 1, static_cast<int>(std::ceil(pv_hi)) + 1);
        if (u0 > u1 || v0 > v1) continue;
      }

      const Vec3 wa = obj.pose.apply(obj.mesh.vertices[tri.v[0]]);
      const Vec3 wb = obj.pose.apply(obj.mesh.vertices[tri.v[1]]);
      const Vec3 wc = obj.pose.apply(obj.mesh.vertices[tri.v[2]]);
      const Vec3 wn = (wb - wa).cross(wc - wa).normalized();
      const Rgb c = shade(tri.color, lambert(scene.light, wn));

      for (int v = v0; v <= v1; ++v) {
        for (int u = u0; u <= u1; ++u) {
          const auto t = intersect(ray(u, v), ct);
          if (!t || *t < options.near_plane || *t >= zbuf.at(u, v)) continue;
          zbuf.at(u, v) = *t;
          f.color.at(u, v) = c;
          out.hits.at(u, v) = static_cast<int>(oi);
        }
      }
    }
  }

  std::mt19937_64 rng(options.noise_seed);
  std::normal_distribution<double> noise(0.0, options.noise_sigma > 0 ? options.noise_sigma : 1.0);
  for (std::size_t i = 0; i < zbuf.size(); ++i) {
    if (!std::isfinite(zbuf.data[i])) continue;
    double d = zbuf.data[i];
    if (options.noise_sigma > 0) d = std::max(options.near_plane, d + noise(rng));
    f.depth.data[i] = d;
  }
  return out;
}

RgbdFrame render(const SceneSpec& scene, const CameraPose& pose, const RenderOptions& options) {
  return render_labeled(scene, pose, options).frame;
}

Vec3 back_project_pixel(const Intrinsics& k, int u, int v, double depth) {
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

Eigen::Vector2d project(const Intrinsics& k, const Vec3& p) {
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

PointCloud back_project(const RgbdFrame& frame) {
  PointCloud cloud;
  for (int v = 0; v < frame.height; ++v)
    for (int u = 0; u < frame.width; ++u)
      if (frame.valid(u, v))
        cloud.points.push_back({back_project_pixel(frame.intrinsics, u, v, frame.depth.at(u, v)), frame.color.at(u, v), u, v});
  return cloud;
}

}  // namespace tailor
