#include "tailor/viewsphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "tailor/error.hpp"

namespace tailor {
namespace {

constexpr double kUnitTolerance = 1e-6;

// Icosahedron with one vertex on each pole: two staggered rings of five at
// z = +-1/sqrt(5).
std::vector<Vec3> icosahedron_vertices() {
  std::vector<Vec3> v;
  v.emplace_back(0, 0, 1);
  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0;
    v.emplace_back(r * std::cos(a), r * std::sin(a), z);
  }
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * (k + 0.5) / 5.0;
    v.emplace_back(r * std::cos(a), r * std::sin(a), -z);
  }
  v.emplace_back(0, 0, -1);
  return v;
}

std::vector<std::array<int, 3>> icosahedron_faces() {
  std::vector<std::array<int, 3>> f;
  for (int k = 0; k < 5; ++k) {
    const int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const int l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    f.push_back({0, u0, u1});
    f.push_back({u0, l0, u1});
    f.push_back({u1, l0, l1});
    f.push_back({11, l1, l0});
  }
  return f;
}

// A subdivision vertex is identified by its integer barycentric weights over
// icosahedron corners, which makes vertices shared between faces collide exactly.
using LatticeKey = std::vector<std::pair<int, int>>;

LatticeKey lattice_key(const std::array<int, 3>& corners, const std::array<int, 3>& weights) {
  LatticeKey key;
  for (int c = 0; c < 3; ++c)
    if (weights[c] > 0) key.emplace_back(corners[c], weights[c]);
  std::sort(key.begin(), key.end());
  return key;
}

double azimuth(const Vec3& d) {
  double a = std::atan2(d.y(), d.x());
  if (a < 0) a += 2.0 * std::numbers::pi;
  if (std::abs(d.x()) < 1e-12 && std::abs(d.y()) < 1e-12) a = 0.0;
  return a;
}

}  // namespace

GeodesicMesh build_geodesic_mesh(int frequency) {
  require(frequency >= 1, "view sphere frequency must be >= 1");
  const auto corners = icosahedron_vertices();
  const auto faces = icosahedron_faces();
  const int f = frequency;

  GeodesicMesh mesh;
  std::map<LatticeKey, int> ids;
  std::set<std::pair<int, int>> edges;

  auto vertex_id = [&](const std::array<int, 3>& face, int i, int j, int k) {
    auto key = lattice_key(face, {i, j, k});
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    Vec3 p = Vec3::Zero();
    for (const auto& [corner, w] : key) p += static_cast<double>(w) * corners[corner];
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(p.normalized());
    ids.emplace(std::move(key), id);
    return id;
  };
  auto add_edge = [&](int a, int b) { edges.emplace(std::min(a, b), std::max(a, b)); };

  for (const auto& face : faces) {
    // Lattice point (i, j, k) with i + j + k = f; i weights corner 0.
    for (int i = 0; i <= f; ++i) {
      for (int j = 0; j <= f - i; ++j) {
        const int k = f - i - j;
        const int here = vertex_id(face, i, j, k);
        if (i > 0) {
          add_edge(here, vertex_id(face, i - 1, j + 1, k));
          add_edge(here, vertex_id(face, i - 1, j, k + 1));
        }
        if (j > 0) add_edge(here, vertex_id(face, i, j - 1, k + 1));
      }
    }
  }
  mesh.edges.assign(edges.begin(), edges.end());
  return mesh;
}

ViewSphere::ViewSphere(int frequency, double radius, double cutoff)
    : frequency_(frequency), radius_(radius), cutoff_(cutoff) {
  require(frequency >= 1, "view sphere frequency must be >= 1");
  require(radius > 0.0 && std::isfinite(radius), "view sphere radius must be positive");
  require(cutoff >= -1.0 && cutoff <= 1.0, "view sphere cutoff must lie in [-1, 1]");

  const GeodesicMesh mesh = build_geodesic_mesh(frequency);

  min_edge_angle_ = std::numbers::pi;
  for (const auto& [a, b] : mesh.edges)
    min_edge_angle_ = std::min(min_edge_angle_, geodesic_distance(mesh.vertices[a], mesh.vertices[b]));

  // Descending z (quantized so ring members compare equal), then ascending azimuth.
  std::vector<int> order;
  for (int i = 0; i < static_cast<int>(mesh.vertices.size()); ++i)
    if (mesh.vertices[i].z() >= cutoff) order.push_back(i);
  auto zkey = [&](int i) { return std::llround(mesh.vertices[i].z() * 1e9); };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (zkey(a) != zkey(b)) return zkey(a) > zkey(b);
    const double aa = azimuth(mesh.vertices[a]), ab = azimuth(mesh.vertices[b]);
    if (aa != ab) return aa < ab;
    return a < b;
  });

  std::vector<int> remap(mesh.vertices.size(), -1);
  for (std::size_t n = 0; n < order.size(); ++n) {
    remap[order[n]] = static_cast<int>(n);
    directions_.push_back(mesh.vertices[order[n]]);
  }
  adjacency_.resize(order.size());
  for (const auto& [a, b] : mesh.edges) {
    if (remap[a] < 0 || remap[b] < 0) continue;
    adjacency_[remap[a]].push_back(remap[b]);
    adjacency_[remap[b]].push_back(remap[a]);
  }
  for (auto& n : adjacency_) std::sort(n.begin(), n.end());
}

const Vec3& ViewSphere::direction(std::size_t index) const {
  if (index >= directions_.size()) fail(ErrorCode::InvalidArgument, "view index out of range");
  return directions_[index];
}

const std::vector<int>& ViewSphere::neighbors(std::size_t index) const {
  if (index >= adjacency_.size()) fail(ErrorCode::InvalidArgument, "view index out of range");
  return adjacency_[index];
}

ViewSphere build_view_sphere(int frequency, double radius, double cutoff) {
  return ViewSphere(frequency, radius, cutoff);
}

double geodesic_distance(const Vec3& a, const Vec3& b) {
  if (std::abs(a.norm() - 1.0) > kUnitTolerance || std::abs(b.norm() - 1.0) > kUnitTolerance)
    fail(ErrorCode::InvalidArgument, "geodesic_distance expects unit vectors");
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

CameraPose look_at(const Vec3& position, const Vec3& target, const Vec3& up_hint) {
  const Vec3 forward = (target - position).normalized();
  require(std::isfinite(forward.x()) && (target - position).norm() > 0, "camera position equals target");
  Vec3 right = forward.cross(up_hint);
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitX());
  right.normalize();
  const Vec3 down = forward.cross(right);

  CameraPose pose;
  pose.position = position;
  pose.up_hint = up_hint;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  return pose;
}

CameraPose camera_pose_for(const ViewSphere& sphere, std::size_t index, const Vec3& target) {
  const Vec3& d = sphere.direction(index);
  return look_at(target + sphere.radius() * d, target);
}

}  // namespace tailor
