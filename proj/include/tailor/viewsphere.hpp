#pragma once

#include <vector>

#include "tailor/image.hpp"

namespace tailor {

// Candidate camera viewpoints on a geodesic (subdivided icosahedron) sphere
// around the object, filtered to a cap z >= cutoff. Index 0 is the top view.
class ViewSphere {
public:
  ViewSphere(int frequency, double radius, double cutoff);

  int frequency() const { return frequency_; }
  double radius() const { return radius_; }
  double cutoff() const { return cutoff_; }
  std::size_t size() const { return directions_.size(); }
  bool empty() const { return directions_.empty(); }

  const Vec3& direction(std::size_t index) const;
  const std::vector<Vec3>& directions() const { return directions_; }
  const std::vector<int>& neighbors(std::size_t index) const;

  // Shortest edge of the full subdivision mesh, in radians.
  double min_edge_angle() const { return min_edge_angle_; }

private:
  int frequency_;
  double radius_;
  double cutoff_;
  double min_edge_angle_ = 0.0;
  std::vector<Vec3> directions_;
  std::vector<std::vector<int>> adjacency_;
};

// Subdivision vertices and edges before any cutoff is applied.
struct GeodesicMesh {
  std::vector<Vec3> vertices;
  std::vector<std::pair<int, int>> edges;  // i < j, sorted
};

GeodesicMesh build_geodesic_mesh(int frequency);

ViewSphere build_view_sphere(int frequency, double radius, double cutoff);

// Great-circle angle between two unit vectors.
double geodesic_distance(const Vec3& a, const Vec3& b);

struct CameraPose {
  Vec3 position = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();  // columns: camera x (right), y (down), z (optical axis) in world
  Vec3 up_hint = Vec3::UnitY();

  Vec3 optical_axis() const { return rotation.col(2); }
  Vec3 to_camera(const Vec3& world) const { return rotation.transpose() * (world - position); }
  Vec3 to_world(const Vec3& cam) const { return rotation * cam + position; }
};

// Camera at `position` looking at `target`. The up hint fixes roll; when it is
// parallel to the optical axis the fallback hint (1,0,0) is used instead.
CameraPose look_at(const Vec3& position, const Vec3& target, const Vec3& up_hint = Vec3::UnitY());

CameraPose camera_pose_for(const ViewSphere& sphere, std::size_t index, const Vec3& target);

}  // namespace tailor
