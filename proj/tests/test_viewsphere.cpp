#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "support.hpp"
#include "tailor/error.hpp"
#include "tailor/viewsphere.hpp"

using namespace tailor;
using tailor::testing::random_unit;

TEST_CASE("geodesic mesh satisfies Euler's formula with the expected counts") {
  for (int f = 1; f <= 6; ++f) {
    const GeodesicMesh m = build_geodesic_mesh(f);
    const std::size_t faces = 20 * f * f;
    CHECK(m.vertices.size() == 10u * f * f + 2);
    CHECK(m.edges.size() == 30u * f * f);
    CHECK(static_cast<long>(m.vertices.size()) - static_cast<long>(m.edges.size()) + static_cast<long>(faces) == 2);
  }
  CHECK(build_geodesic_mesh(1).vertices.size() == 12);
  CHECK(build_geodesic_mesh(4).vertices.size() == 162);
}

TEST_CASE("geodesic mesh vertices are distinct unit vectors with a vertex at each pole") {
  const GeodesicMesh m = build_geodesic_mesh(4);
  bool north = false, south = false;
  for (const auto& v : m.vertices) {
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    north |= (v - Vec3::UnitZ()).norm() < 1e-12;
    south |= (v + Vec3::UnitZ()).norm() < 1e-12;
  }
  CHECK(north);
  CHECK(south);
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < m.vertices.size(); ++j) REQUIRE((m.vertices[i] - m.vertices[j]).norm() > 1e-6);
}

TEST_CASE("every vertex of the full subdivision has five or six neighbors") {
  const ViewSphere s(4, 350.0, -1.0);
  REQUIRE(s.size() == 162);
  int fives = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto n = s.neighbors(i).size();
    CHECK((n == 5 || n == 6));
    fives += n == 5;
  }
  CHECK(fives == 12);
}

TEST_CASE("cutoff keeps exactly the vertices at or above it") {
  const GeodesicMesh m = build_geodesic_mesh(4);
  for (double cutoff : {-1.0, -0.5, -0.1, 0.0, 0.3, 0.9}) {
    std::size_t expected = 0;
    for (const auto& v : m.vertices) expected += v.z() >= cutoff - 1e-12;
    const ViewSphere s(4, 350.0, cutoff);
    CHECK(s.size() == expected);
    for (const auto& d : s.directions()) CHECK(d.z() >= cutoff - 1e-12);
  }
  CHECK(ViewSphere(4, 350.0, -0.1).size() == 91);
}

TEST_CASE("view order starts at the top and descends in height") {
  const ViewSphere s(4, 350.0, -0.1);
  CHECK((s.direction(0) - Vec3::UnitZ()).norm() < 1e-12);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.direction(i).z() <= s.direction(i - 1).z() + 1e-9);
}

TEST_CASE("adjacency equals the mesh edges restricted to kept views") {
  const GeodesicMesh m = build_geodesic_mesh(4);
  const ViewSphere s(4, 350.0, -0.1);
  auto view_of = [&](const Vec3& v) {
    for (std::size_t i = 0; i < s.size(); ++i)
      if ((s.direction(i) - v).norm() < 1e-12) return static_cast<int>(i);
    return -1;
  };
  std::set<std::pair<int, int>> expected;
  for (auto [a, b] : m.edges) {
    const int va = view_of(m.vertices[a]), vb = view_of(m.vertices[b]);
    if (va >= 0 && vb >= 0) expected.insert({std::min(va, vb), std::max(va, vb)});
  }
  std::set<std::pair<int, int>> actual;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (int j : s.neighbors(i)) {
      CHECK(j != static_cast<int>(i));
      actual.insert({std::min<int>(i, j), std::max<int>(i, j)});
      const auto& back = s.neighbors(j);
      CHECK(std::find(back.begin(), back.end(), static_cast<int>(i)) != back.end());
    }
  CHECK(actual == expected);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.neighbors(i).size() >= 3);
    CHECK(s.neighbors(i).size() <= 6);
    CHECK(std::is_sorted(s.neighbors(i).begin(), s.neighbors(i).end()));
  }
}

TEST_CASE("neighbor spacing is at least the minimum edge angle") {
  const ViewSphere s(4, 350.0, -0.1);
  CHECK(s.min_edge_angle() > 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (int j : s.neighbors(i)) CHECK(geodesic_distance(s.direction(i), s.direction(j)) >= s.min_edge_angle() - 1e-12);
}

TEST_CASE("geodesic distance is a metric on random unit vectors") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const Vec3 a = random_unit(rng), b = random_unit(rng), c = random_unit(rng);
    const double ab = geodesic_distance(a, b), ba = geodesic_distance(b, a);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab <= std::numbers::pi);
    CHECK(geodesic_distance(a, c) <= ab + geodesic_distance(b, c) + 1e-12);
    CHECK(geodesic_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(geodesic_distance(a, -a) - std::numbers::pi) < 1e-9);
  }
}

TEST_CASE("geodesic distance matches the angle from the dot product") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Vec3 a = random_unit(rng), b = random_unit(rng);
    CHECK(std::abs(geodesic_distance(a, b) - std::acos(std::clamp(a.dot(b), -1.0, 1.0))) < 1e-7);
  }
}

TEST_CASE("geodesic distance rejects non-unit input") {
  CHECK_THROWS_AS(geodesic_distance(Vec3(2, 0, 0), Vec3::UnitX()), Error);
}

TEST_CASE("invalid sphere parameters are rejected") {
  CHECK_THROWS_AS(ViewSphere(0, 350.0, -0.1), Error);
  CHECK_THROWS_AS(ViewSphere(4, -1.0, -0.1), Error);
  CHECK_THROWS_AS(ViewSphere(4, 350.0, 1.5), Error);
  const ViewSphere s(4, 350.0, -0.1);
  CHECK_THROWS_AS(s.direction(s.size()), Error);
}

TEST_CASE("look_at produces a right-handed frame aimed at the target") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 pos = random_unit(rng) * 350.0;
    const Vec3 target(10.0, -5.0, 20.0);
    const CameraPose p = look_at(pos, target);
    CHECK((p.rotation.transpose() * p.rotation - Mat3::Identity()).norm() < 1e-12);
    CHECK(p.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((p.optical_axis() - (target - pos).normalized()).norm() < 1e-12);
    const Vec3 c = p.to_camera(target);
    CHECK(std::abs(c.x()) < 1e-9);
    CHECK(std::abs(c.y()) < 1e-9);
    CHECK(c.z() == doctest::Approx((target - pos).norm()));
    CHECK((p.to_world(c) - target).norm() < 1e-9);
  }
}

TEST_CASE("top view uses the fallback up hint") {
  const ViewSphere s(4, 350.0, -0.1);
  const CameraPose p = camera_pose_for(s, 0, Vec3::Zero());
  CHECK((p.position - Vec3(0, 0, 350)).norm() < 1e-9);
  CHECK((p.optical_axis() + Vec3::UnitZ()).norm() < 1e-12);
  CHECK(std::isfinite(p.rotation.determinant()));
  CHECK(p.rotation.determinant() == doctest::Approx(1.0));
}

TEST_CASE("camera poses sit on the sphere around the target") {
  const ViewSphere s(4, 350.0, -0.1);
  const Vec3 target(0, 0, 30);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const CameraPose p = camera_pose_for(s, i, target);
    CHECK((p.position - target).norm() == doctest::Approx(350.0));
    CHECK((p.position - target - 350.0 * s.direction(i)).norm() < 1e-9);
  }
}
