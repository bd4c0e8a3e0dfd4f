#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "tailor/augmenter.hpp"
#include "tailor/error.hpp"
#include "tailor/scenes.hpp"
#include "tailor/store.hpp"

using namespace tailor;
using namespace tailor::testing;

namespace {

// 10x6 rectangle with its centroid on the half-pixel point (14.5, 22.5) and a
// notch at its top-left corner so mirror images differ.
TrainingSample notched_sample() {
  const int w = 40, h = 40;
  MaskImage bits(w, h, 0);
  ColorImage img(w, h, Rgb{10, 200, 30});
  for (int v = 20; v < 26; ++v)
    for (int u = 10; u < 20; ++u) {
      bits.at(u, v) = 1;
      img.at(u, v) = Rgb{static_cast<std::uint8_t>(100 + u), static_cast<std::uint8_t>(50 + v), 7};
    }
  TrainingSample t;
  t.image = img;
  t.mask = make_mask(bits);
  t.label = "part";
  t.source_view = 4;
  return t;
}

Augment2dParams single(double rot, bool flip, std::optional<Rgb> bg = std::nullopt) {
  return {{rot}, {1.0}, {flip}, {bg}};
}

}  // namespace

TEST_CASE("2D grid yields one sample per combination") {
  const auto out = augment_2d(notched_sample(), Augment2dParams{});
  CHECK(out.size() == 4 * 3 * 2 * 2);
  for (const auto& s : out) {
    CHECK(s.label == "part");
    CHECK(s.source_view == 4);
    CHECK(!s.transform.empty());
  }
  CHECK(out.front().transform == "rot=0 scale=0.8 flip=0 bg=40,40,40");
}

TEST_CASE("identity augmentation reproduces the input") {
  const TrainingSample in = notched_sample();
  const auto out = augment_2d(in, Augment2dParams::identity());
  REQUIRE(out.size() == 1);
  CHECK(out[0].image == in.image);
  CHECK(out[0].mask.bits == in.mask.bits);
}

TEST_CASE("quarter turns about a half-pixel centroid are exact") {
  const TrainingSample in = notched_sample();
  for (double rot : {90.0, -90.0, 180.0, 270.0}) {
    const auto out = augment_2d(in, single(rot, false));
    REQUIRE(out.size() == 1);
    // Oracle: map every source pixel through the rotation about (14.5, 22.5).
    const double a = rot * std::numbers::pi / 180.0;
    MaskImage expect(40, 40, 0);
    for (int v = 0; v < 40; ++v)
      for (int u = 0; u < 40; ++u) {
        if (!in.mask.test(u, v)) continue;
        const double x = u - 14.5, y = v - 22.5;
        const int qu = static_cast<int>(std::lround(std::cos(a) * x - std::sin(a) * y + 14.5));
        const int qv = static_cast<int>(std::lround(std::sin(a) * x + std::cos(a) * y + 22.5));
        expect.at(qu, qv) = 1;
      }
    CHECK(out[0].mask.bits == expect);
    CHECK(out[0].mask.pixel_count == 60);
  }
}

TEST_CASE("flip mirrors horizontally about the centroid") {
  const TrainingSample in = notched_sample();
  const auto out = augment_2d(in, single(0.0, true));
  REQUIRE(out.size() == 1);
  for (int v = 0; v < 40; ++v)
    for (int u = 0; u < 40; ++u) {
      const int mu = static_cast<int>(std::lround(2 * 14.5 - u));
      const bool src = mu >= 0 && mu < 40 && in.mask.test(mu, v);
      CHECK(out[0].mask.test(u, v) == src);
      if (src) CHECK(out[0].image.at(u, v) == in.image.at(mu, v));
    }
  const auto twice = augment_2d(out[0], single(0.0, true));
  CHECK(twice[0].mask.bits == in.mask.bits);
  for (int v = 0; v < 40; ++v)
    for (int u = 0; u < 40; ++u)
      if (in.mask.test(u, v)) CHECK(twice[0].image.at(u, v) == in.image.at(u, v));
}

TEST_CASE("background replacement fills everything outside the mask") {
  const Rgb bg{1, 2, 3};
  const auto out = augment_2d(notched_sample(), single(15.0, false, bg));
  REQUIRE(out.size() == 1);
  for (int v = 0; v < 40; ++v)
    for (int u = 0; u < 40; ++u)
      if (!out[0].mask.test(u, v)) CHECK(out[0].image.at(u, v) == bg);
}

TEST_CASE("scaling changes the mask area by roughly the squared factor") {
  const auto out = augment_2d(notched_sample(), Augment2dParams{{0.0}, {2.0}, {false}, {std::nullopt}});
  CHECK(out[0].mask.pixel_count == doctest::Approx(240).epsilon(0.1));
}

TEST_CASE("2D augmentation validates its inputs") {
  TrainingSample t = notched_sample();
  CHECK_THROWS_AS(augment_2d(t, Augment2dParams{{0.0}, {0.0}, {false}, {std::nullopt}}), Error);
  t.label.clear();
  CHECK_THROWS_AS(augment_2d(t, Augment2dParams{}), Error);
}

TEST_CASE("cone directions sit at the requested angle from the axis") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 axis = random_unit(rng);
    const double angle = 0.39 * u(rng), az = 2.0 * std::numbers::pi * u(rng);
    const Vec3 d = cone_direction(axis, angle, az);
    CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(angle_between(axis, d) == doctest::Approx(angle).epsilon(1e-7));
  }
}

TEST_CASE("3D re-rendering: zero jitter repeats the canonical view") {
  const SceneSpec scene = sample_cube_scene();
  const Config cfg;
  const ViewSphere s = cfg.make_sphere();
  const int view = 20;
  const Capture canonical = capture_view(scene, camera_pose_for(s, view, scene.object_center()), cfg.perception());
  REQUIRE(canonical.mask);
  const auto r = augment_3d(scene, s, view, Augment3dParams{0.0, 3, 5}, cfg.perception(), "cube");
  CHECK(r.shortfall == 0);
  REQUIRE(r.samples.size() == 3);
  for (const auto& t : r.samples) {
    CHECK(t.mask.bits == canonical.mask->bits);
    CHECK(t.image == canonical.frame.color);
  }
}

TEST_CASE("3D re-rendering: jittered draws stay close to the canonical view") {
  const SceneSpec scene = sample_cube_scene();
  const Config cfg;
  const ViewSphere s = cfg.make_sphere();
  const int view = 20;
  const Capture canonical = capture_view(scene, camera_pose_for(s, view, scene.object_center()), cfg.perception());
  REQUIRE(canonical.mask);
  const auto r = augment_3d(scene, s, view, Augment3dParams{0.1, 20, 9}, cfg.perception(), "cube");
  CHECK(r.samples.size() + r.shortfall == 20);
  CHECK(r.samples.size() == 20);
  for (const auto& t : r.samples) {
    CHECK(t.mask.pixel_count == doctest::Approx(canonical.mask->pixel_count).epsilon(0.2));
    CHECK(t.source_view == view);
  }
  const auto again = augment_3d(scene, s, view, Augment3dParams{0.1, 20, 9}, cfg.perception(), "cube");
  for (std::size_t i = 0; i < r.samples.size(); ++i) CHECK(again.samples[i].image == r.samples[i].image);
  const auto other = augment_3d(scene, s, view, Augment3dParams{0.1, 20, 10}, cfg.perception(), "cube");
  CHECK(other.samples.front().transform != r.samples.front().transform);
}

TEST_CASE("3D re-rendering validates jitter and count") {
  const SceneSpec scene = sample_cube_scene();
  const Config cfg;
  const ViewSphere s = cfg.make_sphere();
  CHECK_THROWS_AS(augment_3d(scene, s, 0, Augment3dParams{std::numbers::pi / 8, 1, 0}, cfg.perception(), "x"), Error);
  CHECK_THROWS_AS(augment_3d(scene, s, 0, Augment3dParams{0.05, -1, 0}, cfg.perception(), "x"), Error);
}

TEST_CASE("view seeds differ per view and are stable") {
  CHECK(view_seed(11, 0) != view_seed(11, 1));
  CHECK(view_seed(11, 5) == view_seed(11, 5));
}
