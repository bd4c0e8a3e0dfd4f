#include "tailor/augmenter.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "tailor/error.hpp"

namespace tailor {
namespace {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

// Exact rotation matrix for multiples of 90 degrees.
Mat2 rotation(double degrees) {
  const double turns = degrees / 90.0;
  if (std::abs(turns - std::round(turns)) < 1e-12) {
    const int q = ((static_cast<int>(std::lround(turns)) % 4) + 4) % 4;
    constexpr int c[] = {1, 0, -1, 0}, s[] = {0, 1, 0, -1};
    Mat2 r;
    r << c[q], -s[q], s[q], c[q];
    return r;
  }
  const double a = degrees * std::numbers::pi / 180.0;
  Mat2 r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Rgb bilinear(const ColorImage& img, double x, double y, Rgb outside) {
  const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  double acc[3] = {0, 0, 0};
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const double wgt = (dx ? fx : 1 - fx) * (dy ? fy : 1 - fy);
      if (wgt == 0.0) continue;
      const Rgb c = img.contains(x0 + dx, y0 + dy) ? img.at(x0 + dx, y0 + dy) : outside;
      acc[0] += wgt * c.r;
      acc[1] += wgt * c.g;
      acc[2] += wgt * c.b;
    }
  }
  auto q = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
  return {q(acc[0]), q(acc[1]), q(acc[2])};
}

std::string describe(double rot, double scale, bool flip, const std::optional<Rgb>& bg) {
  std::ostringstream os;
  os << "rot=" << rot << " scale=" << scale << " flip=" << (flip ? 1 : 0) << " bg=";
  if (bg) os << int(bg->r) << ',' << int(bg->g) << ',' << int(bg->b);
  else os << "keep";
  return os.str();
}

}  // namespace

std::vector<TrainingSample> augment_2d(const TrainingSample& sample, const Augment2dParams& params) {
  require(sample.mask.bits.width == sample.image.width && sample.mask.bits.height == sample.image.height,
          "mask and image dimensions differ");
  require(!sample.label.empty(), "training sample needs a label");
  for (double s : params.scales) require(s > 0.0, "augmentation scale must be positive");

  Vec2 centroid = Vec2::Zero();
  if (sample.mask.pixel_count > 0) {
    for (int v = 0; v < sample.image.height; ++v)
      for (int u = 0; u < sample.image.width; ++u)
        if (sample.mask.test(u, v)) centroid += Vec2(u, v);
    centroid /= static_cast<double>(sample.mask.pixel_count);
  } else {
    centroid = Vec2((sample.image.width - 1) / 2.0, (sample.image.height - 1) / 2.0);
  }

  const int w = sample.image.width, h = sample.image.height;
  std::vector<TrainingSample> out;
  for (double rot : params.rotations_deg) {
    for (double scale : params.scales) {
      for (bool flip : params.flips) {
        Mat2 forward = scale * rotation(rot);
        if (flip) forward = forward * Eigen::DiagonalMatrix<double, 2>(-1.0, 1.0);
        // Output pixel q samples source A q + b.
        const Mat2 inv = forward.inverse();
        const Mat2 a = (scale == 1.0 && std::abs(rot / 90.0 - std::round(rot / 90.0)) < 1e-12) ? inv.array().round().matrix() : inv;
        const Vec2 b = centroid - a * centroid;

        MaskImage bits(w, h, 0);
        std::vector<Vec2> src(static_cast<std::size_t>(w) * h);
        for (int v = 0; v < h; ++v) {
          for (int u = 0; u < w; ++u) {
            const Vec2 s = a * Vec2(u, v) + b;
            src[static_cast<std::size_t>(v) * w + u] = s;
            const int su = static_cast<int>(std::floor(s.x() + 0.5)), sv = static_cast<int>(std::floor(s.y() + 0.5));
            if (sample.mask.test(su, sv)) bits.at(u, v) = 1;
          }
        }
        for (const auto& bg : params.backgrounds) {
          TrainingSample t;
          t.label = sample.label;
          t.source_view = sample.source_view;
          t.transform = describe(rot, scale, flip, bg);
          t.image = ColorImage(w, h);
          const Rgb outside = bg.value_or(Rgb{0, 0, 0});
          for (int v = 0; v < h; ++v) {
            for (int u = 0; u < w; ++u) {
              const Vec2& s = src[static_cast<std::size_t>(v) * w + u];
              if (!bits.at(u, v) && bg) t.image.at(u, v) = *bg;
              else t.image.at(u, v) = bilinear(sample.image, s.x(), s.y(), outside);
            }
          }
          t.mask = make_mask(bits);
          out.push_back(std::move(t));
        }
      }
    }
  }
  return out;
}

Vec3 cone_direction(const Vec3& axis, double angle, double azimuth) {
  const Vec3 seed = std::abs(axis.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = axis.cross(seed).normalized();
  const Vec3 e2 = axis.cross(e1);
  return (std::cos(angle) * axis + std::sin(angle) * (std::cos(azimuth) * e1 + std::sin(azimuth) * e2)).normalized();
}

Augment3dResult augment_3d(const SceneSpec& scene, const ViewSphere& sphere, int view_index,
                           const Augment3dParams& params, const PerceptionConfig& perception,
                           const std::string& label) {
  require(params.jitter >= 0.0 && params.jitter < std::numbers::pi / 8.0, "3D jitter must lie in [0, pi/8)");
  require(params.count >= 0, "3D draw count must be nonnegative");
  const Vec3 axis = sphere.direction(view_index);
  const Vec3 target = scene.object_center();

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Augment3dResult result;
  for (int i = 0; i < params.count; ++i) {
    const double angle = params.jitter * unit(rng);
    const double azimuth = 2.0 * std::numbers::pi * unit(rng);
    const Vec3 dir = params.jitter == 0.0 ? axis : cone_direction(axis, angle, azimuth);
    Capture c = capture_view(scene, look_at(target + sphere.radius() * dir, target), perception);
    if (!c.mask) {
      ++result.shortfall;
      continue;
    }
    TrainingSample t;
    t.image = std::move(c.frame.color);
    t.mask = std::move(*c.mask);
    t.label = label;
    t.source_view = view_index;
    std::ostringstream os;
    os << "jitter=" << angle << " azimuth=" << azimuth;
    t.transform = os.str();
    result.samples.push_back(std::move(t));
  }
  return result;
}

TrainingSample sample_from_view(const CanonicalView& view, const std::string& label) {
  require(view.frame && view.mask, "canonical view carries no frame");
  TrainingSample t;
  t.image = view.frame->color;
  t.mask = *view.mask;
  t.label = label;
  t.source_view = view.index;
  t.transform = "canonical";
  return t;
}

std::uint64_t view_seed(std::uint64_t seed, int view_index) {
  return seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(view_index + 1));
}

std::vector<TrainingSample> expand_views(const SceneSpec& scene, const ViewSphere& sphere,
                                         const std::vector<CanonicalView>& views, const std::string& label,
                                         const Augment2dParams& params2d, const Augment3dParams& params3d,
                                         const PerceptionConfig& perception) {
  std::vector<TrainingSample> out;
  for (const auto& view : views) {
    if (!view.mask || view.mask->pixel_count == 0) continue;
    for (auto& s : augment_2d(sample_from_view(view, label), params2d)) out.push_back(std::move(s));
    Augment3dParams p3 = params3d;
    p3.seed = view_seed(params3d.seed, view.index);
    for (auto& s : augment_3d(scene, sphere, view.index, p3, perception, label).samples) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace tailor
