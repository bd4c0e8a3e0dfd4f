#include "tailor/gov.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "tailor/error.hpp"

namespace tailor {
namespace {

int bin_of(double x, double lo, double hi, int bins) {
  const int b = static_cast<int>(std::floor((x - lo) / (hi - lo) * bins));
  return std::clamp(b, 0, bins - 1);
}

struct Hsv {
  double h, s, v;
};

Hsv to_hsv(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0) {
    if (mx == r) h = 60.0 * std::fmod((g - b) / d, 6.0);
    else if (mx == g) h = 60.0 * ((b - r) / d + 2.0);
    else h = 60.0 * ((r - g) / d + 4.0);
    if (h < 0) h += 360.0;
  }
  return {h, mx > 0 ? d / mx : 0.0, mx};
}

}  // namespace

void GovWeights::validate() const {
  for (double w : as_array()) require(w >= 0.0 && std::isfinite(w), "gov.weights must be nonnegative");
  const double s = silhouette + depth + curvature + color;
  require(std::abs(s - 1.0) <= 1e-9, "gov.weights must sum to 1");
}

double normalized_entropy(const std::vector<double>& histogram) {
  if (histogram.size() < 2) return 0.0;
  double total = 0.0;
  for (double c : histogram) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : histogram) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return std::clamp(h / std::log2(static_cast<double>(histogram.size())), 0.0, 1.0);
}

std::size_t boundary_pixel_count(const ObjectMask& mask) {
  std::size_t n = 0;
  const auto& b = mask.bits;
  for (int v = 0; v < b.height; ++v) {
    for (int u = 0; u < b.width; ++u) {
      if (!b.at(u, v)) continue;
      if (!mask.test(u - 1, v) || !mask.test(u + 1, v) || !mask.test(u, v - 1) || !mask.test(u, v + 1)) ++n;
    }
  }
  return n;
}

double silhouette_length(const ObjectMask& mask, int frame_width, int frame_height) {
  if (mask.pixel_count == 0) return 0.0;
  const double norm = 2.0 * (frame_width + frame_height);
  return std::min(1.0, static_cast<double>(boundary_pixel_count(mask)) / norm);
}

double depth_entropy(const RgbdFrame& frame, const ObjectMask& mask, int bins) {
  require(bins >= 2, "depth entropy needs at least 2 bins");
  std::vector<double> depths;
  for (int v = 0; v < frame.height; ++v)
    for (int u = 0; u < frame.width; ++u)
      if (mask.test(u, v) && frame.valid(u, v)) depths.push_back(frame.depth.at(u, v));
  if (depths.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(depths.begin(), depths.end());
  if (*hi - *lo < 1.0) return 0.0;
  std::vector<double> hist(bins, 0.0);
  for (double d : depths) hist[bin_of(d, *lo, *hi, bins)] += 1.0;
  return normalized_entropy(hist);
}

double curvature_entropy(const RgbdFrame& frame, const ObjectMask& mask, int bins, double clamp) {
  require(bins >= 2, "curvature entropy needs at least 2 bins");
  const int w = frame.width, h = frame.height;
  auto usable = [&](int u, int v) { return mask.test(u, v) && frame.valid(u, v); };
  auto point = [&](int u, int v) { return back_project_pixel(frame.intrinsics, u, v, frame.depth.at(u, v)); };

  // Central differences, falling back to one-sided ones at the mask edge.
  auto tangent = [&](int u, int v, int du, int dv) -> std::optional<Vec3> {
    const bool fwd = usable(u + du, v + dv), back = usable(u - du, v - dv);
    if (fwd && back) return point(u + du, v + dv) - point(u - du, v - dv);
    if (fwd) return point(u + du, v + dv) - point(u, v);
    if (back) return point(u, v) - point(u - du, v - dv);
    return std::nullopt;
  };

  Grid<Vec3> normals(w, h, Vec3::Zero());
  MaskImage has(w, h, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!usable(u, v)) continue;
      const auto tu = tangent(u, v, 1, 0), tv = tangent(u, v, 0, 1);
      if (!tu || !tv) continue;
      Vec3 n = tu->cross(*tv);
      if (n.norm() < 1e-12) continue;
      normals.at(u, v) = n.normalized();
      has.at(u, v) = 1;
    }
  }

  std::vector<double> hist(bins, 0.0);
  constexpr int dx[] = {1, -1, 0, 0}, dy[] = {0, 0, 1, -1};
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!has.at(u, v)) continue;
      Vec3 mean = Vec3::Zero();
      int count = 0;
      for (int d = 0; d < 4; ++d) {
        const int x = u + dx[d], y = v + dy[d];
        if (has.contains(x, y) && has.at(x, y)) {
          mean += normals.at(x, y);
          ++count;
        }
      }
      if (count == 0 || mean.norm() < 1e-12) continue;
      const double c = std::clamp(1.0 - normals.at(u, v).dot(mean.normalized()), 0.0, clamp);
      hist[bin_of(c, 0.0, clamp, bins)] += 1.0;
    }
  }
  return normalized_entropy(hist);
}

std::vector<double> color_histogram(const ColorImage& image, const ObjectMask& mask, int hue_bins, int gray_bins) {
  require(hue_bins >= 2 && gray_bins >= 1, "color histogram needs hue_bins >= 2 and gray_bins >= 1");
  std::vector<double> hist(hue_bins + gray_bins, 0.0);
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      if (!mask.test(u, v)) continue;
      const Hsv c = to_hsv(image.at(u, v));
      if (c.s > 0.2 && c.v > 0.2)
        hist[bin_of(c.h, 0.0, 360.0, hue_bins)] += 1.0;
      else
        hist[hue_bins + bin_of(c.v, 0.0, 1.0, gray_bins)] += 1.0;
    }
  }
  return hist;
}

double color_entropy(const RgbdFrame& frame, const ObjectMask& mask, int hue_bins, int gray_bins) {
  if (mask.pixel_count == 0) return 0.0;
  return normalized_entropy(color_histogram(frame.color, mask, hue_bins, gray_bins));
}

double combined_gov(const std::array<double, 4>& components, const GovWeights& weights) {
  weights.validate();
  const auto w = weights.as_array();
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * components[i];
  return s;
}

GovScore evaluate_gov(const RgbdFrame& frame, const ObjectMask& mask, const GovWeights& weights, const GovConfig& config) {
  weights.validate();
  GovScore s;
  if (mask.pixel_count == 0) return s;
  s.silhouette = silhouette_length(mask, frame.width, frame.height);
  s.depth_entropy = depth_entropy(frame, mask, config.depth_bins);
  s.curvature_entropy = curvature_entropy(frame, mask, config.curvature_bins, config.curvature_clamp);
  s.color_entropy = color_entropy(frame, mask, config.hue_bins, config.gray_bins);
  s.combined = combined_gov(s.components(), weights);
  return s;
}

}  // namespace tailor
