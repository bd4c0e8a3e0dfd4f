#include "tailor/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tailor/error.hpp"
#include "tailor/gov.hpp"

namespace tailor {
namespace {

// Integral of t^p over [c - 1/2, c + 1/2].
double unit_interval_moment(int p, double c) {
  switch (p) {
    case 0: return 1.0;
    case 1: return c;
    case 2: return c * c + 1.0 / 12.0;
    case 3: return c * c * c + c / 4.0;
  }
  return 0.0;
}

}  // namespace

std::array<double, 7> hu_moments(const ObjectMask& mask) {
  require(mask.pixel_count > 0, "Hu moments need a nonempty mask");
  double sx = 0, sy = 0;
  for (int v = 0; v < mask.bits.height; ++v)
    for (int u = 0; u < mask.bits.width; ++u)
      if (mask.bits.at(u, v)) {
        sx += u;
        sy += v;
      }
  const double n = static_cast<double>(mask.pixel_count);
  const double cx = sx / n, cy = sy / n;

  double mu[4][4] = {};
  for (int v = 0; v < mask.bits.height; ++v) {
    for (int u = 0; u < mask.bits.width; ++u) {
      if (!mask.bits.at(u, v)) continue;
      const double dx = u - cx, dy = v - cy;
      for (int p = 0; p <= 3; ++p)
        for (int q = 0; p + q <= 3; ++q) mu[p][q] += unit_interval_moment(p, dx) * unit_interval_moment(q, dy);
    }
  }
  auto eta = [&](int p, int q) { return mu[p][q] / std::pow(mu[0][0], 1.0 + (p + q) / 2.0); };
  const double n20 = eta(2, 0), n02 = eta(0, 2), n11 = eta(1, 1);
  const double n30 = eta(3, 0), n03 = eta(0, 3), n21 = eta(2, 1), n12 = eta(1, 2);
  const double a = n30 + n12, b = n21 + n03;
  std::array<double, 7> h;
  h[0] = n20 + n02;
  h[1] = (n20 - n02) * (n20 - n02) + 4 * n11 * n11;
  h[2] = (n30 - 3 * n12) * (n30 - 3 * n12) + (3 * n21 - n03) * (3 * n21 - n03);
  h[3] = a * a + b * b;
  h[4] = (n30 - 3 * n12) * a * (a * a - 3 * b * b) + (3 * n21 - n03) * b * (3 * a * a - b * b);
  h[5] = (n20 - n02) * (a * a - b * b) + 4 * n11 * a * b;
  h[6] = (3 * n21 - n03) * a * (a * a - 3 * b * b) - (n30 - 3 * n12) * b * (3 * a * a - b * b);
  return h;
}

double signed_log_scale(double h) {
  const double m = std::log10(1.0 + 1000.0 * std::abs(h)) / 3.0;
  return h < 0 ? -m : m;
}

FeatureVector extract_features(const ColorImage& image, const ObjectMask& mask) {
  if (mask.pixel_count == 0) fail(ErrorCode::InvalidArgument, "cannot extract features from an empty mask");
  require(mask.bits.width == image.width && mask.bits.height == image.height, "mask and image dimensions differ");
  FeatureVector f{};
  const auto hist = color_histogram(image, mask, 30, 8);
  double total = 0;
  for (double c : hist) total += c;
  for (int i = 0; i < kHistogramDims; ++i) f[i] = total > 0 ? hist[i] / total : 0.0;

  const auto hu = hu_moments(mask);
  for (int i = 0; i < kHuDims; ++i) f[kHistogramDims + i] = signed_log_scale(hu[i]);

  const BoundingBox& bb = mask.bbox;
  const double fill = static_cast<double>(mask.pixel_count) / bb.area();
  const double aspect = static_cast<double>(std::min(bb.width, bb.height)) / std::max(bb.width, bb.height);
  const double silhouette =
      std::min(1.0, static_cast<double>(boundary_pixel_count(mask)) / (2.0 * (bb.width + bb.height)));
  f[kHistogramDims + kHuDims + 0] = fill;
  f[kHistogramDims + kHuDims + 1] = aspect;
  f[kHistogramDims + kHuDims + 2] = silhouette;
  return f;
}

double feature_distance(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (int i = 0; i < kFeatureDims; ++i) {
    const double w = (i >= kHistogramDims && i < kHistogramDims + kHuDims) ? 0.5 : 1.0;
    const double d = w * (a[i] - b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

Registry::Registry(double unknown_threshold) : threshold_(unknown_threshold) {
  require(unknown_threshold > 0.0 && std::isfinite(unknown_threshold), "detector threshold must be positive");
}

const ObjectModel& Registry::register_object(const std::string& name, std::vector<FeatureVector> exemplars) {
  require(!name.empty(), "object name must be nonempty");
  if (contains(name)) fail(ErrorCode::State, "object '" + name + "' is already registered");
  require(!exemplars.empty(), "registration needs at least one sample");
  ObjectModel m;
  m.name = name;
  m.ordinal = next_ordinal_++;
  m.exemplars = std::move(exemplars);
  index_.emplace(name, models_.size());
  models_.push_back(std::move(m));
  return models_.back();
}

void Registry::append_exemplars(const std::string& name, const std::vector<FeatureVector>& exemplars) {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::NotFound, "object '" + name + "' is not registered");
  auto& ex = models_[it->second].exemplars;
  ex.insert(ex.end(), exemplars.begin(), exemplars.end());
}

const ObjectModel& Registry::model(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(ErrorCode::NotFound, "object '" + name + "' is not registered");
  return models_[it->second];
}

void Registry::restore(ObjectModel model) {
  require(!model.name.empty(), "object name must be nonempty");
  if (contains(model.name)) fail(ErrorCode::Parse, "duplicate object name '" + model.name + "'");
  if (model.ordinal < next_ordinal_) fail(ErrorCode::Parse, "registration ordinals must increase");
  require(!model.exemplars.empty(), "object model needs at least one exemplar");
  next_ordinal_ = model.ordinal + 1;
  index_.emplace(model.name, models_.size());
  models_.push_back(std::move(model));
}

Registry& register_object(Registry& registry, const std::string& name, const std::vector<TrainingSample>& samples) {
  if (samples.empty()) fail(ErrorCode::InvalidArgument, "registration needs at least one sample");
  if (registry.contains(name)) fail(ErrorCode::State, "object '" + name + "' is already registered");
  std::vector<FeatureVector> features;
  features.reserve(samples.size());
  for (const auto& s : samples) features.push_back(extract_features(s.image, s.mask));
  registry.register_object(name, std::move(features));
  return registry;
}

Classification classify_proposal(const Registry& registry, const FeatureVector& features) {
  Classification c;
  c.label = kUnknownLabel;
  c.distance = std::numeric_limits<double>::max();
  for (const auto& m : registry.models()) {
    for (const auto& e : m.exemplars) {
      const double dist = feature_distance(features, e);
      if (dist < c.distance) {
        c.distance = dist;
        c.label = m.name;
      }
    }
  }
  if (c.distance > registry.unknown_threshold()) c.label = kUnknownLabel;
  c.score = 1.0 / (1.0 + c.distance);
  return c;
}

std::vector<Detection> detect(const Registry& registry, const RgbdFrame& frame, const PlaneModel& plane,
                              const SegmentParams& segmentation) {
  std::vector<Detection> out;
  for (auto& mask : extract_object_masks(frame, plane, segmentation)) {
    const Classification c = classify_proposal(registry, extract_features(frame.color, mask));
    Detection d;
    d.label = c.label;
    d.distance = c.distance;
    d.score = c.score;
    d.bbox = mask.bbox;
    d.mask = std::move(mask);
    out.push_back(std::move(d));
  }
  return out;
}

std::optional<Detection> query(const Registry& registry, const RgbdFrame& frame, const PlaneModel& plane,
                               const std::string& name, const SegmentParams& segmentation) {
  if (!registry.contains(name)) fail(ErrorCode::NotFound, "I don't know the object '" + name + "'");
  std::optional<Detection> best;
  for (auto& d : detect(registry, frame, plane, segmentation))
    if (d.label == name && (!best || d.score > best->score)) best = std::move(d);
  return best;
}

}  // namespace tailor
