#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tailor/augmenter.hpp"
#include "tailor/segmenter.hpp"

namespace tailor {

// Layout: 38 color-histogram bins (30 hue + 8 gray, L1-normalized), 7 scaled
// Hu invariants, then fill ratio, aspect ratio, normalized silhouette.
inline constexpr int kHistogramDims = 38;
inline constexpr int kHuDims = 7;
inline constexpr int kGeometricDims = 3;
inline constexpr int kFeatureDims = kHistogramDims + kHuDims + kGeometricDims;
using FeatureVector = std::array<double, kFeatureDims>;

// Hu's seven moment invariants of a binary mask, with each pixel integrated
// as a unit square.
std::array<double, 7> hu_moments(const ObjectMask& mask);

// sign(h) * log10(1 + 1000 |h|) / 3
double signed_log_scale(double h);

FeatureVector extract_features(const ColorImage& image, const ObjectMask& mask);

// Euclidean distance with per-block weights (histogram 1, Hu 0.5, geometric 1).
double feature_distance(const FeatureVector& a, const FeatureVector& b);

inline constexpr const char* kUnknownLabel = "unknown";

struct ObjectModel {
  std::string name;
  int ordinal = 0;
  std::vector<FeatureVector> exemplars;
  friend bool operator==(const ObjectModel&, const ObjectModel&) = default;
};

// Append-only collection of object models. Adding a model never reads or
// writes an existing one, so earlier registrations cannot be forgotten.
class Registry {
public:
  static constexpr int kFormatVersion = 1;

  explicit Registry(double unknown_threshold = 0.6);

  const ObjectModel& register_object(const std::string& name, std::vector<FeatureVector> exemplars);
  // Appends further exemplars to an existing model (used by the flip pass).
  void append_exemplars(const std::string& name, const std::vector<FeatureVector>& exemplars);

  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  const ObjectModel& model(const std::string& name) const;
  const std::vector<ObjectModel>& models() const { return models_; }
  std::size_t size() const { return models_.size(); }
  bool empty() const { return models_.empty(); }
  double unknown_threshold() const { return threshold_; }
  int next_ordinal() const { return next_ordinal_; }

  // Used by the loader; ordinals must increase.
  void restore(ObjectModel model);

  friend bool operator==(const Registry&, const Registry&) = default;

private:
  double threshold_;
  int next_ordinal_ = 0;
  std::vector<ObjectModel> models_;
  std::map<std::string, std::size_t> index_;
};

Registry& register_object(Registry& registry, const std::string& name, const std::vector<TrainingSample>& samples);

struct Classification {
  std::string label;
  double score = 0.0;
  double distance = 0.0;
};

// Nearest exemplar over all models; "unknown" beyond the registry threshold.
Classification classify_proposal(const Registry& registry, const FeatureVector& features);

struct Detection {
  std::string label;
  BoundingBox bbox;
  double score = 0.0;  // 1 / (1 + distance)
  double distance = 0.0;
  ObjectMask mask;
  friend bool operator==(const Detection&, const Detection&) = default;
};

std::vector<Detection> detect(const Registry& registry, const RgbdFrame& frame, const PlaneModel& plane,
                              const SegmentParams& segmentation);

// Highest-scoring detection labeled `name`; throws NotFound for unregistered names.
std::optional<Detection> query(const Registry& registry, const RgbdFrame& frame, const PlaneModel& plane,
                               const std::string& name, const SegmentParams& segmentation = {});

}  // namespace tailor
