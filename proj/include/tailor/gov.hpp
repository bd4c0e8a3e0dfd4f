#pragma once

#include <array>
#include <vector>

#include "tailor/renderer.hpp"
#include "tailor/segmenter.hpp"

namespace tailor {

struct GovWeights {
  double silhouette = 0.25;
  double depth = 0.25;
  double curvature = 0.25;
  double color = 0.25;

  std::array<double, 4> as_array() const { return {silhouette, depth, curvature, color}; }
  // Throws unless all weights are nonnegative and sum to 1 within 1e-9.
  void validate() const;
  friend bool operator==(const GovWeights&, const GovWeights&) = default;
};

struct GovScore {
  double silhouette = 0.0;
  double depth_entropy = 0.0;
  double curvature_entropy = 0.0;
  double color_entropy = 0.0;
  double combined = 0.0;

  std::array<double, 4> components() const { return {silhouette, depth_entropy, curvature_entropy, color_entropy}; }
  friend bool operator==(const GovScore&, const GovScore&) = default;
};

struct GovConfig {
  int depth_bins = 32;
  int curvature_bins = 32;
  int hue_bins = 30;
  int gray_bins = 8;
  double curvature_clamp = 0.2;
  friend bool operator==(const GovConfig&, const GovConfig&) = default;
};

// Shannon entropy (bits) of a histogram divided by log2(bins); 0 for an empty histogram.
double normalized_entropy(const std::vector<double>& histogram);

double silhouette_length(const ObjectMask& mask, int frame_width, int frame_height);
double depth_entropy(const RgbdFrame& frame, const ObjectMask& mask, int bins);
double curvature_entropy(const RgbdFrame& frame, const ObjectMask& mask, int bins, double clamp = 0.2);
double color_entropy(const RgbdFrame& frame, const ObjectMask& mask, int hue_bins, int gray_bins);

// HSV-gated color histogram over the mask: hue_bins hue bins for chromatic
// pixels (s > 0.2, v > 0.2), then gray_bins value bins for the rest. Raw counts.
std::vector<double> color_histogram(const ColorImage& image, const ObjectMask& mask, int hue_bins, int gray_bins);

// Number of mask pixels with a 4-neighbor outside the mask or the frame.
std::size_t boundary_pixel_count(const ObjectMask& mask);

double combined_gov(const std::array<double, 4>& components, const GovWeights& weights);

GovScore evaluate_gov(const RgbdFrame& frame, const ObjectMask& mask, const GovWeights& weights, const GovConfig& config);

}  // namespace tailor
