#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tailor/augmenter.hpp"
#include "tailor/detector.hpp"
#include "tailor/explorer.hpp"

namespace tailor {

struct SphereConfig {
  int frequency = 4;
  double radius = 350.0;
  double cutoff = -0.10;
  friend bool operator==(const SphereConfig&, const SphereConfig&) = default;
};

struct ExplorerConfig {
  int budget = 12;
  int k = 5;
  friend bool operator==(const ExplorerConfig&, const ExplorerConfig&) = default;
};

// Every tunable of the pipeline. Defaults are the documented ones.
struct Config {
  SphereConfig sphere;
  GovWeights weights;
  GovConfig gov;
  ExplorerConfig explorer;
  PlaneFitParams plane;
  SegmentParams segment;
  Augment2dParams augment2d;
  Augment3dParams augment3d;
  double detector_threshold = 0.6;
  RenderOptions render;

  // Throws InvalidArgument naming the offending field and its bound.
  void validate() const;
  PerceptionConfig perception() const;
  ViewSphere make_sphere() const { return ViewSphere(sphere.frequency, sphere.radius, sphere.cutoff); }
};

bool operator==(const Config& a, const Config& b);

inline constexpr const char* kConfigMagic = "TAILOR-CONFIG";
inline constexpr const char* kRegistryMagic = "TAILOR-REGISTRY";
inline constexpr const char* kSceneMagic = "TAILOR-SCENE";
inline constexpr int kConfigVersion = 1;
inline constexpr int kSceneVersion = 1;

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

std::string serialize_config(const Config& config);
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);
// Copy of `config` with one key replaced, e.g. ("explorer.budget", "20").
// Unknown keys and out-of-range values throw.
Config set_config_value(const Config& config, const std::string& key, const std::string& value);
void save_config(const Config& config, const std::filesystem::path& path);

std::string serialize_model(const ObjectModel& model);
std::string serialize_registry(const Registry& registry);
Registry parse_registry(const std::string& text);
Registry load_registry(const std::filesystem::path& path);
void save_registry(const Registry& registry, const std::filesystem::path& path);

std::string serialize_scene(const SceneSpec& scene);
SceneSpec parse_scene(const std::string& text);
SceneSpec load_scene(const std::filesystem::path& path);
void save_scene(const SceneSpec& scene, const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& text);

// RFC 4180 output: CRLF record ends, fields quoted when they contain a comma,
// quote, CR or LF.
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

private:
  std::ostream& out_;
};

std::string csv_escape(const std::string& field);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryStep>& steps);

std::string encode_ppm(const ColorImage& image);
ColorImage decode_ppm(const std::string& bytes);
// 16-bit big-endian depth in whole millimetres; invalid pixels are 0.
std::string encode_pgm16(const DepthImage& depth);
std::string encode_pbm(const MaskImage& mask);

// Directory of sample_NNNN.ppm / sample_NNNN.pbm pairs plus manifest.tsv.
void export_training_set(const std::vector<TrainingSample>& samples, const std::filesystem::path& dir);

}  // namespace tailor
