#include "tailor/store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "tailor/error.hpp"

namespace tailor {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  fail(ErrorCode::Parse, "line " + std::to_string(line) + ": " + what);
}

double parse_double_at(const std::string& tok, int line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) parse_fail(line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int_at(const std::string& tok, int line) {
  long long v = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) parse_fail(line, "expected an integer, got '" + tok + "'");
  return v;
}

// "MAGIC <version>" header shared by all text formats.
void check_header(const std::vector<std::string>& lines, const std::string& magic, int version) {
  if (lines.empty()) parse_fail(1, "empty file, expected '" + magic + "' header");
  const auto tok = split_ws(lines[0]);
  if (tok.size() != 2 || tok[0] != magic) parse_fail(1, "expected '" + magic + " <version>' header");
  const long long v = parse_int_at(tok[1], 1);
  if (v != version)
    fail(ErrorCode::Version, magic + " version " + tok[1] + " is not supported (expected " + std::to_string(version) + ")");
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

std::string rgb_text(Rgb c) { return std::to_string(c.r) + ' ' + std::to_string(c.g) + ' ' + std::to_string(c.b); }

std::uint8_t parse_channel(const std::string& tok, int line) {
  const long long v = parse_int_at(tok, line);
  if (v < 0 || v > 255) parse_fail(line, "color channel out of range [0, 255]");
  return static_cast<std::uint8_t>(v);
}

// Config key registry: each entry knows how to print and parse its field.
struct ConfigField {
  std::string key;
  std::function<std::string(const Config&)> get;
  std::function<void(Config&, const std::vector<std::string>&, int)> set;
};

std::vector<ConfigField> config_fields() {
  std::vector<ConfigField> f;
  auto one = [](const std::vector<std::string>& v, int line, const std::string& key) -> const std::string& {
    if (v.size() != 1) parse_fail(line, key + " expects exactly one value");
    return v[0];
  };
  auto dbl = [&f, one](const std::string& key, std::function<double&(Config&)> ref) {
    f.push_back({key, [ref](const Config& c) { return format_double(ref(const_cast<Config&>(c))); },
                 [ref, key, one](Config& c, const std::vector<std::string>& v, int line) {
                   ref(c) = parse_double_at(one(v, line, key), line);
                 }});
  };
  auto integer = [&f, one](const std::string& key, std::function<long long(const Config&)> get,
                           std::function<void(Config&, long long)> set) {
    f.push_back({key, [get](const Config& c) { return std::to_string(get(c)); },
                 [set, key, one](Config& c, const std::vector<std::string>& v, int line) {
                   set(c, parse_int_at(one(v, line, key), line));
                 }});
  };
  auto dlist = [&f](const std::string& key, std::function<std::vector<double>&(Config&)> ref) {
    f.push_back({key, [ref](const Config& c) { return join_doubles(ref(const_cast<Config&>(c))); },
                 [ref](Config& c, const std::vector<std::string>& v, int line) {
                   std::vector<double> out;
                   for (const auto& t : v) out.push_back(parse_double_at(t, line));
                   ref(c) = out;
                 }});
  };

  integer("sphere.frequency", [](const Config& c) { return c.sphere.frequency; },
          [](Config& c, long long v) { c.sphere.frequency = static_cast<int>(v); });
  dbl("sphere.radius", [](Config& c) -> double& { return c.sphere.radius; });
  dbl("sphere.cutoff", [](Config& c) -> double& { return c.sphere.cutoff; });

  f.push_back({"gov.weights",
               [](const Config& c) {
                 const auto w = c.weights.as_array();
                 return join_doubles({w.begin(), w.end()});
               },
               [](Config& c, const std::vector<std::string>& v, int line) {
                 if (v.size() != 4) parse_fail(line, "gov.weights expects 4 values");
                 c.weights = {parse_double_at(v[0], line), parse_double_at(v[1], line), parse_double_at(v[2], line),
                              parse_double_at(v[3], line)};
               }});
  integer("gov.depth_bins", [](const Config& c) { return c.gov.depth_bins; },
          [](Config& c, long long v) { c.gov.depth_bins = static_cast<int>(v); });
  integer("gov.curvature_bins", [](const Config& c) { return c.gov.curvature_bins; },
          [](Config& c, long long v) { c.gov.curvature_bins = static_cast<int>(v); });
  dbl("gov.curvature_clamp", [](Config& c) -> double& { return c.gov.curvature_clamp; });
  integer("gov.hue_bins", [](const Config& c) { return c.gov.hue_bins; },
          [](Config& c, long long v) { c.gov.hue_bins = static_cast<int>(v); });
  integer("gov.gray_bins", [](const Config& c) { return c.gov.gray_bins; },
          [](Config& c, long long v) { c.gov.gray_bins = static_cast<int>(v); });

  integer("explorer.budget", [](const Config& c) { return c.explorer.budget; },
          [](Config& c, long long v) { c.explorer.budget = static_cast<int>(v); });
  integer("explorer.k", [](const Config& c) { return c.explorer.k; },
          [](Config& c, long long v) { c.explorer.k = static_cast<int>(v); });

  integer("segmenter.iterations", [](const Config& c) { return c.plane.iterations; },
          [](Config& c, long long v) { c.plane.iterations = static_cast<int>(v); });
  dbl("segmenter.inlier_threshold", [](Config& c) -> double& { return c.plane.inlier_threshold; });
  dbl("segmenter.min_plane_fraction", [](Config& c) -> double& { return c.plane.min_inlier_fraction; });
  integer("segmenter.seed", [](const Config& c) { return static_cast<long long>(c.plane.seed); },
          [](Config& c, long long v) { c.plane.seed = static_cast<std::uint64_t>(v); });
  dbl("segmenter.min_height", [](Config& c) -> double& { return c.segment.min_height; });
  integer("segmenter.min_pixels", [](const Config& c) { return static_cast<long long>(c.segment.min_pixels); },
          [](Config& c, long long v) { c.segment.min_pixels = static_cast<std::size_t>(std::max(0LL, v)); });

  dlist("augment.rotations", [](Config& c) -> std::vector<double>& { return c.augment2d.rotations_deg; });
  dlist("augment.scales", [](Config& c) -> std::vector<double>& { return c.augment2d.scales; });
  f.push_back({"augment.flips",
               [](const Config& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.augment2d.flips.size(); ++i) s += (i ? " " : "") + std::string(c.augment2d.flips[i] ? "1" : "0");
                 return s;
               },
               [](Config& c, const std::vector<std::string>& v, int line) {
                 c.augment2d.flips.clear();
                 for (const auto& t : v) {
                   if (t != "0" && t != "1") parse_fail(line, "augment.flips expects 0/1 values");
                   c.augment2d.flips.push_back(t == "1");
                 }
               }});
  f.push_back({"augment.backgrounds",
               [](const Config& c) {
                 std::string s;
                 for (std::size_t i = 0; i < c.augment2d.backgrounds.size(); ++i) {
                   if (i) s += ' ';
                   const auto& b = c.augment2d.backgrounds[i];
                   s += b ? std::to_string(b->r) + "," + std::to_string(b->g) + "," + std::to_string(b->b) : "keep";
                 }
                 return s;
               },
               [](Config& c, const std::vector<std::string>& v, int line) {
                 c.augment2d.backgrounds.clear();
                 for (const auto& t : v) {
                   if (t == "keep") {
                     c.augment2d.backgrounds.emplace_back(std::nullopt);
                     continue;
                   }
                   std::vector<std::string> parts;
                   std::stringstream ss(t);
                   std::string p;
                   while (std::getline(ss, p, ',')) parts.push_back(p);
                   if (parts.size() != 3) parse_fail(line, "augment.backgrounds expects r,g,b or keep");
                   c.augment2d.backgrounds.emplace_back(
                       Rgb{parse_channel(parts[0], line), parse_channel(parts[1], line), parse_channel(parts[2], line)});
                 }
               }});
  dbl("augment.jitter", [](Config& c) -> double& { return c.augment3d.jitter; });
  integer("augment.draws", [](const Config& c) { return c.augment3d.count; },
          [](Config& c, long long v) { c.augment3d.count = static_cast<int>(v); });
  integer("augment.seed", [](const Config& c) { return static_cast<long long>(c.augment3d.seed); },
          [](Config& c, long long v) { c.augment3d.seed = static_cast<std::uint64_t>(v); });

  dbl("detector.threshold", [](Config& c) -> double& { return c.detector_threshold; });

  integer("renderer.width", [](const Config& c) { return c.render.width; },
          [](Config& c, long long v) { c.render.width = static_cast<int>(v); });
  integer("renderer.height", [](const Config& c) { return c.render.height; },
          [](Config& c, long long v) { c.render.height = static_cast<int>(v); });
  dbl("renderer.fx", [](Config& c) -> double& { return c.render.intrinsics.fx; });
  dbl("renderer.fy", [](Config& c) -> double& { return c.render.intrinsics.fy; });
  dbl("renderer.cx", [](Config& c) -> double& { return c.render.intrinsics.cx; });
  dbl("renderer.cy", [](Config& c) -> double& { return c.render.intrinsics.cy; });
  dbl("renderer.near", [](Config& c) -> double& { return c.render.near_plane; });
  dbl("renderer.noise_sigma", [](Config& c) -> double& { return c.render.noise_sigma; });
  integer("renderer.noise_seed", [](const Config& c) { return static_cast<long long>(c.render.noise_seed); },
          [](Config& c, long long v) { c.render.noise_seed = static_cast<std::uint64_t>(v); });
  return f;
}

void check(bool ok, const std::string& key, const std::string& bound) {
  if (!ok) fail(ErrorCode::InvalidArgument, key + " out of range: must be " + bound);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) fail(ErrorCode::Internal, "number formatting failed");
  return std::string(buf, ptr);
}

void Config::validate() const {
  check(sphere.frequency >= 1 && sphere.frequency <= 64, "sphere.frequency", "in [1, 64]");
  check(sphere.radius > 0, "sphere.radius", "> 0");
  check(sphere.cutoff >= -1 && sphere.cutoff <= 1, "sphere.cutoff", "in [-1, 1]");
  for (double w : weights.as_array()) check(w >= 0, "gov.weights", "nonnegative");
  const auto w = weights.as_array();
  check(std::abs(w[0] + w[1] + w[2] + w[3] - 1.0) <= 1e-9, "gov.weights", "summing to 1 (within 1e-9)");
  check(gov.depth_bins >= 2, "gov.depth_bins", ">= 2");
  check(gov.curvature_bins >= 2, "gov.curvature_bins", ">= 2");
  check(gov.curvature_clamp > 0, "gov.curvature_clamp", "> 0");
  check(gov.hue_bins >= 2, "gov.hue_bins", ">= 2");
  check(gov.gray_bins >= 1, "gov.gray_bins", ">= 1");
  check(explorer.budget >= 1, "explorer.budget", ">= 1");
  check(explorer.k >= 1, "explorer.k", ">= 1");
  check(plane.iterations >= 1, "segmenter.iterations", ">= 1");
  check(plane.inlier_threshold > 0, "segmenter.inlier_threshold", "> 0");
  check(plane.min_inlier_fraction > 0 && plane.min_inlier_fraction <= 1, "segmenter.min_plane_fraction", "in (0, 1]");
  check(segment.min_height >= 0, "segmenter.min_height", ">= 0");
  check(segment.min_pixels >= 1, "segmenter.min_pixels", ">= 1");
  check(!augment2d.rotations_deg.empty(), "augment.rotations", "nonempty");
  check(!augment2d.scales.empty(), "augment.scales", "nonempty");
  for (double s : augment2d.scales) check(s > 0, "augment.scales", "> 0");
  check(!augment2d.flips.empty(), "augment.flips", "nonempty");
  check(!augment2d.backgrounds.empty(), "augment.backgrounds", "nonempty");
  check(augment3d.jitter >= 0 && augment3d.jitter < std::numbers::pi / 8, "augment.jitter", "in [0, pi/8)");
  check(augment3d.count >= 0, "augment.draws", ">= 0");
  check(detector_threshold > 0, "detector.threshold", "> 0");
  check(render.width >= 16, "renderer.width", ">= 16");
  check(render.height >= 16, "renderer.height", ">= 16");
  check(render.intrinsics.fx > 0, "renderer.fx", "> 0");
  check(render.intrinsics.fy > 0, "renderer.fy", "> 0");
  check(render.near_plane > 0, "renderer.near", "> 0");
  check(render.noise_sigma >= 0, "renderer.noise_sigma", ">= 0");
}

PerceptionConfig Config::perception() const {
  PerceptionConfig p;
  p.render = render;
  p.plane = plane;
  p.segment = segment;
  p.weights = weights;
  p.gov = gov;
  return p;
}

bool operator==(const Config& a, const Config& b) { return serialize_config(a) == serialize_config(b); }

std::string serialize_config(const Config& config) {
  std::string s = std::string(kConfigMagic) + " " + std::to_string(kConfigVersion) + "\n";
  for (const auto& field : config_fields()) s += field.key + " = " + field.get(config) + "\n";
  return s;
}

Config parse_config(const std::string& text) {
  const auto lines = split_lines(text);
  check_header(lines, kConfigMagic, kConfigVersion);
  const auto fields = config_fields();
  std::map<std::string, const ConfigField*> by_key;
  for (const auto& f : fields) by_key[f.key] = &f;

  Config c;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line = static_cast<int>(i) + 1;
    const std::string l = trim(lines[i]);
    if (l.empty() || l[0] == '#') continue;
    const auto eq = l.find('=');
    if (eq == std::string::npos) parse_fail(line, "expected 'key = value'");
    const std::string key = trim(l.substr(0, eq));
    auto it = by_key.find(key);
    if (it == by_key.end()) fail(ErrorCode::Parse, "line " + std::to_string(line) + ": unknown config key '" + key + "'");
    it->second->set(c, split_ws(l.substr(eq + 1)), line);
  }
  c.validate();
  return c;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) fail(ErrorCode::Io, "write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot replace '" + path.string() + "': " + ec.message());
}

Config set_config_value(const Config& config, const std::string& key, const std::string& value) {
  std::istringstream in(serialize_config(config));
  std::string out, line;
  bool found = false;
  const std::string prefix = key + " = ";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) {
      line = prefix + value;
      found = true;
    }
    out += line + "\n";
  }
  if (!found) fail(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
  return parse_config(out);
}

Config load_config(const fs::path& path) { return parse_config(read_text_file(path)); }

void save_config(const Config& config, const fs::path& path) {
  config.validate();
  write_text_file(path, serialize_config(config));
}

std::string serialize_model(const ObjectModel& m) {
  std::string s = "model " + std::to_string(m.ordinal) + " " + std::to_string(m.exemplars.size()) + " " + m.name + "\n";
  for (const auto& e : m.exemplars) {
    s += "e";
    for (double v : e) s += " " + format_double(v);
    s += "\n";
  }
  return s;
}

std::string serialize_registry(const Registry& r) {
  std::string s = std::string(kRegistryMagic) + " " + std::to_string(Registry::kFormatVersion) + "\n";
  s += "threshold " + format_double(r.unknown_threshold()) + "\n";
  s += "models " + std::to_string(r.size()) + "\n";
  for (const auto& m : r.models()) s += serialize_model(m);
  return s;
}

Registry parse_registry(const std::string& text) {
  const auto lines = split_lines(text);
  check_header(lines, kRegistryMagic, Registry::kFormatVersion);
  std::size_t i = 1;
  auto next = [&](const std::string& expecting) -> std::vector<std::string> {
    if (i >= lines.size()) parse_fail(static_cast<int>(i) + 1, "unexpected end of file, expected " + expecting);
    return split_ws(lines[i++]);
  };
  auto tok = next("threshold");
  if (tok.size() != 2 || tok[0] != "threshold") parse_fail(static_cast<int>(i), "expected 'threshold <value>'");
  const double threshold = parse_double_at(tok[1], static_cast<int>(i));
  if (!(threshold > 0)) parse_fail(static_cast<int>(i), "threshold must be positive");
  Registry r(threshold);
  tok = next("models");
  if (tok.size() != 2 || tok[0] != "models") parse_fail(static_cast<int>(i), "expected 'models <count>'");
  const long long count = parse_int_at(tok[1], static_cast<int>(i));
  if (count < 0) parse_fail(static_cast<int>(i), "negative model count");
  for (long long m = 0; m < count; ++m) {
    if (i >= lines.size()) parse_fail(static_cast<int>(i) + 1, "unexpected end of file, expected model");
    const int line = static_cast<int>(i) + 1;
    const std::string& raw = lines[i++];
    const auto head = split_ws(raw);
    if (head.size() < 4 || head[0] != "model") parse_fail(line, "expected 'model <ordinal> <rows> <name>'");
    ObjectModel model;
    model.ordinal = static_cast<int>(parse_int_at(head[1], line));
    const long long rows = parse_int_at(head[2], line);
    if (rows < 1) parse_fail(line, "model needs at least one exemplar");
    // Name is the remainder of the line after the third token.
    std::size_t pos = 0;
    for (int t = 0; t < 3; ++t) {
      pos = raw.find_first_not_of(' ', pos);
      pos = raw.find(' ', pos);
    }
    model.name = raw.substr(pos + 1);
    for (long long k = 0; k < rows; ++k) {
      const int eline = static_cast<int>(i) + 1;
      const auto e = next("exemplar row");
      if (e.size() != kFeatureDims + 1 || e[0] != "e")
        parse_fail(eline, "expected 'e' followed by " + std::to_string(kFeatureDims) + " values");
      FeatureVector f;
      for (int d = 0; d < kFeatureDims; ++d) f[d] = parse_double_at(e[d + 1], eline);
      model.exemplars.push_back(f);
    }
    try {
      r.restore(std::move(model));
    } catch (const Error& e) {
      parse_fail(line, e.what());
    }
  }
  for (; i < lines.size(); ++i)
    if (!trim(lines[i]).empty()) parse_fail(static_cast<int>(i) + 1, "trailing content after last model");
  return r;
}

Registry load_registry(const fs::path& path) { return parse_registry(read_text_file(path)); }
void save_registry(const Registry& registry, const fs::path& path) { write_text_file(path, serialize_registry(registry)); }

std::string serialize_scene(const SceneSpec& scene) {
  std::string s = std::string(kSceneMagic) + " " + std::to_string(kSceneVersion) + "\n";
  const auto& l = scene.light;
  s += "light " + join_doubles({l.ambient, l.diffuse, l.direction.x(), l.direction.y(), l.direction.z()}) + "\n";
  if (scene.table) {
    const auto& t = *scene.table;
    s += "table " + join_doubles({t.point.x(), t.point.y(), t.point.z(), t.normal.x(), t.normal.y(), t.normal.z()}) +
         " " + rgb_text(t.color) + " " + format_double(t.half_extent) + "\n";
  }
  for (const auto& o : scene.objects) {
    s += "object " + o.name + "\n";
    std::vector<double> pose;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) pose.push_back(o.pose.rotation(r, c));
    for (int r = 0; r < 3; ++r) pose.push_back(o.pose.translation(r));
    s += "pose " + join_doubles(pose) + "\n";
    for (const auto& v : o.mesh.vertices) s += "v " + join_doubles({v.x(), v.y(), v.z()}) + "\n";
    for (const auto& t : o.mesh.triangles)
      s += "f " + std::to_string(t.v[0]) + " " + std::to_string(t.v[1]) + " " + std::to_string(t.v[2]) + " " +
           rgb_text(t.color) + "\n";
    s += "end\n";
  }
  return s;
}

SceneSpec parse_scene(const std::string& text) {
  const auto lines = split_lines(text);
  check_header(lines, kSceneMagic, kSceneVersion);
  SceneSpec scene;
  std::optional<SceneObject> open;
  int open_line = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const int line = static_cast<int>(i) + 1;
    const std::string l = trim(lines[i]);
    if (l.empty() || l[0] == '#') continue;
    const auto tok = split_ws(l);
    const std::string& kind = tok[0];
    auto nums = [&](std::size_t first, std::size_t count) {
      if (tok.size() != first + count) parse_fail(line, "'" + kind + "' expects " + std::to_string(count) + " values");
      std::vector<double> v;
      for (std::size_t k = first; k < tok.size(); ++k) v.push_back(parse_double_at(tok[k], line));
      return v;
    };
    if (kind == "light") {
      const auto v = nums(1, 5);
      const Vec3 d(v[2], v[3], v[4]);
      if (d.norm() < 1e-12) parse_fail(line, "light direction must be nonzero");
      scene.light = {v[0], v[1], d.normalized()};
    } else if (kind == "table") {
      if (tok.size() != 11) parse_fail(line, "'table' expects 10 values");
      const auto v = nums(1, 10);
      const Vec3 n(v[3], v[4], v[5]);
      if (n.norm() < 1e-12) parse_fail(line, "table normal must be nonzero");
      if (!(v[9] > 0)) parse_fail(line, "table half extent must be positive");
      TablePlane t;
      t.point = {v[0], v[1], v[2]};
      t.normal = n.normalized();
      t.color = {parse_channel(tok[7], line), parse_channel(tok[8], line), parse_channel(tok[9], line)};
      t.half_extent = v[9];
      scene.table = t;
    } else if (kind == "object") {
      if (open) parse_fail(line, "'object' before 'end' of the previous object");
      if (tok.size() < 2) parse_fail(line, "'object' needs a name");
      open = SceneObject{};
      open->name = trim(l.substr(6));
      open_line = line;
    } else if (kind == "pose" || kind == "v" || kind == "f" || kind == "end") {
      if (!open) parse_fail(line, "'" + kind + "' outside an object block");
      if (kind == "pose") {
        const auto v = nums(1, 12);
        Mat3 r;
        r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
        if ((r.transpose() * r - Mat3::Identity()).norm() > 1e-6 || r.determinant() < 0)
          parse_fail(line, "pose rotation is not orthonormal");
        open->pose.rotation = r;
        open->pose.translation = {v[9], v[10], v[11]};
      } else if (kind == "v") {
        const auto v = nums(1, 3);
        open->mesh.vertices.emplace_back(v[0], v[1], v[2]);
      } else if (kind == "f") {
        if (tok.size() != 7) parse_fail(line, "'f' expects 3 vertex indices and an RGB color");
        Triangle t;
        for (int k = 0; k < 3; ++k) {
          const long long idx = parse_int_at(tok[1 + k], line);
          if (idx < 0 || idx >= static_cast<long long>(open->mesh.vertices.size()))
            parse_fail(line, "vertex index out of range");
          t.v[k] = static_cast<int>(idx);
        }
        t.color = {parse_channel(tok[4], line), parse_channel(tok[5], line), parse_channel(tok[6], line)};
        open->mesh.triangles.push_back(t);
        if (!(open->mesh.triangle_area(open->mesh.triangles.size() - 1) > 1e-12))
          fail(ErrorCode::Parse, "line " + std::to_string(line) + ": degenerate (zero-area) triangle");
      } else {
        if (open->mesh.triangles.empty()) parse_fail(line, "object has no faces");
        scene.objects.push_back(std::move(*open));
        open.reset();
      }
    } else {
      parse_fail(line, "unknown record '" + kind + "'");
    }
  }
  if (open) parse_fail(open_line, "object block is missing 'end'");
  if (!scene.table) fail(ErrorCode::Parse, "scene has no table definition");
  return scene;
}

SceneSpec load_scene(const fs::path& path) { return parse_scene(read_text_file(path)); }
void save_scene(const SceneSpec& scene, const fs::path& path) { write_text_file(path, serialize_scene(scene)); }

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryStep>& steps) {
  CsvWriter w(out);
  w.row({"step", "view", "kind", "silhouette", "depth_entropy", "curvature_entropy", "color_entropy", "combined"});
  for (const auto& s : steps)
    w.row({std::to_string(s.step), std::to_string(s.view), step_kind_name(s.kind), format_double(s.score.silhouette),
           format_double(s.score.depth_entropy), format_double(s.score.curvature_entropy),
           format_double(s.score.color_entropy), format_double(s.score.combined)});
}

std::string encode_ppm(const ColorImage& image) {
  std::string s = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  for (const Rgb& c : image.data) {
    s += static_cast<char>(c.r);
    s += static_cast<char>(c.g);
    s += static_cast<char>(c.b);
  }
  return s;
}

ColorImage decode_ppm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255) fail(ErrorCode::Parse, "not an 8-bit binary PPM");
  in.get();
  ColorImage img(w, h);
  for (auto& c : img.data) {
    char px[3];
    if (!in.read(px, 3)) fail(ErrorCode::Parse, "truncated PPM data");
    c = {static_cast<std::uint8_t>(px[0]), static_cast<std::uint8_t>(px[1]), static_cast<std::uint8_t>(px[2])};
  }
  return img;
}

std::string encode_pgm16(const DepthImage& depth) {
  std::string s = "P5\n" + std::to_string(depth.width) + " " + std::to_string(depth.height) + "\n65535\n";
  for (double d : depth.data) {
    const auto v = static_cast<std::uint16_t>(std::clamp(std::lround(d), 0L, 65535L));
    s += static_cast<char>(v >> 8);
    s += static_cast<char>(v & 0xff);
  }
  return s;
}

std::string encode_pbm(const MaskImage& mask) {
  std::string s = "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  for (int v = 0; v < mask.height; ++v) {
    std::uint8_t byte = 0;
    int bit = 0;
    for (int u = 0; u < mask.width; ++u) {
      byte = static_cast<std::uint8_t>((byte << 1) | (mask.at(u, v) ? 1 : 0));
      if (++bit == 8) {
        s += static_cast<char>(byte);
        byte = 0;
        bit = 0;
      }
    }
    if (bit) s += static_cast<char>(byte << (8 - bit));
  }
  return s;
}

void export_training_set(const std::vector<TrainingSample>& samples, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
  std::string manifest = "file\tlabel\tsource_view\ttransform\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "sample_%04zu", i);
    write_text_file(dir / (std::string(stem) + ".ppm"), encode_ppm(samples[i].image));
    write_text_file(dir / (std::string(stem) + ".pbm"), encode_pbm(samples[i].mask.bits));
    manifest += std::string(stem) + "\t" + samples[i].label + "\t" + std::to_string(samples[i].source_view) + "\t" +
                samples[i].transform + "\n";
  }
  write_text_file(dir / "manifest.tsv", manifest);
}

}  // namespace tailor
