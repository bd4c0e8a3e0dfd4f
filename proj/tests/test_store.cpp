#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "tailor/bench.hpp"
#include "tailor/error.hpp"
#include "tailor/scenes.hpp"
#include "tailor/store.hpp"

using namespace tailor;
namespace fs = std::filesystem;

namespace {

// Runs `f` and returns the error it throws; fails the test when it does not throw.
template <class F>
Error error_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorCode::Internal, "unreachable");
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tailor_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string replace_line(const std::string& text, int line, const std::string& with) {
  std::istringstream in(text);
  std::string out, l;
  for (int n = 1; std::getline(in, l); ++n) out += (n == line ? with : l) + "\n";
  return out;
}

}  // namespace

TEST_CASE("format_double round-trips every double") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(350) == "350");
}

TEST_CASE("config round trip is byte-identical") {
  Config c;
  const std::string text = serialize_config(c);
  CHECK(text.rfind("TAILOR-CONFIG 1\n", 0) == 0);
  CHECK(serialize_config(parse_config(text)) == text);

  c.explorer.budget = 7;
  c.weights = {0.1, 0.2, 0.3, 0.4};
  c.augment2d.backgrounds = {std::nullopt, Rgb{1, 2, 3}};
  c.render.noise_sigma = 0.25;
  c.detector_threshold = 0.123456789012345;
  const std::string t2 = serialize_config(c);
  const Config back = parse_config(t2);
  CHECK(back == c);
  CHECK(serialize_config(back) == t2);

  const fs::path dir = temp_dir("config");
  save_config(c, dir / "a.conf");
  CHECK(read_text_file(dir / "a.conf") == t2);
  CHECK(load_config(dir / "a.conf") == c);
}

TEST_CASE("config parsing reports located errors") {
  const std::string text = serialize_config(Config{});
  const Error bad_num = error_of([&] { parse_config(replace_line(text, 3, "sphere.radius = abc")); });
  CHECK(bad_num.code() == ErrorCode::Parse);
  CHECK(std::string(bad_num.what()).find("line 3") != std::string::npos);

  const Error unknown = error_of([&] { parse_config(replace_line(text, 5, "sphere.colour = 3")); });
  CHECK(unknown.code() == ErrorCode::Parse);
  CHECK(std::string(unknown.what()).find("line 5") != std::string::npos);
  CHECK(std::string(unknown.what()).find("sphere.colour") != std::string::npos);

  CHECK(error_of([&] { parse_config(replace_line(text, 1, "TAILOR-CONFIG 9")); }).code() == ErrorCode::Version);
  CHECK(error_of([&] { parse_config(replace_line(text, 1, "HELLO 1")); }).code() == ErrorCode::Parse);
  CHECK(error_of([&] { parse_config(""); }).code() == ErrorCode::Parse);
  CHECK(error_of([&] { parse_config(replace_line(text, 4, "no equals sign")); }).code() == ErrorCode::Parse);
}

TEST_CASE("config validation names the field and bound") {
  const Error e = error_of([] { set_config_value(Config{}, "explorer.budget", "0"); });
  CHECK(e.code() == ErrorCode::InvalidArgument);
  CHECK(std::string(e.what()).find("explorer.budget") != std::string::npos);
  CHECK(set_config_value(Config{}, "explorer.budget", "20").explorer.budget == 20);
  CHECK(error_of([] { set_config_value(Config{}, "nope", "1"); }).code() == ErrorCode::InvalidArgument);
  CHECK(error_of([] { set_config_value(Config{}, "gov.weights", "0.5 0.5 0.5 0.5"); }).code() == ErrorCode::InvalidArgument);
}

TEST_CASE("registry round trip is byte-identical") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Registry r(0.45);
  for (int m = 0; m < 4; ++m) {
    std::vector<FeatureVector> ex(1 + m);
    for (auto& f : ex)
      for (double& x : f) x = u(rng);
    r.register_object("object " + std::to_string(m), ex);
  }
  const std::string text = serialize_registry(r);
  const Registry back = parse_registry(text);
  CHECK(back == r);
  CHECK(serialize_registry(back) == text);
  const fs::path dir = temp_dir("registry");
  save_registry(r, dir / "r.txt");
  CHECK(load_registry(dir / "r.txt") == r);
  CHECK(serialize_registry(parse_registry(serialize_registry(Registry{}))) == serialize_registry(Registry{}));
}

TEST_CASE("corrupt registries are rejected with the offending line") {
  Registry r;
  r.register_object("a", {FeatureVector{}});
  r.register_object("b", {FeatureVector{}});
  const std::string text = serialize_registry(r);
  auto located = [&](const std::string& bad, int line) {
    const Error e = error_of([&] { parse_registry(bad); });
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line " + std::to_string(line)) != std::string::npos);
  };
  located(replace_line(text, 5, "e 1 2 3"), 5);
  located(replace_line(text, 4, "model 0 x a"), 4);
  located(replace_line(text, 6, "model 0 1 b"), 6);
  located(text.substr(0, text.rfind("e ")), 7);
  located(text + "junk\n", 8);
  CHECK(error_of([&] { parse_registry(replace_line(text, 1, "TAILOR-REGISTRY 2")); }).code() == ErrorCode::Version);
}

TEST_CASE("scene round trips are byte-identical") {
  for (const SceneSpec& s : {sample_gear_scene(), sample_cube_scene()}) {
    const std::string text = serialize_scene(s);
    CHECK(serialize_scene(parse_scene(text)) == text);
  }
  for (const SceneSpec& s : generate_corpus(8, 4)) {
    const std::string text = serialize_scene(s);
    CHECK(serialize_scene(parse_scene(text)) == text);
  }
}

TEST_CASE("shipped scene files match their manifest and builtins") {
  const fs::path data = TAILOR_DATA_DIR;
  std::istringstream manifest(read_text_file(data / "manifest.tsv"));
  std::string line;
  std::getline(manifest, line);
  int rows = 0;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream in(line);
    std::string file;
    std::size_t objects = 0, triangles = 0;
    in >> file >> objects >> triangles;
    const SceneSpec s = load_scene(data / file);
    CHECK(s.objects.size() == objects);
    std::size_t tri = 0;
    for (const auto& o : s.objects) tri += o.mesh.triangles.size();
    CHECK(tri == triangles);
    ++rows;
  }
  CHECK(rows == 2);
  CHECK(read_text_file(data / "gear.scene") == serialize_scene(sample_gear_scene()));
  CHECK(read_text_file(data / "cube.scene") == serialize_scene(sample_cube_scene()));
}

TEST_CASE("corrupt scenes are rejected with the offending line") {
  const std::string text = serialize_scene(sample_cube_scene());
  auto located = [&](const std::string& bad, const std::string& needle) {
    const Error e = error_of([&] { parse_scene(bad); });
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  };
  located(replace_line(text, 14, "f 0 2 99 1 1 1"), "line 14");
  located(replace_line(text, 14, "f 0 0 3 1 1 1"), "line 14");
  located(replace_line(text, 14, "f 0 2 3 1 1 300"), "line 14");
  located(replace_line(text, 5, "pose 2 0 0 0 1 0 0 0 1 0 0 0"), "line 5");
  located(replace_line(text, 2, "bogus 1"), "line 2");
  located(replace_line(text, 3, ""), "no table");
  located(text.substr(0, text.rfind("end")), "missing 'end'");
}

TEST_CASE("missing files raise Io errors") {
  CHECK(error_of([] { load_config("/nonexistent/dir/x.conf"); }).code() == ErrorCode::Io);
  CHECK(error_of([] { load_scene("/nonexistent/dir/x.scene"); }).code() == ErrorCode::Io);
}

TEST_CASE("CSV escaping and parsing round-trip") {
  const std::vector<std::vector<std::string>> rows{{"a", "b,c", "say \"hi\""}, {"multi\nline", "", "x"}, {"1", "2", "3"}};
  std::ostringstream out;
  CsvWriter w(out);
  for (const auto& r : rows) w.row(r);
  const std::string text = out.str();
  CHECK(text.find("\r\n") != std::string::npos);
  CHECK(text.rfind("a,\"b,c\",\"say \"\"hi\"\"\"\r\n", 0) == 0);
  CHECK(parse_csv(text) == rows);
  CHECK(csv_escape("plain") == "plain");
}

TEST_CASE("trajectory CSV has a fixed header and one row per step") {
  std::vector<TrajectoryStep> steps{{0, 4, StepKind::Start, {0.1, 0.2, 0.3, 0.4, 0.25}},
                                    {1, 9, StepKind::Jump, {}}};
  std::ostringstream out;
  write_trajectory_csv(out, steps);
  const auto rows = parse_csv(out.str());
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"step", "view", "kind", "silhouette", "depth_entropy", "curvature_entropy",
                                            "color_entropy", "combined"});
  CHECK(rows[1] == std::vector<std::string>{"0", "4", "start", "0.1", "0.2", "0.3", "0.4", "0.25"});
  CHECK(rows[2][2] == "jump");
}

TEST_CASE("image encoders") {
  ColorImage img(3, 2);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    img.data[i] = Rgb{static_cast<std::uint8_t>(i * 40), static_cast<std::uint8_t>(255 - i), 7};
  const std::string ppm = encode_ppm(img);
  CHECK(ppm.rfind("P6\n3 2\n255\n", 0) == 0);
  CHECK(ppm.size() == 11 + 18);
  CHECK(decode_ppm(ppm) == img);
  CHECK(error_of([&] { decode_ppm(ppm.substr(0, ppm.size() - 1)); }).code() == ErrorCode::Parse);
  CHECK(error_of([] { decode_ppm("P3\n1 1\n255\n"); }).code() == ErrorCode::Parse);

  DepthImage d(2, 1);
  d.data = {258.4, 0.0};
  CHECK(encode_pgm16(d) == std::string("P5\n2 1\n65535\n\x01\x02\x00\x00", 17));

  MaskImage m(10, 1, 0);
  m.at(0, 0) = 1;
  m.at(9, 0) = 1;
  CHECK(encode_pbm(m) == std::string("P4\n10 1\n\x80\x40", 10));
}

TEST_CASE("text files are replaced atomically") {
  const fs::path dir = temp_dir("atomic");
  write_text_file(dir / "f.txt", "one");
  write_text_file(dir / "f.txt", "two");
  CHECK(read_text_file(dir / "f.txt") == "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("training set export writes image, mask and manifest") {
  TrainingSample t;
  t.image = ColorImage(4, 4, Rgb{1, 2, 3});
  MaskImage bits(4, 4, 0);
  bits.at(1, 1) = 1;
  t.mask = make_mask(bits);
  t.label = "gear";
  t.source_view = 2;
  t.transform = "canonical";
  const fs::path dir = temp_dir("export");
  export_training_set({t, t}, dir / "set");
  CHECK(fs::exists(dir / "set" / "sample_0000.ppm"));
  CHECK(fs::exists(dir / "set" / "sample_0001.pbm"));
  CHECK(fs::exists(dir / "set" / "manifest.tsv"));
  CHECK(decode_ppm(read_text_file(dir / "set" / "sample_0001.ppm")) == t.image);
}
