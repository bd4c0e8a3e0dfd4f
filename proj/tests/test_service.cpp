#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "support.hpp"
#include "tailor/error.hpp"
#include "tailor/scenes.hpp"
#include "tailor/service.hpp"

#include <httplib.h>

using namespace tailor;
using nlohmann::json;

namespace {

Config fast_config(int budget = 5) {
  Config c;
  c.explorer.budget = budget;
  c.explorer.k = 2;
  c.augment3d.count = 1;
  return c;
}

std::vector<WireEvent> of_type(const std::vector<WireEvent>& events, const std::string& type) {
  std::vector<WireEvent> out;
  for (const auto& e : events)
    if (e.type == type) out.push_back(e);
  return out;
}

// Starts an HTTP server on a free port for the lifetime of the fixture.
struct LiveServer {
  ServiceCore core;
  HttpServer server;
  int port;
  std::thread thread;

  explicit LiveServer(Config cfg) : core(std::move(cfg)), server(core), port(server.bind("127.0.0.1", 0)) {
    thread = std::thread([this] { server.listen(); });
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

}  // namespace

TEST_CASE("base64 matches the standard test vectors") {
  const std::vector<std::pair<std::string, std::string>> vectors{
      {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
      {"foobar", "Zm9vYmFy"}};
  for (const auto& [plain, enc] : vectors) {
    CHECK(base64_encode(plain) == enc);
    CHECK(base64_decode(enc) == plain);
  }
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    std::string bytes(rng() % 64, '\0');
    for (char& c : bytes) c = static_cast<char>(rng() & 0xff);
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
  CHECK_THROWS_AS(base64_decode("ab$d"), Error);
}

TEST_CASE("event hub numbers events from 1 and reads strictly after a cursor") {
  EventHub hub;
  CHECK(hub.last_seq() == 0);
  CHECK(hub.publish("a", json::object()) == 1);
  CHECK(hub.publish("b", {{"x", 1}}) == 2);
  CHECK(hub.publish("c", json::object()) == 3);
  const auto all = hub.read_after(0);
  REQUIRE(all.size() == 3);
  CHECK(all[1].type == "b");
  CHECK(all[1].to_json() == json{{"seq", 2}, {"type", "b"}, {"payload", {{"x", 1}}}});
  CHECK(hub.read_after(2).size() == 1);
  CHECK(hub.read_after(3).empty());
  CHECK(hub.read_after(99).empty());
}

TEST_CASE("event hub readers wake on publish and on close") {
  EventHub hub;
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    hub.publish("late", json::object());
  });
  const auto got = hub.read_after(0, 5000);
  t.join();
  REQUIRE(got.size() == 1);
  CHECK(got[0].type == "late");

  std::thread closer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    hub.close();
  });
  const auto start = std::chrono::steady_clock::now();
  CHECK(hub.read_after(1, 5000).empty());
  closer.join();
  CHECK(hub.closed());
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(4));
}

TEST_CASE("a registration emits one view_evaluated event per budgeted view") {
  ServiceSession s("t1", fast_config(5), sample_gear_scene());
  const std::uint64_t start_seq = s.events().last_seq();
  CHECK(s.submit("Start object registration").ok);
  const CommandReply reg = s.submit("This is the gear.");
  REQUIRE(reg.ok);
  CHECK(reg.phase == "ready");
  CHECK(reg.ticket == 2);

  const auto events = s.events().read_after(start_seq);
  const auto views = of_type(events, "view_evaluated");
  REQUIRE(views.size() == 5);
  for (std::size_t i = 0; i < views.size(); ++i) {
    const json& p = views[i].payload;
    CHECK(p["step"] == i);
    CHECK(p["object"] == "gear");
    CHECK(p["thumbnail"] == "/v1/sessions/t1/frames/" + std::to_string(p["view"].get<int>()));
    CHECK(p["score"]["combined"].get<double>() >= 0.0);
    const FrameSnapshot f = s.frame(p["view"].get<int>());
    CHECK(f.color.width == 160);
  }
  const auto replies = of_type(events, "protocol_reply");
  REQUIRE(replies.size() == 2);
  CHECK(replies[1].seq == reg.seq);
  CHECK(replies[1].payload["utterance"] == "This is the gear.");
  CHECK(views.back().seq < reg.seq);

  const json st = s.state();
  CHECK(st["phase"] == "ready");
  CHECK(st["objects"].size() == 1);
  CHECK(st["objects"][0]["name"] == "gear");
  CHECK(st["trajectory"].size() == 5);
  CHECK(st["budget"] == 5);
  CHECK(st["last_seq"] == s.events().last_seq());
}

TEST_CASE("query frames carry an overlay matching the detection") {
  ServiceSession s("t2", fast_config(5), sample_gear_scene());
  CHECK_THROWS_AS(s.frame(-1), Error);
  s.submit("start registration");
  s.submit("this is the gear");
  s.submit("done");
  const std::uint64_t before = s.events().last_seq();
  const CommandReply q = s.submit("where is the gear?");
  REQUIRE(q.ok);
  REQUIRE(q.detection);
  REQUIRE(q.pointing);

  const FrameSnapshot f = s.frame(-1);
  REQUIRE(f.detections.size() == 1);
  CHECK(f.detections[0].bbox == q.detection->bbox);
  const json fj = frame_json(f);
  CHECK(fj["encoding"] == "ppm");
  CHECK(decode_ppm(base64_decode(fj["image_base64"].get<std::string>())) == f.color);
  const json& box = fj["overlay"]["boxes"][0];
  CHECK(box["x"] == q.detection->bbox.x);
  CHECK(box["y"] == q.detection->bbox.y);
  CHECK(box["width"] == q.detection->bbox.width);
  CHECK(box["height"] == q.detection->bbox.height);
  CHECK(box["label"] == "gear");
  for (const auto& p : fj["overlay"]["mask_outline"]) CHECK(q.detection->mask.test(p[0], p[1]));
  CHECK(fj["overlay"]["pointing"].size() == 3);

  const auto events = s.events().read_after(before);
  REQUIRE(events.size() >= 3);
  CHECK(events[0].type == "detection");
  CHECK(events[1].type == "protocol_reply");
  CHECK(events[2].type == "state_changed");
}

TEST_CASE("concurrent submitters are equivalent to sequential application") {
  const Config cfg = fast_config(4);
  ServiceSession s("t3", cfg, sample_cube_scene());
  struct Outcome {
    std::uint64_t ticket;
    std::string utterance;
    bool ok;
    std::string text;
  };
  std::mutex m;
  std::vector<Outcome> outcomes;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      const std::string name = "thing " + std::to_string(t);
      for (const std::string& u : {std::string("list objects"), std::string("start registration"),
                                   "this is the " + name, std::string("flip"), std::string("done"),
                                   "where is the " + name}) {
        const CommandReply r = s.submit(u);
        std::lock_guard lock(m);
        outcomes.push_back({r.ticket, u, r.ok, r.text});
      }
    });
  }
  for (auto& t : threads) t.join();
  REQUIRE(outcomes.size() == 48);
  std::sort(outcomes.begin(), outcomes.end(), [](const Outcome& a, const Outcome& b) { return a.ticket < b.ticket; });
  for (std::size_t i = 0; i < outcomes.size(); ++i) CHECK(outcomes[i].ticket == i + 1);

  Session seq(cfg, sample_cube_scene());
  for (const auto& o : outcomes) {
    const Response r = seq.submit(o.utterance);
    CAPTURE(o.utterance);
    CHECK(r.ok == o.ok);
    CHECK(r.text == o.text);
  }
  const json st = s.state();
  REQUIRE(st["objects"].size() == seq.registry().size());
  for (std::size_t i = 0; i < seq.registry().size(); ++i) {
    CHECK(st["objects"][i]["name"] == seq.registry().models()[i].name);
    CHECK(st["objects"][i]["exemplars"] == seq.registry().models()[i].exemplars.size());
  }
  CHECK(st["phase"] == phase_name(seq.phase()));

  const auto replies = of_type(s.events().read_after(0), "protocol_reply");
  REQUIRE(replies.size() == 48);
  for (std::size_t i = 0; i < replies.size(); ++i) CHECK(replies[i].payload["ticket"] == i + 1);
}

TEST_CASE("closed sessions refuse commands") {
  ServiceSession s("t4", fast_config(), sample_cube_scene());
  s.close();
  try {
    s.submit("list");
    FAIL("expected State");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::State);
  }
  CHECK(s.events().closed());
}

TEST_CASE("service core hands out sequential ids and rejects unknown ones") {
  ServiceCore core(fast_config());
  const auto a = core.create_session(sample_cube_scene());
  const auto b = core.create_session(std::string(TAILOR_DATA_DIR) + "/gear.scene");
  CHECK(a->id() == "s1");
  CHECK(b->id() == "s2");
  CHECK(core.session_ids() == std::vector<std::string>{"s1", "s2"});
  CHECK(core.session("s2") == b);
  CHECK_THROWS_AS(core.session("s9"), Error);
  CHECK_THROWS_AS(core.create_session("/nonexistent.scene"), Error);
  Config bad = fast_config();
  bad.explorer.budget = 0;
  CHECK_THROWS_AS(core.create_session(sample_cube_scene(), bad), Error);
}

TEST_CASE("HTTP API: sessions, commands, state, frames and errors") {
  LiveServer live(fast_config(5));
  auto cli = live.client();

  auto health = cli.Get("/v1/health");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["status"] == "ok");

  auto created = cli.Post("/v1/sessions", "{}", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const json cj = json::parse(created->body);
  const std::string id = cj["id"];
  CHECK(cj["state"]["phase"] == "idle");
  const std::string base = "/v1/sessions/" + id;

  auto post = [&](const std::string& utterance) {
    auto r = cli.Post(base + "/commands", json{{"utterance", utterance}}.dump(), "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    return json::parse(r->body);
  };
  CHECK(post("Start object registration")["ok"] == true);
  CHECK(post("This is the gear.")["phase"] == "ready");
  post("done");
  const json q = post("Where is the gear?");
  CHECK(q["ok"] == true);
  CHECK(q["detection"]["label"] == "gear");
  CHECK(q["pointing"].size() == 3);
  CHECK(q["text"].get<std::string>().find("The gear is here") == 0);

  const json rejected = post("gibberish words");
  CHECK(rejected["ok"] == false);
  CHECK(rejected["text"].get<std::string>().find("I did not understand") == 0);

  auto state = cli.Get(base + "/state");
  REQUIRE(state);
  const json sj = json::parse(state->body);
  CHECK(sj["objects"][0]["name"] == "gear");
  const std::uint64_t seq_before = sj["last_seq"];

  auto frame = cli.Get(base + "/frames/current");
  REQUIRE(frame);
  CHECK(frame->status == 200);
  const json fj = json::parse(frame->body);
  CHECK(fj["overlay"]["boxes"][0]["x"] == q["detection"]["bbox"]["x"]);
  CHECK(decode_ppm(base64_decode(fj["image_base64"])).width == 160);
  const int first_view = sj["trajectory"][0]["view"];
  auto thumb = cli.Get(base + "/frames/" + std::to_string(first_view));
  REQUIRE(thumb);
  CHECK(thumb->status == 200);

  auto malformed = cli.Post(base + "/commands", "{\"utterance\": ", "application/json");
  REQUIRE(malformed);
  CHECK(malformed->status == 400);
  CHECK(json::parse(malformed->body)["error"]["code"] == "parse");
  auto wrong_shape = cli.Post(base + "/commands", "{\"text\": \"hi\"}", "application/json");
  REQUIRE(wrong_shape);
  CHECK(wrong_shape->status == 400);
  auto after_bad = cli.Get(base + "/state");
  CHECK(json::parse(after_bad->body)["last_seq"] == seq_before);

  auto missing = cli.Get("/v1/sessions/nope/state");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["error"]["code"] == "not_found");
  auto no_frame = cli.Get(base + "/frames/90");
  REQUIRE(no_frame);
  CHECK(no_frame->status == 404);
  auto bad_view = cli.Get(base + "/frames/abc");
  REQUIRE(bad_view);
  CHECK(bad_view->status == 400);
  auto bad_after = cli.Get(base + "/events?format=json&after=x");
  REQUIRE(bad_after);
  CHECK(bad_after->status == 400);
  auto bad_scene = cli.Post("/v1/sessions", "{\"scene\": \"/nonexistent.scene\"}", "application/json");
  REQUIRE(bad_scene);
  CHECK(bad_scene->status == 404);

  auto list = cli.Get("/v1/sessions");
  REQUIRE(list);
  CHECK(json::parse(list->body)["sessions"] == json::array({id}));
}

TEST_CASE("HTTP events: JSON polling and SSE resume") {
  LiveServer live(fast_config(3));
  auto cli = live.client();
  const std::string id = json::parse(cli.Post("/v1/sessions", "{}", "application/json")->body)["id"];
  const std::string base = "/v1/sessions/" + id;
  cli.Post(base + "/commands", R"({"utterance":"start registration"})", "application/json");
  cli.Post(base + "/commands", R"({"utterance":"this is the gear"})", "application/json");

  auto polled = cli.Get(base + "/events?format=json&after=2");
  REQUIRE(polled);
  const json events = json::parse(polled->body)["events"];
  REQUIRE(events.size() > 3);
  CHECK(events[0]["seq"] == 3);
  int views = 0;
  for (const auto& e : events) views += e["type"] == "view_evaluated";
  CHECK(views == 3);

  httplib::Headers headers{{"Last-Event-ID", "4"}};
  auto sse = cli.Get(base + "/events?limit=3", headers);
  REQUIRE(sse);
  CHECK(sse->status == 200);
  CHECK(sse->get_header_value("Content-Type").find("text/event-stream") == 0);
  std::vector<std::uint64_t> ids;
  std::istringstream in(sse->body);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("id: ", 0) == 0) ids.push_back(std::stoull(line.substr(4)));
  CHECK(ids == std::vector<std::uint64_t>{5, 6, 7});
  CHECK(sse->body.find("event: ") != std::string::npos);
  CHECK(sse->body.find("data: {") != std::string::npos);
}
