#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "expect_error.hpp"
#include "fixtures.hpp"
#include "prismmap/backends.hpp"
#include "prismmap/reproject.hpp"
#include "prismmap/synthetic.hpp"

using namespace prismmap;
using testing::kind_of;

namespace {

// Mid-grey canvas with one solid square of pure colour.
Image canvas_with_square(int size, int x0, int y0, int side, std::array<std::uint8_t, 3> rgb) {
  Image img(size, size, 3);
  for (auto& v : img.pixels()) v = 128;
  for (int y = y0; y < y0 + side; ++y) {
    for (int x = x0; x < x0 + side; ++x) {
      for (int c = 0; c < 3; ++c) img.pixel(x, y)[c] = rgb[c];
    }
  }
  return img;
}

class FakeTransport : public HttpTransport {
 public:
  std::vector<HttpResponse> script;
  std::vector<HttpRequest> seen;

  HttpResponse post(const HttpRequest& request) override {
    seen.push_back(request);
    if (seen.size() > script.size()) return {500, ""};
    return script[seen.size() - 1];
  }
};

const std::string kOk = R"({"labels": [{"label": "Outdoor", "confidence": 0.65}]})";

FaceImage small_face() { return FaceImage::from_image(testing::noise_image(8, 8, 3), ImageFormat::kPng); }

RemoteOptions remote_opts() {
  RemoteOptions o;
  o.endpoint = "http://example.invalid/v1/labels";
  o.api_key = "secret";
  return o;
}

}  // namespace

TEST_CASE("stub reports an intact fiducial with confidence 0.95") {
  const auto img = canvas_with_square(128, 40, 30, 16, {255, 0, 0});
  StubBackend stub;
  const auto labels = obtain_labels(FaceImage::from_image(img, ImageFormat::kPng), stub);
  REQUIRE(labels.size() == 1);
  CHECK(labels[0].label() == "fiducial-red");
  CHECK(labels[0].confidence() == 0.95);
}

TEST_CASE("stub detects each colour independently and ignores small or impure blobs") {
  auto img = canvas_with_square(256, 10, 10, 40, {0, 0, 255});
  for (int y = 100; y < 140; ++y) {
    for (int x = 100; x < 140; ++x) img.pixel(x, y)[1] = 255, img.pixel(x, y)[0] = 0, img.pixel(x, y)[2] = 0;
  }
  // Too small.
  for (int y = 200; y < 210; ++y) {
    for (int x = 200; x < 210; ++x) img.pixel(x, y)[0] = 255, img.pixel(x, y)[1] = 0, img.pixel(x, y)[2] = 0;
  }
  // Not pure: orange.
  for (int y = 200; y < 240; ++y) {
    for (int x = 10; x < 50; ++x) img.pixel(x, y)[0] = 255, img.pixel(x, y)[1] = 140, img.pixel(x, y)[2] = 0;
  }
  StubBackend stub;
  const auto dump = stub.obtain_labels(FaceImage::from_image(img, ImageFormat::kPng));
  REQUIRE(dump.labels.size() == 2);
  CHECK(dump.labels[0].label() == "fiducial-blue");
  CHECK(dump.labels[1].label() == "fiducial-green");
  CHECK(dump.backend == "stub");
}

TEST_CASE("stub rejects a stretched fiducial") {
  // 40 x 34: aspect 0.85, whole template rows unmatched.
  Image img(128, 128, 3);
  for (auto& v : img.pixels()) v = 128;
  for (int y = 20; y < 54; ++y) {
    for (int x = 20; x < 60; ++x) img.pixel(x, y)[0] = 255, img.pixel(x, y)[1] = 0, img.pixel(x, y)[2] = 0;
  }
  const auto cands = find_fiducial_candidates(img);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].match < 0.98);
  StubBackend stub;
  CHECK(stub.obtain_labels(FaceImage::from_image(img, ImageFormat::kPng)).labels.empty());
}

TEST_CASE("stub tolerates vertical shear but not a tilted square") {
  // Parallelogram: each column is 40 px tall, offset by x / 4.
  Image sheared(128, 128, 3);
  for (auto& v : sheared.pixels()) v = 128;
  for (int x = 20; x < 60; ++x) {
    for (int y = 20 + (x - 20) / 4; y < 60 + (x - 20) / 4; ++y) {
      sheared.pixel(x, y)[0] = 0, sheared.pixel(x, y)[1] = 255, sheared.pixel(x, y)[2] = 0;
    }
  }
  auto cands = find_fiducial_candidates(sheared);
  REQUIRE(cands.size() == 1);
  CHECK(cands[0].match >= 0.98);
}

TEST_CASE("stub: equirect misses an off-equator poster that a prism face recovers") {
  const std::vector<synthetic::Fiducial> posters = {{FiducialColor::kRed, 0.0, 0.0, 8.0},
                                                     {FiducialColor::kBlue, 90.0, 19.0, 8.0}};
  const auto eq = EquirectImage::validate(synthetic::render_fiducial_photosphere(1440, posters, 1));
  StubBackend stub;
  const auto direct = stub.obtain_labels(FaceImage::from_image(eq.image(), ImageFormat::kPng));
  REQUIRE(direct.labels.size() == 1);
  CHECK(direct.labels[0].label() == "fiducial-red");

  PrismMapConfig cfg{4, 90.0, 256};
  const auto map = render_prism_map(eq, cfg);
  const auto face1 = stub.obtain_labels(FaceImage::from_image(map.faces[1], ImageFormat::kPng));
  REQUIRE(face1.labels.size() == 1);
  CHECK(face1.labels[0].label() == "fiducial-blue");
}

TEST_CASE("stub output is deterministic") {
  const auto eq = synthetic::render_fiducial_photosphere(720, synthetic::corpus_layout(0), 7);
  StubBackend stub;
  const auto face = FaceImage::from_image(eq, ImageFormat::kPng);
  CHECK(dump_to_json_text(stub.obtain_labels(face)) == dump_to_json_text(stub.obtain_labels(face)));
}

TEST_CASE("FaceImage keys faces by the hash of their encoded bytes") {
  const auto img = testing::noise_image(16, 16, 2);
  const auto a = FaceImage::from_image(img, ImageFormat::kPng);
  const auto b = FaceImage::from_encoded(std::vector<std::uint8_t>(a.encoded().begin(), a.encoded().end()));
  CHECK(a.sha256() == b.sha256());
  CHECK(a.sha256().size() == 64);
  CHECK(b.pixels() == img);
  const auto j = FaceImage::from_image(img, ImageFormat::kJpeg);
  CHECK(j.format() == ImageFormat::kJpeg);
  CHECK(FaceImage::from_encoded(std::vector<std::uint8_t>(j.encoded().begin(), j.encoded().end())).format() ==
        ImageFormat::kJpeg);
}

TEST_CASE("label dumps round-trip through JSON") {
  LabelDump d{"abc123", "stub", {LabelObservation("outdoor", 0.65), LabelObservation("sky", 1.0 / 3.0)}};
  const auto text = dump_to_json_text(d);
  CHECK(text.find("\"image\"") < text.find("\"backend\""));
  CHECK(text.find("\"backend\"") < text.find("\"labels\""));
  const auto parsed = parse_label_dumps(text);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].image == "abc123");
  CHECK(parsed[0].labels == d.labels);
  CHECK(dump_to_json_text(parsed[0]) == text);

  const auto arr = parse_label_dumps("[" + text + "," + text + "]");
  CHECK(arr.size() == 2);
  CHECK(kind_of([] { parse_label_dumps("{\"image\": 1}"); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("replay returns the recorded list for a known hash") {
  const auto face = small_face();
  ReplayBackend replay({LabelDump{face.sha256(), "remote:google", {LabelObservation("outdoor", 0.65)}}});
  const auto dump = replay.obtain_labels(face);
  CHECK(dump.backend == "remote:google");
  REQUIRE(dump.labels.size() == 1);
  CHECK(dump.labels[0] == LabelObservation("outdoor", 0.65));
}

TEST_CASE("replay names the missing hash") {
  ReplayBackend replay(std::vector<LabelDump>{});
  const auto face = small_face();
  std::string msg;
  CHECK(kind_of([&] { replay.obtain_labels(face); }, &msg) == ErrorKind::kReplayMissing);
  CHECK(msg.find(face.sha256()) != std::string::npos);
}

TEST_CASE("replay loads a directory of dump files") {
  const auto dir = std::filesystem::temp_directory_path() / "prismmap_replay_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto face = small_face();
  write_file_atomic(dir / "a.json", dump_to_json_text({face.sha256(), "stub", {LabelObservation("x", 0.9)}}));
  write_file_atomic(dir / "ignored.txt", std::string("not json"));
  ReplayBackend replay(ReplayOptions{dir});
  CHECK(replay.size() == 1);
  CHECK(replay.obtain_labels(face).labels[0].label() == "x");
  CHECK(kind_of([&] { ReplayBackend(ReplayOptions{dir / "nope"}); }) == ErrorKind::kBackendConfig);
  std::filesystem::remove_all(dir);
}

TEST_CASE("remote retries 429 three times then succeeds") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{429, ""}, {429, ""}, {429, ""}, {200, kOk}};
  std::vector<std::chrono::nanoseconds> sleeps;
  RemoteBackend remote(remote_opts(), t, [&](std::chrono::nanoseconds d) { sleeps.push_back(d); });
  const auto dump = remote.obtain_labels(small_face());
  CHECK(t->seen.size() == 4);
  REQUIRE(dump.labels.size() == 1);
  CHECK(dump.labels[0] == LabelObservation("outdoor", 0.65));
  CHECK(dump.backend == "remote:generic");
  REQUIRE(sleeps.size() == 3);
  CHECK(sleeps[0] == std::chrono::milliseconds(500));
  CHECK(sleeps[1] == std::chrono::milliseconds(1000));
  CHECK(sleeps[2] == std::chrono::milliseconds(2000));
}

TEST_CASE("remote gives up with a quota error after four 429s") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{429, ""}, {429, ""}, {429, ""}, {429, ""}, {200, kOk}};
  RemoteBackend remote(remote_opts(), t, [](std::chrono::nanoseconds) {});
  std::string msg;
  CHECK(kind_of([&] { remote.obtain_labels(small_face()); }, &msg) == ErrorKind::kBackendQuota);
  CHECK(t->seen.size() == 4);
  CHECK(msg.find("remote:generic") != std::string::npos);
  CHECK(msg.find("example.invalid") != std::string::npos);
}

TEST_CASE("remote surfaces auth failures without retrying") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{401, ""}, {200, kOk}};
  RemoteBackend remote(remote_opts(), t, [](std::chrono::nanoseconds) {});
  CHECK(kind_of([&] { remote.obtain_labels(small_face()); }) == ErrorKind::kBackendAuth);
  CHECK(t->seen.size() == 1);
}

TEST_CASE("remote maps server errors and bad bodies to transport errors") {
  auto t = std::make_shared<FakeTransport>();
  t->script = {{503, ""}, {200, "not json"}};
  RemoteBackend remote(remote_opts(), t, [](std::chrono::nanoseconds) {});
  CHECK(kind_of([&] { remote.obtain_labels(small_face()); }) == ErrorKind::kBackendTransport);
  CHECK(t->seen.size() == 2);
}

TEST_CASE("remote backoff doubles up to the cap") {
  auto o = remote_opts();
  o.initial_backoff = std::chrono::milliseconds(500);
  o.max_backoff = std::chrono::milliseconds(3000);
  RemoteBackend remote(o, std::make_shared<FakeTransport>());
  CHECK(remote.backoff_delay(1).count() == 500);
  CHECK(remote.backoff_delay(3).count() == 2000);
  CHECK(remote.backoff_delay(4).count() == 3000);
  CHECK(remote.backoff_delay(30).count() == 3000);
}

TEST_CASE("remote without a key fails before any request") {
  auto t = std::make_shared<FakeTransport>();
  auto o = remote_opts();
  o.api_key.clear();
  CHECK(kind_of([&] { RemoteBackend(o, t); }) == ErrorKind::kBackendConfig);
  CHECK(t->seen.empty());
  CHECK(kind_of([&] { make_backend(o); }) == ErrorKind::kBackendConfig);
  o = remote_opts();
  o.endpoint.clear();
  CHECK(kind_of([&] { make_backend(o); }) == ErrorKind::kBackendConfig);
  o = remote_opts();
  o.provider = "nope";
  CHECK(kind_of([&] { make_backend(o); }) == ErrorKind::kBackendConfig);
}

TEST_CASE("rate limiter spaces calls by the configured interval") {
  std::vector<std::chrono::nanoseconds> waits;
  RateLimiter limiter(10.0, [&](std::chrono::nanoseconds d) { waits.push_back(d); });
  for (int i = 0; i < 4; ++i) limiter.acquire();
  REQUIRE(waits.size() == 4);
  CHECK(waits[0].count() == 0);
  // Fake sleeper does not advance time, so each slot is reserved 100 ms later.
  for (int i = 1; i < 4; ++i) {
    CHECK(waits[i] > std::chrono::milliseconds(100 * i - 20));
    CHECK(waits[i] <= std::chrono::milliseconds(100 * i));
  }
  RateLimiter off(0.0, [&](std::chrono::nanoseconds) { FAIL("should not sleep"); });
  off.acquire();
}

TEST_CASE("provider adapters build and parse their wire formats") {
  const auto face = small_face();
  {
    auto a = make_provider_adapter("generic");
    const auto req = a->build_request("http://h/x", "k", face);
    CHECK(req.headers.find("Authorization")->second == "Bearer k");
    CHECK(req.content_type == "image/png");
    CHECK(req.body.size() == face.encoded().size());
  }
  {
    auto a = make_provider_adapter("google");
    const auto req = a->build_request("https://vision/v1/images:annotate", "k", face);
    CHECK(req.url == "https://vision/v1/images:annotate?key=k");
    const auto j = nlohmann::json::parse(req.body);
    CHECK(j["requests"][0]["features"][0]["type"] == "LABEL_DETECTION");
    CHECK_FALSE(j["requests"][0]["image"]["content"].get<std::string>().empty());
    const auto obs = a->parse_response(
        R"({"responses":[{"labelAnnotations":[{"description":"Living Room","score":0.91}]}]})");
    REQUIRE(obs.size() == 1);
    CHECK(obs[0] == LabelObservation("living room", 0.91));
    CHECK(a->parse_response(R"({"responses":[{}]})").empty());
    CHECK(kind_of([&] { a->parse_response(R"({"responses":[{"error":{"code":7}}]})"); }) ==
          ErrorKind::kBackendTransport);
  }
  {
    auto a = make_provider_adapter("azure");
    const auto req = a->build_request("https://az/vision/v3.2/analyze?visualFeatures=Tags", "k", face);
    CHECK(req.headers.find("Ocp-Apim-Subscription-Key")->second == "k");
    const auto obs = a->parse_response(R"({"tags":[{"name":"indoor","confidence":0.99}]})");
    REQUIRE(obs.size() == 1);
    CHECK(obs[0].label() == "indoor");
  }
}

TEST_CASE("remote backend talks to a local HTTP server") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string auth;
  server.Post("/labels", [&](const httplib::Request& req, httplib::Response& res) {
    if (++hits == 1) {
      res.status = 429;
      return;
    }
    auth = req.get_header_value("Authorization");
    res.set_content(kOk, "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto o = remote_opts();
  o.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/labels";
  o.initial_backoff = std::chrono::milliseconds(1);
  auto backend = make_backend(o);
  const auto dump = backend->obtain_labels(small_face());
  server.stop();
  th.join();
  CHECK(hits == 2);
  CHECK(auth == "Bearer secret");
  REQUIRE(dump.labels.size() == 1);
  CHECK(dump.labels[0].label() == "outdoor");
}

TEST_CASE("connection failures are transport errors") {
  auto o = remote_opts();
  o.endpoint = "http://127.0.0.1:1/labels";
  o.max_retries = 1;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(500);
  auto backend = make_backend(o);
  CHECK(kind_of([&] { backend->obtain_labels(small_face()); }) == ErrorKind::kBackendTransport);
}
