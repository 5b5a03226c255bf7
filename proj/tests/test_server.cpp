#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mixlevels/server.hpp"
#include "mixlevels/stems.hpp"

using namespace mixlevels;
using json = nlohmann::json;

namespace {

const FileMap& bank_files() {
  static const FileMap files = encode_bank(generate_stems({42, 48000, 120.0}));
  return files;
}

struct Fixture {
  Server server;

  explicit Fixture(std::filesystem::path static_dir = {}) : server(make_options(std::move(static_dir))) {
    server.start();
  }

  static ServerOptions make_options(std::filesystem::path static_dir) {
    ServerOptions o;
    o.address = "127.0.0.1";
    o.port = 0;
    o.stem_files = bank_files();
    o.static_dir = std::move(static_dir);
    return o;
  }

  http::response<http::vector_body<std::uint8_t>> get(const std::string& target) {
    net::io_context io;
    beast::tcp_stream stream(io);
    stream.connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), server.port()));
    http::request<http::empty_body> req{http::verb::get, target, 11};
    req.set(http::field::host, "localhost");
    http::write(stream, req);
    beast::flat_buffer buf;
    http::response_parser<http::vector_body<std::uint8_t>> parser;
    parser.body_limit(64 * 1024 * 1024);
    http::read(stream, buf, parser);
    beast::error_code ec;
    stream.socket().shutdown(tcp::socket::shutdown_both, ec);
    return parser.release();
  }
};

struct WsClient {
  net::io_context io;
  websocket::stream<tcp::socket> ws{io};

  explicit WsClient(unsigned short port) {
    ws.next_layer().connect(tcp::endpoint(net::ip::make_address("127.0.0.1"), port));
    ws.handshake("localhost", "/ws");
    ws.text(true);
  }

  json call(const std::string& frame) {
    ws.write(net::buffer(frame));
    beast::flat_buffer buf;
    ws.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }

  ~WsClient() {
    beast::error_code ec;
    ws.close(websocket::close_code::normal, ec);
  }
};

std::string as_string(const std::vector<std::uint8_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("serves the manifest and stems byte for byte", "[server]") {
  Fixture f;
  const auto manifest = f.get("/stems/manifest.txt");
  CHECK(manifest.result() == http::status::ok);
  const auto text = as_string(manifest.body());
  CHECK(text.find("seed = 42\n") != std::string::npos);
  CHECK(text.find("bpm = 120\n") != std::string::npos);
  for (const char* stem : {"piano", "keyboard", "guitar", "drums", "synth"}) {
    CHECK(text.find(std::string(stem) + ".file = " + stem + ".wav") != std::string::npos);
  }

  const auto piano = f.get("/stems/piano.wav");
  CHECK(piano.result() == http::status::ok);
  CHECK(piano.body().size() == 384000 * 4 + kWavHeaderBytes + kWavDataChunkHeaderBytes);
  CHECK(piano.body() == bank_files().at("piano.wav"));
  CHECK(piano[http::field::content_type] == "audio/wav");

  CHECK(f.get("/stems/banjo.wav").result() == http::status::not_found);
  CHECK(f.get("/healthz").result() == http::status::ok);
  CHECK(f.get("/").result() == http::status::not_found);
}

TEST_CASE("serves exported files unchanged", "[server]") {
  const auto dir = std::filesystem::temp_directory_path() / "mixlevels_server_stems";
  std::filesystem::remove_all(dir);
  export_stems(generate_stems({42, 48000, 120.0}), dir);
  const auto from_disk = read_stem_dir(dir);
  CHECK(from_disk == bank_files());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_stem_dir(dir), IoError);
}

TEST_CASE("serves static UI assets", "[server]") {
  const auto dir = std::filesystem::temp_directory_path() / "mixlevels_server_static";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "index.html") << "<html>level</html>";
  Fixture f(dir);
  const auto index = f.get("/");
  CHECK(index.result() == http::status::ok);
  CHECK(as_string(index.body()) == "<html>level</html>");
  CHECK(f.get("/../etc/passwd").result() == http::status::not_found);
  std::filesystem::remove_all(dir);
}

TEST_CASE("websocket control channel", "[server]") {
  Fixture f;
  WsClient a(f.server.port());
  auto r = a.call(R"({"type":"tilt","pitch_deg":0,"roll_deg":0})");
  CHECK(r["type"] == "gains");
  CHECK(r["gate_on"] == true);
  CHECK(r["synth"] == 1.0);
  CHECK(r["seq"] == 1);
  CHECK(a.call(R"({"type":"accel","ax":0,"ay":0,"az":1})")["seq"] == 2);
  CHECK(a.call(R"({"type":"config-get"})")["type"] == "config");
  CHECK(a.call("garbage")["type"] == "error");

  WsClient b(f.server.port());
  CHECK(b.call(R"({"type":"tilt","pitch_deg":0,"roll_deg":0})")["seq"] == 1);
  CHECK(f.server.sessions().size() == 2);
}
