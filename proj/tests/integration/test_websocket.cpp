#include <doctest.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "inkmotion/server.hpp"
#include "scene_fixture.hpp"

using namespace inkmotion;
using namespace inkmotion::service;
using nlohmann::json;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

namespace {

struct Client {
  boost::asio::io_context ioc;
  websocket::stream<tcp::socket> ws{ioc};

  explicit Client(unsigned short port) {
    tcp::resolver resolver(ioc);
    boost::asio::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws.handshake("127.0.0.1", "/");
  }

  void send(const json& j) { ws.write(boost::asio::buffer(j.dump())); }

  json receive() {
    beast::flat_buffer buffer;
    ws.read(buffer);
    return json::parse(beast::buffers_to_string(buffer.data()));
  }
};

std::string png_base64(const ImageBuffer& image) {
  const auto bytes = encode_png(image);
  return base64_encode(std::string(bytes.begin(), bytes.end()));
}

}  // namespace

TEST_CASE("websocket session round trip") {
  Server server;
  const unsigned short port = server.start("127.0.0.1", 0);
  Client client(port);

  ImageBuffer mask(64, 64, 1);
  const Mask disk = testing::disk_mask(64, 32, 32, 20);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 64; ++x) mask.at(x, y) = disk.at(x, y) ? 1.0f : 0.0f;
  }
  client.send({{"kind", "request"},
               {"op", "create_session"},
               {"body", {{"image", png_base64(testing::ring_image(64, 32, 32, 18))}, {"masks", {png_base64(mask)}}}}});
  const json created = client.receive();
  REQUIRE(created["kind"] == "response");
  REQUIRE(created["body"].contains("session"));
  const std::string id = created["body"]["session"];
  CHECK(created["body"]["meshes"].size() == 1);

  client.send({{"kind", "request"},
               {"op", "mutate"},
               {"session", id},
               {"revision", 0},
               {"body", {{"patch", {{"strokes", {{{"kind", "repel"}, {"path", {{32, 32}}}, {"radius", 30}}}}}}}}});
  const json mutated = client.receive();
  CHECK(mutated["op"] == "mutate");
  CHECK(mutated["body"]["revision"] == 1);

  client.send({{"kind", "request"}, {"op", "simulate"}, {"session", id}, {"revision", 1}, {"body", {{"frame_count", 2}}}});
  CHECK(client.receive()["body"]["started"] == true);
  int frames = 0;
  json done;
  while (done.is_null()) {
    const json e = client.receive();
    CHECK(e["kind"] == "event");
    CHECK(e["revision"] == 1);
    if (e["op"] == "frame") ++frames;
    if (e["op"] == "simulate_done") done = e;
  }
  CHECK(frames == 2);
  CHECK(done["body"]["status"] == "completed");

  client.ws.write(boost::asio::buffer(std::string("{oops")));
  CHECK(client.receive()["body"]["error"]["code"] == "ParseError");
  server.stop();
}
