// Reference depth backend speaking the wire protocol on stdin/stdout.
// Computes the synthetic depth oracle for every frame, so orchestrator tests
// can compare subprocess results against in-process ones. The --mode flag
// injects protocol violations for negative testing:
//   ok           normal operation (default)
//   bad-version  handshake reply carries protocol version 2
//   error-hello  handshake reply is an ERROR message
//   wrong-size   depth replies drop half the values
//   error-frame  first frame request is answered with an ERROR message
//   wrong-type   depth replies use an unknown message type
//   hang         never answer frame requests
//   wrong-id     depth replies carry frame id + 1

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "augpipe/depthio.hpp"
#include "augpipe/image.hpp"

namespace {

using augpipe::kDepthProtocolVersion;
using augpipe::kMsgDepth;
using augpipe::kMsgError;
using augpipe::kMsgFrame;
using augpipe::kMsgHello;

bool read_exact(std::uint8_t* buf, std::size_t n) {
  return std::fread(buf, 1, n, stdin) == n;
}

void write_all(const std::uint8_t* buf, std::size_t n) {
  std::fwrite(buf, 1, n, stdout);
  std::fflush(stdout);
}

std::uint32_t get_u32be(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void put_u32be(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(static_cast<std::uint8_t>(v >> 24));
  buf.push_back(static_cast<std::uint8_t>(v >> 16));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
  buf.push_back(static_cast<std::uint8_t>(v));
}

void send_message(std::uint8_t type, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> buf;
  buf.reserve(5 + payload.size());
  put_u32be(buf, static_cast<std::uint32_t>(1 + payload.size()));
  buf.push_back(type);
  buf.insert(buf.end(), payload.begin(), payload.end());
  write_all(buf.data(), buf.size());
}

void send_error(const std::string& msg) {
  send_message(kMsgError, std::vector<std::uint8_t>(msg.begin(), msg.end()));
}

}  // namespace

int main(int argc, char** argv) {
  std::string mode = "ok";
  std::string variant = "stub-oracle";
  int blur_radius = 2;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--mode" && i + 1 < argc) {
      mode = argv[++i];
    } else if (arg == "--variant" && i + 1 < argc) {
      variant = argv[++i];
    } else if (arg == "--blur" && i + 1 < argc) {
      blur_radius = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "depth_stub: unknown argument '%s'\n", arg.c_str());
      return 2;
    }
  }

  for (;;) {
    std::uint8_t header[4];
    if (!read_exact(header, 4)) return 0;  // clean EOF: orchestrator is done
    const std::uint32_t len = get_u32be(header);
    if (len < 1 || len > (1u << 28)) {
      send_error("malformed message length");
      return 1;
    }
    std::vector<std::uint8_t> body(len);
    if (!read_exact(body.data(), len)) return 1;
    const std::uint8_t type = body[0];

    if (type == kMsgHello) {
      if (body.size() < 2 || body[1] != kDepthProtocolVersion) {
        send_error("unsupported protocol version");
        return 1;
      }
      if (mode == "error-hello") {
        send_error("stub configured to refuse the handshake");
        continue;
      }
      std::vector<std::uint8_t> reply;
      reply.push_back(mode == "bad-version" ? 0x02 : kDepthProtocolVersion);
      reply.insert(reply.end(), variant.begin(), variant.end());
      send_message(kMsgHello, reply);
      continue;
    }

    if (type == kMsgFrame) {
      if (body.size() < 13) {
        send_error("frame message truncated");
        return 1;
      }
      const std::uint32_t id = get_u32be(body.data() + 1);
      const std::uint32_t w = get_u32be(body.data() + 5);
      const std::uint32_t h = get_u32be(body.data() + 9);
      const std::size_t expect = static_cast<std::size_t>(w) * h * 3;
      if (w == 0 || h == 0 || body.size() != 13 + expect) {
        send_error("frame payload size mismatch");
        return 1;
      }
      if (mode == "hang") {
        // Swallow the request; the orchestrator's timeout must fire.
        continue;
      }
      if (mode == "error-frame") {
        send_error("stub configured to fail frame " + std::to_string(id));
        continue;
      }
      augpipe::RgbImage img(static_cast<int>(w), static_cast<int>(h));
      for (std::size_t i = 0; i < img.data.size(); ++i) {
        img.data[i] = static_cast<float>(body[13 + i]) / 255.0f;
      }
      const augpipe::DepthMap depth = augpipe::synthetic_depth_oracle(img, blur_radius);
      std::vector<std::uint8_t> reply;
      put_u32be(reply, mode == "wrong-id" ? id + 1 : id);
      const std::size_t count =
          mode == "wrong-size" ? depth.data.size() / 2 : depth.data.size();
      for (std::size_t i = 0; i < count; ++i) {
        const auto q = static_cast<std::uint16_t>(
            std::llround(static_cast<double>(depth.data[i]) * 65535.0));
        reply.push_back(static_cast<std::uint8_t>(q >> 8));
        reply.push_back(static_cast<std::uint8_t>(q & 0xFF));
      }
      send_message(mode == "wrong-type" ? 0x55 : kMsgDepth, reply);
      continue;
    }

    send_error("unknown message type " + std::to_string(type));
    return 1;
  }
}
