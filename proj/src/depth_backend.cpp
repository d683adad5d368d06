#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>
#include <vector>

#include "augpipe/depthio.hpp"
#include "augpipe/errors.hpp"

namespace augpipe {

namespace {

using Clock = std::chrono::steady_clock;

// Largest message we will accept from a backend; a 4096x4096 depth map is
// ~34 MB, so this leaves generous headroom while bounding a rogue length.
constexpr std::uint32_t kMaxMessageBytes = 1u << 28;

void put_u32be(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(static_cast<std::uint8_t>(v >> 24));
  buf.push_back(static_cast<std::uint8_t>(v >> 16));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
  buf.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t get_u32be(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  if (left.count() <= 0) return 0;
  return left.count() > 60000 ? 60000 : static_cast<int>(left.count());
}

void ignore_sigpipe_once() {
  // A backend that dies mid-write must surface as EPIPE, not kill the caller.
  static std::once_flag flag;
  std::call_once(flag, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) {
  const int flags = ::fcntl(fd, F_GETFL, 0);
  if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0) {
    throw ProtocolError("cannot configure backend pipe");
  }
}

/// Owns the spawned estimator: pipes to its stdin/stdout, reaps on scope exit.
class ChildProcess {
 public:
  explicit ChildProcess(const std::vector<std::string>& argv) {
    ignore_sigpipe_once();
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw ProtocolError("pipe creation failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw ProtocolError("pipe creation failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      throw ProtocolError("fork failed");
    }
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
      std::vector<char*> args;
      args.reserve(argv.size() + 1);
      for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      ::execvp(args[0], args.data());
      ::_exit(127);  // exec failed; parent sees EOF and reports it
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    set_nonblocking(in_fd_);
    set_nonblocking(out_fd_);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    if (pid_ > 0) {
      // Give the backend a moment to exit on EOF, then force it.
      for (int i = 0; i < 200; ++i) {
        int status = 0;
        const pid_t r = ::waitpid(pid_, &status, WNOHANG);
        if (r == pid_ || r < 0) return;
        ::usleep(10 * 1000);
      }
      ::kill(pid_, SIGKILL);
      int status = 0;
      ::waitpid(pid_, &status, 0);
    }
  }

  void write_all(const std::uint8_t* data, std::size_t len, Clock::time_point deadline) {
    std::size_t done = 0;
    while (done < len) {
      pollfd pfd{in_fd_, POLLOUT, 0};
      const int pr = ::poll(&pfd, 1, remaining_ms(deadline));
      if (pr == 0) throw ProtocolError("timeout writing to depth backend");
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("poll failed while writing to depth backend");
      }
      if (pfd.revents & POLLERR) throw ProtocolError("depth backend closed its input");
      const ssize_t n = ::write(in_fd_, data + done, len - done);
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
        if (errno == EPIPE) throw ProtocolError("depth backend exited before reading the frame");
        throw ProtocolError(std::string("write to depth backend failed: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  void read_exact(std::uint8_t* data, std::size_t len, Clock::time_point deadline) {
    std::size_t done = 0;
    while (done < len) {
      pollfd pfd{out_fd_, POLLIN, 0};
      const int pr = ::poll(&pfd, 1, remaining_ms(deadline));
      if (pr == 0) throw ProtocolError("timeout waiting for depth backend reply");
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError("poll failed while reading from depth backend");
      }
      const ssize_t n = ::read(out_fd_, data + done, len - done);
      if (n == 0) throw ProtocolError("depth backend closed the stream mid-message");
      if (n < 0) {
        if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) continue;
        throw ProtocolError(std::string("read from depth backend failed: ") +
                            std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

 private:
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
};

struct Message {
  std::uint8_t type;
  std::vector<std::uint8_t> payload;
};

void send_message(ChildProcess& child, std::uint8_t type, std::span<const std::uint8_t> payload,
                  Clock::time_point deadline) {
  std::vector<std::uint8_t> buf;
  buf.reserve(5 + payload.size());
  put_u32be(buf, static_cast<std::uint32_t>(1 + payload.size()));
  buf.push_back(type);
  buf.insert(buf.end(), payload.begin(), payload.end());
  child.write_all(buf.data(), buf.size(), deadline);
}

Message read_message(ChildProcess& child, Clock::time_point deadline) {
  std::uint8_t header[4];
  child.read_exact(header, 4, deadline);
  const std::uint32_t len = get_u32be(header);
  if (len < 1) throw ProtocolError("backend sent an empty message body");
  if (len > kMaxMessageBytes) {
    throw ProtocolError("backend message of " + std::to_string(len) + " bytes exceeds the limit");
  }
  Message msg;
  std::vector<std::uint8_t> body(len);
  child.read_exact(body.data(), len, deadline);
  msg.type = body[0];
  msg.payload.assign(body.begin() + 1, body.end());
  return msg;
}

std::string payload_text(const std::vector<std::uint8_t>& payload) {
  return std::string(payload.begin(), payload.end());
}

Clock::time_point deadline_after(double seconds) {
  return Clock::now() + std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

}  // namespace

std::vector<DepthMap> run_external_backend(const DepthBackendSpec& spec,
                                           std::span<const RgbImage> frames) {
  spec.validate();
  if (spec.kind != DepthBackendKind::ExternalProcess) {
    throw InvalidParameterError("run_external_backend requires an external-process spec");
  }
  for (const RgbImage& f : frames) validate_shape(f);

  ChildProcess child(spec.command);

  // Handshake: HELLO carries the protocol version and our model-variant tag;
  // the backend must echo the version.
  {
    const auto deadline = deadline_after(spec.frame_timeout_sec);
    std::vector<std::uint8_t> hello;
    hello.push_back(kDepthProtocolVersion);
    hello.insert(hello.end(), spec.model_variant.begin(), spec.model_variant.end());
    send_message(child, kMsgHello, hello, deadline);
    const Message reply = read_message(child, deadline);
    if (reply.type == kMsgError) {
      throw ProtocolError("backend rejected handshake: " + payload_text(reply.payload));
    }
    if (reply.type != kMsgHello || reply.payload.empty()) {
      throw ProtocolError("backend handshake reply malformed");
    }
    if (reply.payload[0] != kDepthProtocolVersion) {
      throw ProtocolError("backend speaks protocol version " +
                          std::to_string(reply.payload[0]) + ", expected " +
                          std::to_string(kDepthProtocolVersion));
    }
  }

  std::vector<DepthMap> out;
  out.reserve(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const RgbImage& frame = frames[i];
    const auto deadline = deadline_after(spec.frame_timeout_sec);
    std::vector<std::uint8_t> payload;
    payload.reserve(12 + frame.value_count());
    put_u32be(payload, static_cast<std::uint32_t>(i));
    put_u32be(payload, static_cast<std::uint32_t>(frame.width));
    put_u32be(payload, static_cast<std::uint32_t>(frame.height));
    for (float v : frame.data) {
      payload.push_back(
          static_cast<std::uint8_t>(std::llround(clamp01(static_cast<double>(v)) * 255.0)));
    }
    send_message(child, kMsgFrame, payload, deadline);

    const Message reply = read_message(child, deadline);
    if (reply.type == kMsgError) {
      throw ProtocolError("backend error on frame " + std::to_string(i) + ": " +
                          payload_text(reply.payload));
    }
    if (reply.type != kMsgDepth) {
      throw ProtocolError("unexpected message type " + std::to_string(reply.type) +
                          " for frame " + std::to_string(i));
    }
    if (reply.payload.size() < 4) {
      throw ProtocolError("depth reply for frame " + std::to_string(i) + " truncated");
    }
    const std::uint32_t id = get_u32be(reply.payload.data());
    if (id != i) {
      throw ProtocolError("depth reply id " + std::to_string(id) + " does not match frame " +
                          std::to_string(i));
    }
    const std::size_t expected = frame.pixel_count() * 2;
    const std::size_t got = reply.payload.size() - 4;
    if (got != expected) {
      throw AlignmentError("frame " + std::to_string(i) + ": backend returned " +
                           std::to_string(got / 2) + " depth values, expected " +
                           std::to_string(frame.pixel_count()));
    }
    DepthMap d(frame.width, frame.height);
    const std::uint8_t* p = reply.payload.data() + 4;
    for (std::size_t k = 0; k < d.data.size(); ++k) {
      const std::uint16_t q = static_cast<std::uint16_t>((p[2 * k] << 8) | p[2 * k + 1]);
      d.data[k] = static_cast<float>(q) / 65535.0f;
    }
    verify_alignment(frame, d);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace augpipe
