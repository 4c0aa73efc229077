#include "csiblt/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <deque>
#include <span>

namespace csiblt {

namespace {

void append_frame(std::vector<std::uint8_t>& log, const Message& msg,
                  std::deque<std::uint8_t>& queue) {
  const auto bytes = encode_message(msg);
  log.insert(log.end(), bytes.begin(), bytes.end());
  queue.insert(queue.end(), bytes.begin(), bytes.end());
}

std::optional<Message> pop_frame(std::deque<std::uint8_t>& queue) {
  std::vector<std::uint8_t> buf(queue.begin(), queue.end());
  if (frame_bytes_missing(buf) != 0) return std::nullopt;
  std::size_t consumed = 0;
  Message msg = decode_message(buf, consumed);
  queue.erase(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(consumed));
  return msg;
}

}  // namespace

SessionResult run_inproc_session(const std::vector<Element>& set_a,
                                 const std::vector<Element>& set_b, const SessionParams& params,
                                 Receiver::Options options, std::uint64_t truncate_after_rows) {
  SessionResult result;
  std::deque<std::uint8_t> to_receiver;
  std::deque<std::uint8_t> to_sender;

  Sender sender(set_a, params);
  append_frame(result.bytes_to_receiver, sender.hello(), to_receiver);

  const Message hello_msg = *pop_frame(to_receiver);
  SessionParams receiver_params;
  try {
    receiver_params = params_from_hello(std::get<HelloMsg>(hello_msg));
  } catch (const std::invalid_argument&) {
    const AbortMsg abort{AbortReason::kParameterRejection};
    append_frame(result.bytes_to_sender, abort, to_sender);
    result.abort = abort;
    return result;
  }
  Receiver receiver(set_b, receiver_params, options);

  while (true) {
    if (truncate_after_rows != 0 && sender.rows_emitted() >= truncate_after_rows) {
      // Sender dies silently; the receiver observes end of stream.
      const auto step = receiver.on_stream_end();
      result.abort = step.abort;
      result.sender_rows_emitted = sender.rows_emitted();
      return result;
    }

    const auto row = sender.next_row();
    if (!row.has_value()) {
      const auto step = receiver.on_stream_end();
      if (step.kind == Receiver::Step::Kind::kDone) {
        result.completed = true;
        result.outcome = step.outcome;
      } else {
        result.abort = step.abort;
      }
      result.sender_rows_emitted = sender.rows_emitted();
      return result;
    }

    append_frame(result.bytes_to_receiver, *row, to_receiver);
    const Message row_msg = *pop_frame(to_receiver);
    const auto step = receiver.on_row(std::get<RowMsg>(row_msg));

    if (step.kind == Receiver::Step::Kind::kDone) {
      const DoneMsg done{static_cast<std::uint32_t>(step.outcome.delta_a.size()),
                         static_cast<std::uint32_t>(step.outcome.delta_b.size())};
      append_frame(result.bytes_to_sender, done, to_sender);
      (void)pop_frame(to_sender);
      sender.acknowledge();
      result.completed = true;
      result.outcome = step.outcome;
      result.sender_rows_emitted = sender.rows_emitted();
      return result;
    }
    if (step.kind == Receiver::Step::Kind::kAbort) {
      append_frame(result.bytes_to_sender, step.abort, to_sender);
      (void)pop_frame(to_sender);
      sender.acknowledge();
      result.abort = step.abort;
      result.sender_rows_emitted = sender.rows_emitted();
      return result;
    }
  }
}

namespace {

struct Socket {
  int fd = -1;

  Socket() = default;
  explicit Socket(int f) : fd(f) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  Socket(Socket&& other) noexcept : fd(other.fd) { other.fd = -1; }
  ~Socket() {
    if (fd >= 0) ::close(fd);
  }
};

std::pair<std::string, std::string> split_addr(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == addr.size()) {
    throw TransportError("transport: address must be host:port");
  }
  return {addr.substr(0, colon), addr.substr(colon + 1)};
}

Socket connect_to(const std::string& addr) {
  const auto [host, port] = split_addr(addr);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw TransportError("transport: cannot resolve " + addr);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("transport: connect to " + addr + " failed");
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(fd);
}

Socket accept_on(const std::string& addr, std::chrono::milliseconds timeout) {
  const auto [host, port] = split_addr(addr);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw TransportError("transport: cannot resolve " + addr);
  }
  Socket listener;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 1) == 0) {
      listener.fd = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(res);
  if (listener.fd < 0) throw TransportError("transport: cannot listen on " + addr);

  pollfd pfd{listener.fd, POLLIN, 0};
  const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc <= 0) throw TransportError("transport: accept timed out");
  const int conn = ::accept(listener.fd, nullptr, nullptr);
  if (conn < 0) throw TransportError("transport: accept failed");
  const int one = 1;
  ::setsockopt(conn, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return Socket(conn);
}

void send_all(const Socket& sock, const std::vector<std::uint8_t>& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t rc = ::send(sock.fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (rc <= 0) throw TransportError("transport: send failed");
    sent += static_cast<std::size_t>(rc);
  }
}

// Buffered framed reader over a socket.
class FrameReader {
 public:
  explicit FrameReader(const Socket& sock) : fd_(sock.fd) {}

  // Blocks up to `timeout` for one frame. nullopt means the peer closed.
  std::optional<Message> read_frame(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      if (frame_bytes_missing(buffer_) == 0) return take_frame();
      const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw TransportError("transport: read timed out");
      pollfd pfd{fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
      if (rc < 0) throw TransportError("transport: poll failed");
      if (rc == 0) throw TransportError("transport: read timed out");
      if (!fill()) return std::nullopt;
    }
  }

  // Drains whatever is available without blocking; nullopt when no complete
  // frame is buffered. peer_closed() reports a clean shutdown seen here.
  std::optional<Message> poll_frame() {
    while (frame_bytes_missing(buffer_) != 0) {
      pollfd pfd{fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, 0);
      if (rc <= 0) return std::nullopt;
      if (!fill()) return std::nullopt;
    }
    return take_frame();
  }

  bool peer_closed() const { return closed_; }

 private:
  bool fill() {
    std::uint8_t chunk[4096];
    const ssize_t rc = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (rc < 0) throw TransportError("transport: recv failed");
    if (rc == 0) {
      closed_ = true;
      return false;
    }
    buffer_.insert(buffer_.end(), chunk, chunk + rc);
    return true;
  }

  Message take_frame() {
    std::size_t consumed = 0;
    Message msg = decode_message(buffer_, consumed);
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(consumed));
    return msg;
  }

  int fd_;
  std::vector<std::uint8_t> buffer_;
  bool closed_ = false;
};

}  // namespace

SessionResult run_tcp_sender(const std::string& connect_addr, const std::vector<Element>& set_a,
                             const SessionParams& params, std::chrono::milliseconds timeout) {
  SessionResult result;
  Socket sock = connect_to(connect_addr);
  FrameReader reader(sock);

  Sender sender(set_a, params);
  send_all(sock, encode_message(sender.hello()));

  while (true) {
    // A Done or Abort may arrive at any point in the stream.
    if (const auto msg = reader.poll_frame()) {
      if (const auto* done = std::get_if<DoneMsg>(&*msg)) {
        sender.acknowledge();
        result.completed = true;
        result.outcome.success = true;
        result.outcome.rows_used = sender.rows_emitted();
        result.outcome.scalars_sent = 2 * sender.rows_emitted();
        (void)done;
        break;
      }
      if (const auto* abort = std::get_if<AbortMsg>(&*msg)) {
        result.abort = *abort;
        break;
      }
    }
    if (reader.peer_closed()) {
      result.abort = AbortMsg{AbortReason::kTimeout};
      break;
    }

    const auto row = sender.next_row();
    if (!row.has_value()) {
      // Budget exhausted; wait for the receiver's verdict.
      const auto msg = reader.read_frame(timeout);
      if (!msg.has_value()) {
        result.abort = AbortMsg{AbortReason::kTimeout};
      } else if (std::holds_alternative<DoneMsg>(*msg)) {
        result.completed = true;
        result.outcome.success = true;
        result.outcome.rows_used = sender.rows_emitted();
        result.outcome.scalars_sent = 2 * sender.rows_emitted();
      } else if (const auto* abort = std::get_if<AbortMsg>(&*msg)) {
        result.abort = *abort;
      }
      break;
    }
    send_all(sock, encode_message(*row));
  }
  result.sender_rows_emitted = sender.rows_emitted();
  return result;
}

SessionResult run_tcp_receiver(const std::string& listen_addr, const std::vector<Element>& set_b,
                               std::uint64_t expected_n, int expected_k,
                               Receiver::Options options, std::chrono::milliseconds timeout) {
  SessionResult result;
  Socket sock = accept_on(listen_addr, timeout);
  FrameReader reader(sock);

  const auto hello_msg = reader.read_frame(timeout);
  if (!hello_msg.has_value() || !std::holds_alternative<HelloMsg>(*hello_msg)) {
    throw TransportError("transport: expected Hello");
  }
  SessionParams params;
  try {
    params = params_from_hello(std::get<HelloMsg>(*hello_msg));
    if (params.n != expected_n || params.k != expected_k) {
      throw std::invalid_argument("hello: parameters differ from local expectation");
    }
  } catch (const std::invalid_argument&) {
    const AbortMsg abort{AbortReason::kParameterRejection};
    send_all(sock, encode_message(abort));
    result.abort = abort;
    return result;
  }

  Receiver receiver(set_b, params, options);
  while (true) {
    std::optional<Message> msg;
    try {
      msg = reader.read_frame(timeout);
    } catch (const TransportError&) {
      const auto step = receiver.on_stream_end();
      result.abort = step.abort;
      return result;
    }
    if (!msg.has_value()) {  // peer closed
      const auto step = receiver.on_stream_end();
      if (step.kind == Receiver::Step::Kind::kDone) {
        result.completed = true;
        result.outcome = step.outcome;
      } else {
        result.abort = step.abort;
      }
      return result;
    }
    const auto* row = std::get_if<RowMsg>(&*msg);
    if (row == nullptr) {
      const AbortMsg abort{AbortReason::kOutOfOrder};
      send_all(sock, encode_message(abort));
      result.abort = abort;
      return result;
    }

    const auto step = receiver.on_row(*row);
    if (step.kind == Receiver::Step::Kind::kDone) {
      const DoneMsg done{static_cast<std::uint32_t>(step.outcome.delta_a.size()),
                         static_cast<std::uint32_t>(step.outcome.delta_b.size())};
      send_all(sock, encode_message(done));
      result.completed = true;
      result.outcome = step.outcome;
      return result;
    }
    if (step.kind == Receiver::Step::Kind::kAbort) {
      send_all(sock, encode_message(step.abort));
      result.abort = step.abort;
      return result;
    }
  }
}

}  // namespace csiblt
