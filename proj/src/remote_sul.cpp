#include "midlearn/remote_sul.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <sstream>

namespace midlearn {

namespace {

constexpr std::string_view kHelloReply = "OK midlearn-sul 1";

std::vector<std::string> tokens(std::string_view line) {
  std::istringstream is{std::string(line)};
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

std::string sys_error(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  int get() const { return fd_; }
  int release() { return std::exchange(fd_, -1); }

 private:
  int fd_;
};

bool send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Reads one LF-terminated line, keeping leftovers in `buf`.
std::optional<std::string> read_line(int fd, std::string& buf) {
  for (;;) {
    if (auto nl = buf.find('\n'); nl != std::string::npos) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    char chunk[4096];
    ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    buf.append(chunk, static_cast<std::size_t>(n));
  }
}

sockaddr_in resolve(const Endpoint& ep) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res)
    throw TransportError("cannot resolve host '" + ep.host + "'");
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

std::string join(const std::vector<Symbol>& v) {
  std::string s;
  for (const auto& x : v) s += ' ' + x;
  return s;
}

}  // namespace

Endpoint parse_endpoint(std::string_view s) {
  Endpoint ep;
  auto colon = s.rfind(':');
  std::string_view port = s;
  if (colon != std::string_view::npos) {
    if (colon > 0) ep.host = std::string(s.substr(0, colon));
    port = s.substr(colon + 1);
  }
  unsigned long v = 0;
  try {
    std::size_t used = 0;
    v = std::stoul(std::string(port), &used);
    if (used != port.size()) throw std::invalid_argument("junk");
  } catch (const std::exception&) {
    throw Error("invalid endpoint '" + std::string(s) + "'");
  }
  if (v > 65535) throw Error("port out of range in '" + std::string(s) + "'");
  ep.port = static_cast<std::uint16_t>(v);
  return ep;
}

std::string handle_request(SulSession& session, WireState& state, std::string_view line) {
  const auto tok = tokens(line);
  if (tok.empty()) return "ERR empty-request";
  const auto& verb = tok[0];
  if (verb == "HELLO") return tok.size() == 1 ? std::string(kHelloReply) : "ERR malformed";
  if (verb == "ALPHABET") {
    if (tok.size() != 1) return "ERR malformed";
    auto a = session.alphabet();
    return "IN" + join(a.inputs) + " / OUT" + join(a.outputs);
  }
  if (verb == "RESET") {
    if (tok.size() != 1) return "ERR malformed";
    session.reset();
    state.reset_seen = true;
    return "OK";
  }
  if (verb == "STEP") {
    if (tok.size() != 2) return "ERR malformed";
    if (!state.reset_seen) return "ERR no-reset";
    const auto ins = session.alphabet().inputs;
    if (std::find(ins.begin(), ins.end(), tok[1]) == ins.end()) return "ERR unknown-symbol";
    try {
      auto out = session.step(tok[1]);
      if (out == kQuiescence) return "QUIESCENT";
      if (out == kRefused) return "REFUSED";
      return "OUT " + out;
    } catch (const AlphabetError&) {
      return "ERR unknown-symbol";
    } catch (const Error&) {
      return "ERR sul-failure";
    }
  }
  if (verb == "BYE") {
    state.closed = true;
    return "OK";
  }
  return "ERR unknown-verb";
}

// ---------------------------------------------------------------------------
// Server

SulServer::SulServer(SulSession& session, Endpoint endpoint) : session_(session) {
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (fd.get() < 0) throw TransportError(sys_error("socket"));
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  auto addr = resolve(endpoint);
  if (::bind(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
    throw TransportError(sys_error("bind"));
  if (::listen(fd.get(), 8) < 0) throw TransportError(sys_error("listen"));
  socklen_t len = sizeof addr;
  ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  listen_fd_ = fd.release();
}

SulServer::~SulServer() {
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void SulServer::run(std::size_t max_clients) {
  while (!stop_ && (max_clients == 0 || served_ < max_clients)) {
    pollfd p{listen_fd_, POLLIN, 0};
    int r = ::poll(&p, 1, 100);
    if (r < 0 && errno != EINTR) throw TransportError(sys_error("poll"));
    if (r <= 0) continue;
    Fd client(::accept(listen_fd_, nullptr, nullptr));
    if (client.get() < 0) continue;
    int one = 1;
    ::setsockopt(client.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    serve_client(client.get());
    ++served_;
  }
}

void SulServer::serve_client(int fd) {
  WireState state;
  std::string buf;
  while (!state.closed && !stop_) {
    auto line = read_line(fd, buf);
    if (!line) break;
    if (!send_all(fd, handle_request(session_, state, *line) + "\n")) break;
  }
  // Leave the session in a clean state for the next client.
  if (state.reset_seen) session_.reset();
}

// ---------------------------------------------------------------------------
// Client

RemoteSession::RemoteSession(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  auto addr = resolve(endpoint);
  Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
  if (fd.get() < 0) throw TransportError(sys_error("socket"));
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd.get(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(fd.get(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
  int one = 1;
  ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
    throw TransportError(sys_error(("connect to " + endpoint.host + ":" + std::to_string(endpoint.port)).c_str()));
  fd_ = fd.release();

  if (auto hello = request("HELLO"); hello != kHelloReply) {
    ::close(fd_);
    throw TransportError("unexpected greeting '" + hello + "'");
  }
  const auto tok = tokens(request("ALPHABET"));
  auto slash = std::find(tok.begin(), tok.end(), "/");
  if (tok.empty() || tok[0] != "IN" || slash == tok.end() || slash + 1 == tok.end() || slash[1] != "OUT") {
    ::close(fd_);
    throw TransportError("malformed alphabet reply");
  }
  alphabet_.inputs.assign(tok.begin() + 1, slash);
  alphabet_.outputs.assign(slash + 2, tok.end());
}

RemoteSession::~RemoteSession() {
  if (fd_ < 0) return;
  try {
    request("BYE");
  } catch (const Error&) {
  }
  ::close(fd_);
}

std::string RemoteSession::request(const std::string& line) {
  if (fd_ < 0) throw TransportError("connection closed");
  if (!send_all(fd_, line + "\n")) throw TransportError(sys_error("send"));
  auto reply = read_line(fd_, pending_);
  if (!reply) throw TransportError("connection lost while waiting for reply to '" + line + "'");
  ++round_trips_;
  return *reply;
}

void RemoteSession::reset() {
  auto r = request("RESET");
  if (r != "OK") throw TransportError("reset failed: " + r);
}

Symbol RemoteSession::step(const Symbol& input) {
  auto r = request("STEP " + input);
  if (r == "QUIESCENT") return std::string(kQuiescence);
  if (r == "REFUSED") return std::string(kRefused);
  if (r.rfind("OUT ", 0) == 0) return r.substr(4);
  if (r == "ERR no-reset") throw SessionStateError("step before reset");
  if (r == "ERR unknown-symbol") throw AlphabetError("unknown input symbol '" + input + "'");
  throw TransportError("unexpected reply '" + r + "'");
}

std::unique_ptr<RemoteSession> connect(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  return std::make_unique<RemoteSession>(endpoint, timeout);
}

}  // namespace midlearn
