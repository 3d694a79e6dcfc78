#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>

#include "midlearn/teacher.hpp"

namespace midlearn {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  ///< 0 lets the server pick a free port
};

Endpoint parse_endpoint(std::string_view s);

/// Per-connection protocol state.
struct WireState {
  bool reset_seen = false;
  bool closed = false;
};

/// Answers one request line. Pure apart from driving `session`.
std::string handle_request(SulSession& session, WireState& state, std::string_view line);

/// Serves one TCP client at a time over the line protocol.
class SulServer {
 public:
  SulServer(SulSession& session, Endpoint endpoint);
  ~SulServer();
  SulServer(const SulServer&) = delete;
  SulServer& operator=(const SulServer&) = delete;

  std::uint16_t port() const { return port_; }

  /// Accepts and serves clients until stop() or until `max_clients`
  /// connections were served (0 = unlimited).
  void run(std::size_t max_clients = 0);
  void stop() { stop_ = true; }
  std::size_t clients_served() const { return served_; }

 private:
  void serve_client(int fd);

  SulSession& session_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
  std::atomic<std::size_t> served_{0};
};

/// Client side of the protocol; behaves like the remote session.
class RemoteSession final : public SulSession {
 public:
  RemoteSession(const Endpoint& endpoint, std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~RemoteSession() override;
  RemoteSession(const RemoteSession&) = delete;
  RemoteSession& operator=(const RemoteSession&) = delete;

  Alphabet alphabet() const override { return alphabet_; }
  void reset() override;
  Symbol step(const Symbol& input) override;

  std::size_t round_trips() const { return round_trips_; }

 private:
  std::string request(const std::string& line);

  int fd_ = -1;
  std::string pending_;
  Alphabet alphabet_;
  std::size_t round_trips_ = 0;
};

std::unique_ptr<RemoteSession> connect(const Endpoint& endpoint,
                                       std::chrono::milliseconds timeout = std::chrono::seconds(10));

}  // namespace midlearn
