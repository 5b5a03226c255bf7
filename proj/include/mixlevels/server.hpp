/*
 * Copyright (c) 2026, The Mixing Levels Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/version.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "mixlevels/errors.hpp"
#include "mixlevels/service.hpp"
#include "mixlevels/stem_store.hpp"
#include "mixlevels/wav.hpp"

namespace mixlevels {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

using FileMap = std::map<std::string, std::vector<std::uint8_t>, std::less<>>;

/// Reads every regular file of an exported bank into memory, byte for byte.
inline FileMap read_stem_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::exists(dir / kManifestName)) {
    throw IoError("no " + std::string(kManifestName) + " in " + dir.string());
  }
  FileMap files;
  files[kManifestName] = read_file(dir / kManifestName);
  for (auto id : kInstruments) files[stem_file_name(id)] = read_file(dir / stem_file_name(id));
  return files;
}

struct ServerOptions {
  std::string address = "0.0.0.0";
  /// 0 picks a free port; see Server::port().
  unsigned short port = 8080;
  Settings settings;
  /// Served under /stems/<name>.
  FileMap stem_files;
  /// Optional directory of static UI assets served under /.
  std::filesystem::path static_dir;
  int threads = 2;
};

namespace detail {

inline std::string_view mime_type(std::string_view path) {
  const auto dot = path.rfind('.');
  const auto ext = dot == std::string_view::npos ? std::string_view{} : path.substr(dot);
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".wav") return "audio/wav";
  if (ext == ".txt") return "text/plain; charset=utf-8";
  if (ext == ".svg") return "image/svg+xml";
  return "application/octet-stream";
}

struct ServerState {
  ServerOptions options;
  SessionRegistry sessions;

  explicit ServerState(ServerOptions o) : options(std::move(o)), sessions(options.settings) {}
};

/// Answers plain HTTP GETs.
inline http::response<http::vector_body<std::uint8_t>> route(const ServerState& state,
                                                               const http::request<http::string_body>& req) {
  http::response<http::vector_body<std::uint8_t>> res;
  res.version(req.version());
  res.keep_alive(req.keep_alive());
  res.set(http::field::server, "mixlevels");

  auto reply = [&](http::status status, std::string_view type, std::vector<std::uint8_t> body) {
    res.result(status);
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  auto text = [&](http::status status, std::string_view body) {
    return reply(status, "text/plain; charset=utf-8", std::vector<std::uint8_t>(body.begin(), body.end()));
  };

  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return text(http::status::method_not_allowed, "only GET is supported\n");
  }
  const auto raw_target = req.target();
  std::string_view target(raw_target.data(), raw_target.size());
  if (const auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);

  if (target == "/healthz") return text(http::status::ok, "ok\n");

  constexpr std::string_view kStemPrefix = "/stems/";
  if (target.starts_with(kStemPrefix)) {
    const auto file = target.substr(kStemPrefix.size());
    const auto it = state.options.stem_files.find(file);
    if (it == state.options.stem_files.end()) return text(http::status::not_found, "no such stem\n");
    return reply(http::status::ok, mime_type(file), it->second);
  }

  const auto& root = state.options.static_dir;
  if (!root.empty() && target.find("..") == std::string_view::npos) {
    auto rel = std::string(target.substr(1));
    if (rel.empty() || rel.back() == '/') rel += "index.html";
    const auto path = root / rel;
    std::error_code ec;
    if (std::filesystem::is_regular_file(path, ec)) {
      return reply(http::status::ok, mime_type(rel), read_file(path));
    }
  }
  return text(http::status::not_found, "not found\n");
}

/// One WebSocket client = one session. A reply is written before the next
/// frame is read, so per-session ordering holds.
class SocketSession : public std::enable_shared_from_this<SocketSession> {
 public:
  SocketSession(tcp::socket&& socket, std::shared_ptr<ServerState> state)
      : ws_(std::move(socket)), state_(std::move(state)) {}

  ~SocketSession() {
    if (!id_.empty()) state_->sessions.close(id_);
  }

  void run(http::request<http::string_body> req) {
    auto timeout = websocket::stream_base::timeout::suggested(beast::role_type::server);
    timeout.idle_timeout = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(state_->options.settings.idle_timeout_s));
    timeout.keep_alive_pings = false;
    ws_.set_option(timeout);
    ws_.text(true);
    ws_.async_accept(req, beast::bind_front_handler(&SocketSession::on_accept, shared_from_this()));
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    id_ = state_->sessions.open();
    read();
  }

  void read() { ws_.async_read(buffer_, beast::bind_front_handler(&SocketSession::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    const auto frame = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      reply_ = state_->sessions.handle_text(id_, frame);
    } catch (const DomainError&) {
      return;  // session expired underneath us
    }
    ws_.async_write(net::buffer(reply_), beast::bind_front_handler(&SocketSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    read();
  }

  websocket::stream<beast::tcp_stream> ws_;
  std::shared_ptr<ServerState> state_;
  beast::flat_buffer buffer_;
  std::string reply_;
  std::string id_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<ServerState> state)
      : stream_(std::move(socket)), state_(std::move(state)) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this()));
  }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (websocket::is_upgrade(req_)) {
      stream_.expires_never();
      std::make_shared<SocketSession>(stream_.release_socket(), state_)->run(std::move(req_));
      return;
    }
    res_ = route(*state_, req_);
    const bool head = req_.method() == http::verb::head;
    if (head) res_.body().clear();
    http::async_write(stream_, res_, beast::bind_front_handler(&HttpSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (!res_.keep_alive()) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    read();
  }

  beast::tcp_stream stream_;
  std::shared_ptr<ServerState> state_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  http::response<http::vector_body<std::uint8_t>> res_;
};

}  // namespace detail

/// HTTP + WebSocket front end for the session registry.
///
///   GET /stems/manifest.txt, /stems/<instrument>.wav   exported bank
///   GET /healthz                                        liveness
///   GET /ws (Upgrade: websocket)                        control channel
///   GET /<path>                                         static UI assets
class Server {
 public:
  explicit Server(ServerOptions options)
      : state_(std::make_shared<detail::ServerState>(std::move(options))),
        acceptor_(net::make_strand(io_)),
        sweeper_(io_) {
    const auto endpoint = tcp::endpoint(net::ip::make_address(state_->options.address), state_->options.port);
    beast::error_code ec;
    acceptor_.open(endpoint.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(endpoint, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw IoError("cannot listen on " + state_->options.address + ":" +
                          std::to_string(state_->options.port) + ": " + ec.message());
  }

  ~Server() { stop(); }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }
  SessionRegistry& sessions() noexcept { return state_->sessions; }

  /// Starts worker threads and returns.
  void start() {
    accept();
    sweep();
    const int n = std::max(1, state_->options.threads);
    for (int i = 0; i < n; ++i) workers_.emplace_back([this] { io_.run(); });
  }

  /// Blocks until SIGINT/SIGTERM.
  void run_until_signal() {
    net::signal_set signals(io_, SIGINT, SIGTERM);
    signals.async_wait([this](beast::error_code, int) { io_.stop(); });
    start();
    for (auto& t : workers_) t.join();
    workers_.clear();
  }

  void stop() {
    io_.stop();
    for (auto& t : workers_) {
      if (t.joinable()) t.join();
    }
    workers_.clear();
  }

 private:
  void accept() {
    acceptor_.async_accept(net::make_strand(io_), [this](beast::error_code ec, tcp::socket socket) {
      if (!ec) std::make_shared<detail::HttpSession>(std::move(socket), state_)->run();
      if (acceptor_.is_open()) accept();
    });
  }

  void sweep() {
    sweeper_.expires_after(std::chrono::seconds(5));
    sweeper_.async_wait([this](beast::error_code ec) {
      if (ec) return;
      state_->sessions.expire();
      sweep();
    });
  }

  net::io_context io_;
  std::shared_ptr<detail::ServerState> state_;
  tcp::acceptor acceptor_;
  net::steady_timer sweeper_;
  std::vector<std::thread> workers_;
};

}  // namespace mixlevels
