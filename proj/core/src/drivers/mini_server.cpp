#include "flexstate/drivers/mini_server.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>

#include "flexstate/error.hpp"
#include "socket.hpp"

namespace flexstate {

using resp::Reply;

namespace {

std::string upper(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool parse_u64(const std::string& s, std::uint64_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

}  // namespace

std::unique_ptr<MiniRespServer> MiniRespServer::start(std::uint16_t port, std::string host) {
  std::unique_ptr<MiniRespServer> server(new MiniRespServer());
  auto fd = net::listen_tcp(host, port);
  server->host_ = std::move(host);
  server->port_ = net::local_port(fd.get());
  server->listen_fd_ = fd.release();
  server->acceptor_ = std::thread([s = server.get()] { s->accept_loop(); });
  return server;
}

MiniRespServer::~MiniRespServer() { stop(); }

void MiniRespServer::accept_loop() {
  while (!stopping_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int ready = ::poll(&pfd, 1, 50);
    if (ready <= 0) continue;
    int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;

    std::lock_guard lock(clients_mutex_);
    // reap finished connections
    for (auto it = clients_.begin(); it != clients_.end();) {
      if (it->done.load()) {
        it->thread.join();
        ::close(it->fd);
        it = clients_.erase(it);
      } else {
        ++it;
      }
    }
    auto& client = clients_.emplace_back();
    client.fd = fd;
    client.thread = std::thread([this, &client] {
      serve(client.fd);
      client.done.store(true);
    });
  }
}

void MiniRespServer::serve(int fd) {
  std::string buffer;
  std::size_t offset = 0;
  std::string out;
  bool in_multi = false;
  std::vector<resp::Command> queued;

  auto handle = [&](resp::Command cmd) -> Reply {
    commands_.fetch_add(1, std::memory_order_relaxed);
    const std::string name = upper(cmd[0]);
    if (name == "MULTI") {
      if (in_multi) return Reply::error("ERR MULTI calls can not be nested");
      in_multi = true;
      queued.clear();
      return Reply::simple("OK");
    }
    if (name == "DISCARD") {
      if (!in_multi) return Reply::error("ERR DISCARD without MULTI");
      in_multi = false;
      queued.clear();
      return Reply::simple("OK");
    }
    if (name == "EXEC" || name == "EXECSEQ") {
      if (!in_multi) return Reply::error("ERR " + name + " without MULTI");
      in_multi = false;
      std::uint64_t session = 0, sequence = 0;
      if (name == "EXECSEQ") {
        if (cmd.size() != 3 || !parse_u64(cmd[1], session) || !parse_u64(cmd[2], sequence)) {
          queued.clear();
          return Reply::error("ERR EXECSEQ expects <session> <sequence>");
        }
      } else if (cmd.size() != 1) {
        queued.clear();
        return Reply::error("ERR wrong number of arguments for 'exec' command");
      }
      auto replies = store_.execute_batch(session, sequence, queued);
      queued.clear();
      if (!replies) return Reply::null_array();
      return Reply::array(std::move(*replies));
    }
    if (in_multi) {
      queued.push_back(std::move(cmd));
      return Reply::simple("QUEUED");
    }
    return store_.execute(cmd);
  };

  while (!stopping_.load()) {
    pollfd pfd{fd, POLLIN, 0};
    int ready = ::poll(&pfd, 1, 50);
    if (ready == 0) continue;
    if (ready < 0) break;
    auto n = net::read_some(fd, buffer);
    if (n <= 0) break;

    out.clear();
    bool fatal = false;
    while (true) {
      std::size_t consumed = 0;
      std::optional<Reply> frame;
      try {
        frame = resp::try_decode(std::string_view(buffer).substr(offset), consumed);
        if (!frame) break;
        offset += consumed;
        resp::append_reply(out, handle(resp::to_command(*frame)));
      } catch (const Error& e) {
        resp::append_reply(out, Reply::error(std::string("ERR Protocol error: ") + e.what()));
        fatal = true;
        break;
      }
    }
    if (offset > 0) {
      buffer.erase(0, offset);
      offset = 0;
    }
    if (!out.empty() && !net::write_all(fd, out)) break;
    if (fatal) break;
  }
  // the owner closes the descriptor after joining this thread
  ::shutdown(fd, SHUT_RDWR);
}

void MiniRespServer::drop_connections() {
  std::lock_guard lock(clients_mutex_);
  for (auto& c : clients_) {
    if (!c.done.load()) ::shutdown(c.fd, SHUT_RDWR);
  }
}

void MiniRespServer::stop() {
  if (stopping_.exchange(true)) return;
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(clients_mutex_);
    for (auto& c : clients_) {
      if (!c.done.load()) ::shutdown(c.fd, SHUT_RDWR);
    }
    for (auto& c : clients_) {
      c.thread.join();
      ::close(c.fd);
    }
    clients_.clear();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

}  // namespace flexstate
