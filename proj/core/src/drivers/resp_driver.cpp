#include <algorithm>
#include <charconv>
#include <random>

#include "flexstate/drivers/drivers.hpp"
#include "flexstate/error.hpp"
#include "socket.hpp"

namespace flexstate {

using resp::Reply;

namespace {

std::uint64_t random_session_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uint64_t id = 0;
  while (id == 0) id = rng();
  return id;
}

class RespSession final : public StoreSession {
 public:
  RespSession(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
      : host_(std::move(host)), port_(port), timeout_(timeout), id_(random_session_id()) {}

  std::uint64_t id() const noexcept override { return id_; }

  // MULTI, the translated commands, then EXECSEQ <session> <sequence>. The
  // server applies the queued commands atomically and at most once per
  // (session, sequence), so a retry after a lost connection is safe.
  void apply(const MutationBatch& batch) override {
    if (batch.empty()) return;
    for (const auto& item : batch.items) {
      if (!mutation_fits(item.key.type, item.op)) {
        throw Error(Errc::ProtocolError, describe(item.op) + " on " + item.key.render());
      }
    }
    std::string frame;
    resp::append_command(frame, {"MULTI"});
    for (const auto& item : batch.items) resp::append_command(frame, flat::command_for(item));
    resp::append_command(frame, {"EXECSEQ", std::to_string(id_), std::to_string(batch.sequence)});

    auto replies = round_trip(frame, batch.items.size() + 2);
    if (replies.front().kind != Reply::Kind::Simple) protocol("MULTI refused: " + resp::describe(replies.front()));
    for (std::size_t i = 1; i + 1 < replies.size(); ++i) {
      if (replies[i].is_error()) protocol("command rejected: " + replies[i].text);
    }
    const auto& exec = replies.back();
    if (exec.kind == Reply::Kind::NullArray) return;  // already applied
    if (exec.kind != Reply::Kind::Array) protocol("EXECSEQ reply " + resp::describe(exec));
    for (const auto& r : exec.elements) {
      if (r.is_error()) protocol(r.text);
    }
  }

  Snapshot fetch(const StoreKey& key) override {
    std::string frame;
    resp::append_command(frame, flat::fetch_command(key));
    auto replies = round_trip(frame, 1);
    return flat::snapshot_from_reply(key.type, replies.front());
  }

  ScanResult scan_prefix(std::string_view nf_id, std::string_view instance_id) override {
    std::string frame;
    resp::append_command(frame, {"KEYS", flat::prefix_pattern(instance_prefix(nf_id, instance_id))});
    auto listing = round_trip(frame, 1).front();
    if (listing.kind != Reply::Kind::Array) protocol("KEYS reply " + resp::describe(listing));

    std::vector<StoreKey> keys;
    for (const auto& k : listing.elements) {
      try {
        keys.push_back(parse_key(k.text));
      } catch (const Error&) {
      }
    }
    ScanResult out;
    if (keys.empty()) return out;

    frame.clear();
    for (const auto& key : keys) resp::append_command(frame, flat::fetch_command(key));
    auto replies = round_trip(frame, keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      auto snap = flat::snapshot_from_reply(keys[i].type, replies[i]);
      if (!is_absent(snap)) out.emplace_back(std::move(keys[i]), std::move(snap));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

 private:
  [[noreturn]] void protocol(const std::string& why) { throw Error(Errc::ProtocolError, why); }

  [[noreturn]] void lost(const std::string& why) {
    fd_.reset();
    buffer_.clear();
    throw Error(Errc::ConnectionLost, why);
  }

  std::vector<Reply> round_trip(const std::string& frame, std::size_t expected) {
    if (!fd_) fd_ = net::connect_tcp(host_, port_, timeout_);
    if (!net::write_all(fd_.get(), frame)) lost("write to " + host_ + " failed");

    std::vector<Reply> replies;
    replies.reserve(expected);
    while (replies.size() < expected) {
      std::size_t consumed = 0;
      std::optional<Reply> reply;
      try {
        reply = resp::try_decode(std::string_view(buffer_).substr(offset_), consumed);
      } catch (const Error&) {
        fd_.reset();
        buffer_.clear();
        offset_ = 0;
        throw;
      }
      if (reply) {
        offset_ += consumed;
        replies.push_back(std::move(*reply));
        continue;
      }
      if (offset_ > 0) {
        buffer_.erase(0, offset_);
        offset_ = 0;
      }
      auto n = net::read_some(fd_.get(), buffer_);
      if (n <= 0) lost(n == 0 ? "server closed connection" : "read failed or timed out");
    }
    buffer_.erase(0, offset_);
    offset_ = 0;
    return replies;
  }

  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
  std::uint64_t id_;
  net::Fd fd_;
  std::string buffer_;
  std::size_t offset_ = 0;
};

}  // namespace

RespDriver::RespDriver(std::string host, std::uint16_t port, std::chrono::milliseconds io_timeout)
    : host_(std::move(host)), port_(port), io_timeout_(io_timeout) {}

std::unique_ptr<RespDriver> RespDriver::from_endpoint(std::string_view endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::InvalidArgument, "resp endpoint must be host:port, got '" + std::string(endpoint) + "'");
  }
  unsigned port = 0;
  auto digits = endpoint.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || port == 0 || port > 65535) {
    throw Error(Errc::InvalidArgument, "bad port in endpoint '" + std::string(endpoint) + "'");
  }
  return std::make_unique<RespDriver>(std::string(endpoint.substr(0, colon)),
                                      static_cast<std::uint16_t>(port));
}

std::unique_ptr<StoreSession> RespDriver::open_session() {
  return std::make_unique<RespSession>(host_, port_, io_timeout_);
}

}  // namespace flexstate
