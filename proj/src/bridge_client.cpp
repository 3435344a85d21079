// Copyright 2026 The regretmeter Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regretmeter/bridge_client.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <json.hpp>

#include "regretmeter/errors.hpp"

namespace regretmeter {

namespace {

using Clock = std::chrono::steady_clock;
using json = nlohmann::json;

constexpr std::size_t kMaxLineBytes = std::size_t{1} << 30;

std::string Errno(const std::string& what) { return what + ": " + std::strerror(errno); }

int RemainingMs(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return static_cast<int>(std::max<std::int64_t>(0, left.count()));
}

// Reads from one fd and writes to another (the same socket, or two pipes).
class FdTransport : public BridgeTransport {
 public:
  FdTransport(int read_fd, int write_fd, std::string peer)
      : read_fd_(read_fd), write_fd_(write_fd), peer_(std::move(peer)) {
    struct stat st {};
    is_socket_ = ::fstat(write_fd_, &st) == 0 && S_ISSOCK(st.st_mode);
  }

  void WriteLine(const std::string& line) override {
    std::string data = line + "\n";
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n =
          is_socket_ ? ::send(write_fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL)
                     : ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        if (errno == EAGAIN || errno == EWOULDBLOCK) {
          pollfd p{write_fd_, POLLOUT, 0};
          ::poll(&p, 1, 1000);
          continue;
        }
        throw BridgeError(Errno("write to bridge " + peer_ + " failed"));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string ReadLine(std::chrono::milliseconds timeout) override {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      if (buffer_.size() > kMaxLineBytes) throw BridgeError("bridge reply line too long");
      pollfd p{read_fd_, POLLIN, 0};
      const int r = ::poll(&p, 1, RemainingMs(deadline));
      if (r < 0) {
        if (errno == EINTR) continue;
        throw BridgeError(Errno("poll on bridge " + peer_ + " failed"));
      }
      if (r == 0) {
        throw BridgeError("bridge " + peer_ + " timed out after " +
                          std::to_string(timeout.count()) + " ms");
      }
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
        throw BridgeError(Errno("read from bridge " + peer_ + " failed"));
      }
      if (n == 0) throw BridgeError("bridge " + peer_ + " closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  int read_fd_;
  int write_fd_;
  std::string peer_;
  std::string buffer_;
  bool is_socket_ = false;
};

class TcpTransport final : public FdTransport {
 public:
  TcpTransport(int fd, std::string peer) : FdTransport(fd, fd, std::move(peer)) {}
  ~TcpTransport() override { ::close(read_fd_); }
};

class StdioTransport final : public FdTransport {
 public:
  StdioTransport(pid_t pid, int read_fd, int write_fd, std::string command)
      : FdTransport(read_fd, write_fd, "stdio:" + command), pid_(pid) {}
  ~StdioTransport() override {
    ::close(write_fd_);
    ::close(read_fd_);
    ::kill(pid_, SIGTERM);
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }

 private:
  pid_t pid_;
};

double ParseLogprob(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_null()) return -std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "-inf" || s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw BridgeError("malformed logprob value " + v.dump());
}

json ParseReply(const std::string& line) {
  json reply;
  try {
    reply = json::parse(line);
  } catch (const json::exception& e) {
    throw BridgeError(std::string("malformed bridge reply: ") + e.what());
  }
  if (!reply.is_object()) throw BridgeError("malformed bridge reply: not an object");
  const auto v = reply.find("v");
  if (v == reply.end() || !v->is_number_integer()) {
    throw BridgeError("malformed bridge reply: missing protocol version");
  }
  if (v->get<int>() != kBridgeProtocolVersion) {
    throw BridgeError("unsupported protocol version " + v->dump() + " (client speaks " +
                      std::to_string(kBridgeProtocolVersion) + ")");
  }
  if (const auto err = reply.find("error"); err != reply.end()) {
    std::string code = "unknown", message = err->dump();
    if (err->is_object()) {
      if (err->contains("code")) code = err->at("code").dump();
      if (err->contains("message") && err->at("message").is_string()) {
        message = err->at("message").get<std::string>();
      }
    }
    throw BridgeError("bridge server error " + code + ": " + message);
  }
  return reply;
}

Vocab BridgeVocab(const BridgeInfo& info) {
  std::vector<std::string> tokens(info.vocab_size);
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i] = "t" + std::to_string(i);
  tokens[static_cast<std::size_t>(info.bos)] = "<bos>";
  tokens[static_cast<std::size_t>(info.eos)] = "<eos>";
  return Vocab(std::move(tokens), info.bos, info.eos);
}

}  // namespace

std::string ResolveBridgeAddress(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kBridgeAddrEnv); env != nullptr && *env != '\0') return env;
  throw BridgeError(std::string("no bridge address given and ") + kBridgeAddrEnv + " is unset");
}

std::unique_ptr<BridgeTransport> ConnectTcp(const std::string& host_port,
                                            std::chrono::milliseconds timeout) {
  const auto colon = host_port.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == host_port.size()) {
    throw BridgeError("bridge address '" + host_port + "' is not host:port");
  }
  std::string host = host_port.substr(0, colon);
  if (host.size() > 2 && host.front() == '[' && host.back() == ']') host = host.substr(1, host.size() - 2);
  const std::string port = host_port.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw BridgeError("cannot resolve bridge " + host_port + ": " + ::gai_strerror(rc));
  }
  const auto deadline = Clock::now() + timeout;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_NONBLOCK | SOCK_CLOEXEC,
                            ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd p{fd, POLLOUT, 0};
      rc = ::poll(&p, 1, RemainingMs(deadline));
      if (rc == 0) {
        ::close(fd);
        ::freeaddrinfo(res);
        throw BridgeError("connecting to bridge " + host_port + " timed out after " +
                          std::to_string(timeout.count()) + " ms");
      }
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc == 0) {
      ::freeaddrinfo(res);
      return std::make_unique<TcpTransport>(fd, host_port);
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw BridgeError("cannot connect to bridge " + host_port + ": " + last_error);
}

std::unique_ptr<BridgeTransport> SpawnStdio(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw BridgeError(Errno("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw BridgeError(Errno("pipe"));
  }
  // A server that exits early must surface as a BridgeError, not SIGPIPE.
  ::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw BridgeError(Errno("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<StdioTransport>(pid, from_child[0], to_child[1], command);
}

std::unique_ptr<BridgeTransport> OpenTransport(const BridgeOptions& opts) {
  constexpr std::string_view kStdio = "stdio:";
  if (opts.address.rfind(kStdio, 0) == 0) return SpawnStdio(opts.address.substr(kStdio.size()));
  return ConnectTcp(opts.address, opts.timeout);
}

BridgeClient::BridgeClient(const BridgeOptions& opts) : BridgeClient(OpenTransport(opts), opts) {}

BridgeClient::BridgeClient(std::unique_ptr<BridgeTransport> transport, const BridgeOptions& opts)
    : transport_(std::move(transport)), opts_(opts) {
  if (opts_.max_batch == 0) throw std::invalid_argument("max_batch must be >= 1");
  Handshake();
}

void BridgeClient::Handshake() {
  transport_->WriteLine(json{{"v", kBridgeProtocolVersion}, {"op", "hello"}}.dump());
  const json reply = ParseReply(transport_->ReadLine(opts_.timeout));
  try {
    info_.vocab_size = reply.at("V").get<std::size_t>();
    info_.model = reply.at("model").get<std::string>();
    info_.bos = reply.at("bos").get<TokenId>();
    info_.eos = reply.at("eos").get<TokenId>();
  } catch (const json::exception& e) {
    throw BridgeError(std::string("malformed handshake reply: ") + e.what());
  }
  const auto in_range = [&](TokenId id) {
    return id >= 0 && static_cast<std::size_t>(id) < info_.vocab_size;
  };
  if (info_.vocab_size < 2 || !in_range(info_.bos) || !in_range(info_.eos) ||
      info_.bos == info_.eos) {
    throw BridgeError("handshake declares an invalid vocabulary (V=" +
                      std::to_string(info_.vocab_size) + ", bos=" + std::to_string(info_.bos) +
                      ", eos=" + std::to_string(info_.eos) + ")");
  }
  auto expect = [](const char* field, auto want, auto got) {
    if (want && *want != got) {
      throw BridgeError(std::string("bridge ") + field + " mismatch: expected " +
                        std::to_string(*want) + ", server has " + std::to_string(got));
    }
  };
  expect("vocabulary size", opts_.expect_vocab_size, info_.vocab_size);
  expect("bos id", opts_.expect_bos, info_.bos);
  expect("eos id", opts_.expect_eos, info_.eos);
}

std::vector<Dist> BridgeClient::Fetch(std::span<const Context> ctxs) {
  json request{{"v", kBridgeProtocolVersion}, {"op", "dists"}, {"ctxs", json::array()}};
  for (const auto& c : ctxs) request["ctxs"].push_back(c);
  transport_->WriteLine(request.dump());
  ++requests_;
  const json reply = ParseReply(transport_->ReadLine(opts_.timeout));
  const auto lp = reply.find("logprobs");
  if (lp == reply.end() || !lp->is_array()) {
    throw BridgeError("malformed bridge reply: missing logprobs array");
  }
  if (lp->size() != ctxs.size()) {
    throw BridgeError("bridge returned " + std::to_string(lp->size()) + " distributions for " +
                      std::to_string(ctxs.size()) + " contexts");
  }
  std::vector<Dist> out;
  out.reserve(ctxs.size());
  for (std::size_t i = 0; i < lp->size(); ++i) {
    const json& row = (*lp)[i];
    if (!row.is_array() || row.size() != info_.vocab_size) {
      throw BridgeError("length mismatch in response " + std::to_string(i) + ": expected " +
                        std::to_string(info_.vocab_size) + ", got " +
                        std::to_string(row.is_array() ? row.size() : 0));
    }
    std::vector<double> values(row.size());
    for (std::size_t w = 0; w < row.size(); ++w) {
      values[w] = ParseLogprob(row[w]);
      if (std::isnan(values[w]) || values[w] == std::numeric_limits<double>::infinity()) {
        throw BridgeError("response " + std::to_string(i) + " has a NaN or +inf logprob");
      }
    }
    const double lse = LogSumExp(values);
    const double mass = std::exp(lse);
    if (!(std::abs(mass - 1.0) <= opts_.normalization_tolerance)) {
      throw BridgeError("response " + std::to_string(i) + " is not normalized: mass " +
                        std::to_string(mass));
    }
    // Transport rounding is within tolerance; renormalize to full precision.
    for (double& v : values) v -= lse;
    out.push_back(Dist::FromLogprobs(std::move(values)));
  }
  return out;
}

std::vector<Dist> BridgeClient::NextDists(std::span<const Context> ctxs) {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::size_t> missing;
  std::vector<Context> batch;
  for (std::size_t i = 0; i < ctxs.size(); ++i) {
    if (cache_.count(ctxs[i])) continue;
    if (std::find(batch.begin(), batch.end(), ctxs[i]) != batch.end()) continue;
    batch.push_back(ctxs[i]);
  }
  for (std::size_t start = 0; start < batch.size(); start += opts_.max_batch) {
    const std::size_t n = std::min(opts_.max_batch, batch.size() - start);
    auto dists = Fetch(std::span(batch).subspan(start, n));
    for (std::size_t k = 0; k < n; ++k) cache_.emplace(batch[start + k], std::move(dists[k]));
  }
  std::vector<Dist> out;
  out.reserve(ctxs.size());
  for (const auto& c : ctxs) out.push_back(cache_.at(c));
  return out;
}

std::size_t BridgeClient::requests_sent() const {
  std::lock_guard<std::mutex> lock(mu_);
  return requests_;
}

std::size_t BridgeClient::cache_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

BridgeModel::BridgeModel(std::shared_ptr<BridgeClient> client)
    : client_(std::move(client)), vocab_(BridgeVocab(client_->info())) {}

Dist BridgeModel::DoNextDist(std::span<const TokenId> ctx) const {
  const Context c(ctx.begin(), ctx.end());
  return client_->NextDists(std::span(&c, 1)).front();
}

std::vector<Dist> BridgeModel::NextDists(std::span<const Context> ctxs) const {
  for (const auto& c : ctxs) {
    ValidateContext(vocab_, c);
    if (IsTerminal(vocab_, c)) {
      throw TerminalContextError("context ends in eos; terminal state has no successor");
    }
  }
  return client_->NextDists(ctxs);
}

}  // namespace regretmeter
