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

#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regretmeter/language_model.hpp"

namespace regretmeter {

inline constexpr int kBridgeProtocolVersion = 1;
inline constexpr const char* kBridgeAddrEnv = "REGRETMETER_BRIDGE_ADDR";

struct BridgeOptions {
  // "host:port" for TCP, or "stdio:<shell command>" to spawn a server and
  // talk to it over its stdin/stdout.
  std::string address;
  std::chrono::milliseconds timeout{30000};
  std::size_t max_batch = 64;
  // Allowed |sum exp(logprobs) - 1| before a response is rejected.
  double normalization_tolerance = 1e-4;
  // Local expectations checked against the handshake when set.
  std::optional<std::size_t> expect_vocab_size;
  std::optional<TokenId> expect_bos;
  std::optional<TokenId> expect_eos;
};

// `flag` if non-empty, else $REGRETMETER_BRIDGE_ADDR. Throws BridgeError
// when neither is set.
std::string ResolveBridgeAddress(const std::string& flag);

struct BridgeInfo {
  std::size_t vocab_size = 0;
  std::string model;
  TokenId bos = 0;
  TokenId eos = 1;
};

// Line-oriented byte channel to a server.
class BridgeTransport {
 public:
  virtual ~BridgeTransport() = default;
  virtual void WriteLine(const std::string& line) = 0;
  // Throws BridgeError on timeout or a closed channel.
  virtual std::string ReadLine(std::chrono::milliseconds timeout) = 0;
};

std::unique_ptr<BridgeTransport> ConnectTcp(const std::string& host_port,
                                            std::chrono::milliseconds timeout);
std::unique_ptr<BridgeTransport> SpawnStdio(const std::string& command);
std::unique_ptr<BridgeTransport> OpenTransport(const BridgeOptions& opts);

// Newline-delimited JSON client. Requests are serialized: one batch in
// flight per connection. Responses are cached by context, so repeating a
// query returns the identical vector without a round trip.
class BridgeClient {
 public:
  // Connects and performs the handshake.
  explicit BridgeClient(const BridgeOptions& opts);
  BridgeClient(std::unique_ptr<BridgeTransport> transport, const BridgeOptions& opts);

  const BridgeInfo& info() const { return info_; }

  // One normalized distribution per context, in request order. Sends at
  // most max_batch uncached contexts per request.
  std::vector<Dist> NextDists(std::span<const Context> ctxs);

  std::size_t requests_sent() const;
  std::size_t cache_size() const;

 private:
  void Handshake();
  std::vector<Dist> Fetch(std::span<const Context> ctxs);

  std::unique_ptr<BridgeTransport> transport_;
  BridgeOptions opts_;
  BridgeInfo info_;
  mutable std::mutex mu_;
  std::map<Context, Dist> cache_;
  std::size_t requests_ = 0;
};

// A LanguageModel answered by a bridge server. Token strings are synthetic
// ("<bos>", "<eos>", "t<id>"); only size and special ids come from the
// server.
class BridgeModel final : public LanguageModel {
 public:
  explicit BridgeModel(std::shared_ptr<BridgeClient> client);

  const Vocab& vocab() const override { return vocab_; }
  std::string model_id() const override { return "bridge:" + client_->info().model; }
  std::vector<Dist> NextDists(std::span<const Context> ctxs) const override;

  BridgeClient& client() const { return *client_; }

 protected:
  Dist DoNextDist(std::span<const TokenId> ctx) const override;

 private:
  std::shared_ptr<BridgeClient> client_;
  Vocab vocab_;
};

}  // namespace regretmeter
