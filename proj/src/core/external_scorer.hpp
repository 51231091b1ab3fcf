#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "core/scorer.hpp"

namespace cluedex {

struct ExternalScorerConfig {
  std::string transport = "stdio";  // "stdio" spawns command; "tcp" connects to host:port
  std::string command;
  std::string host = "127.0.0.1";
  int port = 0;
  int timeout_ms = 5000;
  std::uint32_t vocab_size = 0;  // expected by the index; mismatches are typed errors

  void validate() const;
};

struct LatencyStats {
  std::uint64_t calls = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
};

// Adapter speaking the external scorer protocol (one JSON object per line):
//   request  {"version":1,"id":N,"query_tokens":[...],"context_tokens":[...],
//             "allowed_tokens":[...]?}
//   response {"version":1,"id":N,"logprobs":[...] | {"token":logprob,...}}
// Responses are renormalized to a log-distribution here, so peers may send
// unnormalized logits. One in-flight request at a time; callers block on an
// internal mutex.
class ExternalScorer final : public TokenScorer {
 public:
  static std::unique_ptr<ExternalScorer> connect(const ExternalScorerConfig& config);
  ~ExternalScorer() override;

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;

  std::uint32_t vocab_size() const override { return config_.vocab_size; }
  void score_next(const ScorerQuery& query, std::span<const TokenId> context,
                  std::vector<double>& out) const override;

  // Same exchange with allowed_tokens attached; tokens outside the allowed
  // set come back hard-masked.
  void score_next_allowed(const ScorerQuery& query, std::span<const TokenId> context,
                          const std::vector<TokenId>& allowed, std::vector<double>& out) const;

  LatencyStats latency() const;

 private:
  explicit ExternalScorer(const ExternalScorerConfig& config);

  void roundtrip(const ScorerQuery& query, std::span<const TokenId> context,
                 const std::vector<TokenId>* allowed, std::vector<double>& out) const;
  void send_line(const std::string& line) const;
  std::string recv_line() const;

  ExternalScorerConfig config_;
  mutable std::mutex mutex_;
  mutable std::uint64_t next_id_ = 1;
  mutable std::string recv_buffer_;
  mutable std::vector<double> latencies_ms_;

  int write_fd_ = -1;
  int read_fd_ = -1;
  long child_pid_ = -1;
};

}  // namespace cluedex
