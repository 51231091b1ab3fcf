#include "core/external_scorer.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>

#include <json.hpp>

#include "core/log.hpp"

namespace cluedex {

using nlohmann::json;

void ExternalScorerConfig::validate() const {
  if (transport != "stdio" && transport != "tcp") {
    throw_error(ErrorCode::kConfig, "external scorer transport must be stdio or tcp");
  }
  if (transport == "stdio" && command.empty()) {
    throw_error(ErrorCode::kConfig, "stdio transport needs a command to spawn");
  }
  if (transport == "tcp" && (port <= 0 || port > 65535)) {
    throw_error(ErrorCode::kConfig, "tcp transport needs a port in 1..65535");
  }
  if (timeout_ms <= 0) throw_error(ErrorCode::kConfig, "scorer timeout must be positive");
  if (vocab_size == 0) throw_error(ErrorCode::kConfig, "external scorer needs the index vocab size");
}

ExternalScorer::ExternalScorer(const ExternalScorerConfig& config) : config_(config) {}

std::unique_ptr<ExternalScorer> ExternalScorer::connect(const ExternalScorerConfig& config) {
  config.validate();
  auto scorer = std::unique_ptr<ExternalScorer>(new ExternalScorer(config));

  if (config.transport == "stdio") {
    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0) {
      throw_error(ErrorCode::kIo, "pipe creation failed");
    }
    pid_t pid = fork();
    if (pid < 0) throw_error(ErrorCode::kIo, "fork failed");
    if (pid == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", config.command.c_str(), static_cast<char*>(nullptr));
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    scorer->write_fd_ = to_child[1];
    scorer->read_fd_ = from_child[0];
    scorer->child_pid_ = pid;
  } else {
    int fd = socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw_error(ErrorCode::kIo, "socket creation failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(config.port));
    if (inet_pton(AF_INET, config.host.c_str(), &addr.sin_addr) != 1) {
      hostent* he = gethostbyname(config.host.c_str());
      if (!he) {
        close(fd);
        throw_error(ErrorCode::kIo, "cannot resolve scorer host: " + config.host);
      }
      std::memcpy(&addr.sin_addr, he->h_addr, sizeof(addr.sin_addr));
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      close(fd);
      throw_error(ErrorCode::kIo, "cannot connect to scorer at " + config.host + ":" +
                                      std::to_string(config.port));
    }
    scorer->write_fd_ = fd;
    scorer->read_fd_ = fd;
  }
  signal(SIGPIPE, SIG_IGN);
  return scorer;
}

ExternalScorer::~ExternalScorer() {
  if (write_fd_ >= 0) close(write_fd_);
  if (read_fd_ >= 0 && read_fd_ != write_fd_) close(read_fd_);
  if (child_pid_ > 0) {
    int status = 0;
    waitpid(static_cast<pid_t>(child_pid_), &status, 0);
  }
}

void ExternalScorer::send_line(const std::string& line) const {
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = write(write_fd_, line.data() + off, line.size() - off);
    if (n <= 0) throw_error(ErrorCode::kIo, "scorer connection closed while writing");
    off += static_cast<std::size_t>(n);
  }
}

std::string ExternalScorer::recv_line() const {
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::milliseconds(config_.timeout_ms);
  for (;;) {
    auto nl = recv_buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = recv_buffer_.substr(0, nl);
      recv_buffer_.erase(0, nl + 1);
      return line;
    }
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      throw_error(ErrorCode::kTimeout, "scorer did not respond within " +
                                           std::to_string(config_.timeout_ms) + " ms");
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    pollfd pfd{read_fd_, POLLIN, 0};
    int pr = poll(&pfd, 1, static_cast<int>(left.count()));
    if (pr == 0) {
      throw_error(ErrorCode::kTimeout, "scorer did not respond within " +
                                           std::to_string(config_.timeout_ms) + " ms");
    }
    if (pr < 0) throw_error(ErrorCode::kIo, "poll on scorer connection failed");
    char chunk[4096];
    ssize_t n = read(read_fd_, chunk, sizeof(chunk));
    if (n <= 0) throw_error(ErrorCode::kProtocol, "scorer closed the connection mid-request");
    recv_buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalScorer::roundtrip(const ScorerQuery& query, std::span<const TokenId> context,
                               const std::vector<TokenId>* allowed,
                               std::vector<double>& out) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::uint64_t id = next_id_++;

  json req;
  req["version"] = 1;
  req["id"] = id;
  req["query_tokens"] = query.tokens;
  req["context_tokens"] = std::vector<TokenId>(context.begin(), context.end());
  if (allowed) req["allowed_tokens"] = *allowed;

  auto start = std::chrono::steady_clock::now();
  send_line(req.dump() + "\n");
  std::string line = recv_line();
  auto elapsed = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - start)
                     .count();
  latencies_ms_.push_back(elapsed);

  json resp;
  try {
    resp = json::parse(line);
  } catch (const json::exception& e) {
    throw_error(ErrorCode::kProtocol, std::string("malformed scorer response: ") + e.what());
  }
  const std::uint32_t v = config_.vocab_size;
  try {
    if (!resp.is_object() || !resp.contains("version") || !resp.contains("id") ||
        !resp.contains("logprobs")) {
      throw_error(ErrorCode::kProtocol, "scorer response missing version/id/logprobs");
    }
    if (resp["version"].get<int>() != 1) {
      throw_error(ErrorCode::kProtocol, "unsupported scorer protocol version");
    }
    if (resp["id"].get<std::uint64_t>() != id) {
      throw_error(ErrorCode::kProtocol, "scorer response id does not match the request");
    }

    out.assign(v, kNegInf);
    const json& lp = resp["logprobs"];
    if (lp.is_array()) {
      if (lp.size() != v) {
        throw_error(ErrorCode::kVocabMismatch,
                    "scorer returned " + std::to_string(lp.size()) +
                        " logprobs for a vocabulary of " + std::to_string(v));
      }
      for (std::uint32_t t = 0; t < v; ++t) {
        double val = lp[t].get<double>();
        if (std::isnan(val)) throw_error(ErrorCode::kProtocol, "scorer returned NaN logprob");
        out[t] = val;
      }
    } else if (lp.is_object()) {
      for (auto it = lp.begin(); it != lp.end(); ++it) {
        std::uint64_t t = 0;
        try {
          t = std::stoull(it.key());
        } catch (const std::exception&) {
          throw_error(ErrorCode::kProtocol, "sparse logprob key is not a token id: " + it.key());
        }
        if (t >= v) {
          throw_error(ErrorCode::kVocabMismatch,
                      "sparse logprob token " + it.key() + " outside vocabulary of " +
                          std::to_string(v));
        }
        double val = it.value().get<double>();
        if (std::isnan(val)) throw_error(ErrorCode::kProtocol, "scorer returned NaN logprob");
        out[t] = val;
      }
    } else {
      throw_error(ErrorCode::kProtocol, "logprobs must be a dense array or a sparse object");
    }
  } catch (const json::exception& e) {
    // Wrong value types (string logprobs, fractional ids, ...) land here.
    throw_error(ErrorCode::kProtocol, std::string("malformed scorer response: ") + e.what());
  }

  // Peers may send raw logits; normalize so downstream always sees a
  // log-distribution.
  double max_logit = *std::max_element(out.begin(), out.end());
  if (max_logit <= kNegInf) {
    throw_error(ErrorCode::kProtocol, "scorer response assigns no probability mass");
  }
  double z = 0.0;
  for (double l : out) z += std::exp(l - max_logit);
  double log_z = max_logit + std::log(z);
  for (double& l : out) {
    if (l > kNegInf) l -= log_z;
  }
}

void ExternalScorer::score_next(const ScorerQuery& query, std::span<const TokenId> context,
                                std::vector<double>& out) const {
  roundtrip(query, context, nullptr, out);
}

void ExternalScorer::score_next_allowed(const ScorerQuery& query,
                                        std::span<const TokenId> context,
                                        const std::vector<TokenId>& allowed,
                                        std::vector<double>& out) const {
  roundtrip(query, context, &allowed, out);
}

LatencyStats ExternalScorer::latency() const {
  std::lock_guard<std::mutex> lock(mutex_);
  LatencyStats stats;
  stats.calls = latencies_ms_.size();
  if (latencies_ms_.empty()) return stats;
  std::vector<double> sorted = latencies_ms_;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  stats.mean_ms = sum / sorted.size();
  stats.p50_ms = sorted[sorted.size() / 2];
  stats.p95_ms = sorted[std::min(sorted.size() - 1, sorted.size() * 95 / 100)];
  stats.max_ms = sorted.back();
  return stats;
}

}  // namespace cluedex
