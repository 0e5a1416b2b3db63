#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lyrav {

struct GatewayConfig {
  std::string base_url = "https://api.together.xyz/v1";
  std::string model_id = "deepseek-ai/DeepSeek-R1-Distill-Llama-70B-free";
  // Name of the env var holding the bearer token; empty when the endpoint
  // needs no auth (mock servers).
  std::string api_key_env = "LLM_API_KEY";
  double timeout_s = 120.0;
  int max_retries = 3;
  double backoff_base_s = 0.5;
  int concurrency_limit = 4;
  std::optional<int> requests_per_minute;
  double temperature = 0.0;
  std::string exchange_log_path;  // append-only JSONL; empty disables logging
  std::string replay_log_path;    // serve logged responses instead of HTTP
  std::uint64_t jitter_seed = 1;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatExchange {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  std::string response;
  bool ok = false;
  std::string error;
  double latency_s = 0.0;
  int attempt_count = 0;
  std::string timestamp;  // ISO-8601 UTC
  std::string request_digest;
};

struct BatchItem {
  bool ok = false;
  std::string value;  // response content when ok
  std::string error;
};

std::string serialize_exchange(const ChatExchange& e);
ChatExchange parse_exchange(std::string_view line, std::string_view origin, std::size_t line_no);
std::vector<ChatExchange> load_exchange_log(const std::string& path);

// Sliding-window limiter: at most `capacity` acquisitions per window. The
// clock and sleeper are injectable so tests can drive time.
class RateLimiter {
 public:
  using TimePoint = std::chrono::steady_clock::time_point;
  using Clock = std::function<TimePoint()>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  RateLimiter(int capacity, std::chrono::milliseconds window, Clock clock = {},
              Sleeper sleeper = {});
  void acquire();

 private:
  int capacity_;
  std::chrono::milliseconds window_;
  Clock clock_;
  Sleeper sleeper_;
  std::mutex mu_;
  std::deque<TimePoint> recent_;
};

class Gateway {
 public:
  explicit Gateway(GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // One user-role message; returns the first choice's content. Retries
  // transport errors, HTTP 429 and 5xx with full-jitter exponential backoff;
  // other 4xx fail immediately. Throws GatewayError.
  std::string complete(const std::string& user_message);

  // Dispatches with at most concurrency_limit requests in flight; results
  // align with the input order and per-item failures become error values.
  std::vector<BatchItem> complete_batch(const std::vector<std::string>& messages);

  const GatewayConfig& config() const { return config_; }
  int last_attempt_count() const;

  static std::string request_digest(const std::string& model_id,
                                    const std::vector<ChatMessage>& messages, double temperature);

 private:
  struct Impl;
  GatewayConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lyrav
