#include "lyrav/gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <ctime>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "lyrav/errors.hpp"
#include "lyrav/io.hpp"
#include "lyrav/text.hpp"

namespace lyrav {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json request_json(const std::string& model_id, const std::vector<ChatMessage>& messages,
                          double temperature) {
  ordered_json body;
  body["model"] = model_id;
  ordered_json msgs = ordered_json::array();
  for (const auto& m : messages) {
    ordered_json msg;
    msg["role"] = m.role;
    msg["content"] = m.content;
    msgs.push_back(std::move(msg));
  }
  body["messages"] = std::move(msgs);
  body["temperature"] = temperature;
  return body;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Splits "http://host:port/prefix" into the client root and the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const std::size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) throw ValidationError("gateway: invalid base_url: " + base_url);
  const std::size_t path = base_url.find('/', scheme + 3);
  if (path == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path), prefix};
}

}  // namespace

std::string serialize_exchange(const ChatExchange& e) {
  ordered_json obj;
  obj["request"] = request_json(e.model_id, e.messages, e.temperature);
  obj["response"] = e.response;
  obj["ok"] = e.ok;
  obj["error"] = e.error;
  obj["latency_s"] = e.latency_s;
  obj["attempt_count"] = e.attempt_count;
  obj["timestamp"] = e.timestamp;
  obj["request_digest"] = e.request_digest;
  return obj.dump();
}

ChatExchange parse_exchange(std::string_view line, std::string_view origin, std::size_t line_no) {
  ordered_json obj = ordered_json::parse(line, nullptr, false);
  const auto fail = [&](const std::string& what) -> void {
    throw ValidationError(std::string(origin) + ":" + std::to_string(line_no) + ": " + what);
  };
  if (obj.is_discarded() || !obj.is_object()) fail("not a JSON object");
  ChatExchange e;
  try {
    const auto& req = obj.at("request");
    e.model_id = req.at("model").get<std::string>();
    for (const auto& m : req.at("messages"))
      e.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
    e.temperature = req.at("temperature").get<double>();
    e.response = obj.at("response").get<std::string>();
    e.ok = obj.at("ok").get<bool>();
    e.error = obj.at("error").get<std::string>();
    e.latency_s = obj.at("latency_s").get<double>();
    e.attempt_count = obj.at("attempt_count").get<int>();
    e.timestamp = obj.at("timestamp").get<std::string>();
    e.request_digest = obj.at("request_digest").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    fail(ex.what());
  }
  return e;
}

std::vector<ChatExchange> load_exchange_log(const std::string& path) {
  std::vector<ChatExchange> out;
  std::size_t line_no = 0;
  for (const std::string& line : text::split_lines(io::read_file(path))) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    out.push_back(parse_exchange(line, path, line_no));
  }
  return out;
}

RateLimiter::RateLimiter(int capacity, std::chrono::milliseconds window, Clock clock,
                         Sleeper sleeper)
    : capacity_(capacity),
      window_(window),
      clock_(clock ? std::move(clock) : [] { return std::chrono::steady_clock::now(); }),
      sleeper_(sleeper ? std::move(sleeper)
                       : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (capacity_ < 1) throw ValidationError("rate limiter: capacity must be >= 1");
}

void RateLimiter::acquire() {
  while (true) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard<std::mutex> lock(mu_);
      const TimePoint now = clock_();
      while (!recent_.empty() && now - recent_.front() >= window_) recent_.pop_front();
      if (static_cast<int>(recent_.size()) < capacity_) {
        recent_.push_back(now);
        return;
      }
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(recent_.front() + window_ - now) +
             std::chrono::milliseconds(1);
    }
    sleeper_(wait);
  }
}

struct Gateway::Impl {
  std::mutex log_mu;
  std::mutex rng_mu;
  std::mt19937_64 rng;
  std::unique_ptr<RateLimiter> limiter;
  std::unordered_map<std::string, std::string> replay;
  bool replay_mode = false;
  std::atomic<int> last_attempts{0};
};

Gateway::Gateway(GatewayConfig config) : config_(std::move(config)), impl_(new Impl) {
  if (config_.timeout_s <= 0) throw ValidationError("gateway: timeout must be positive");
  if (config_.backoff_base_s <= 0) throw ValidationError("gateway: backoff base must be positive");
  if (config_.max_retries < 0) throw ValidationError("gateway: max_retries must be >= 0");
  if (config_.concurrency_limit < 1)
    throw ValidationError("gateway: concurrency limit must be >= 1");
  if (config_.temperature < 0) throw ValidationError("gateway: temperature must be >= 0");
  split_base_url(config_.base_url);  // syntax check
  impl_->rng.seed(config_.jitter_seed);
  if (config_.requests_per_minute) {
    impl_->limiter = std::make_unique<RateLimiter>(*config_.requests_per_minute,
                                                   std::chrono::milliseconds(60000));
  }
  if (!config_.replay_log_path.empty()) {
    impl_->replay_mode = true;
    for (const auto& e : load_exchange_log(config_.replay_log_path))
      if (e.ok) impl_->replay[e.request_digest] = e.response;  // last response wins
  }
}

Gateway::~Gateway() = default;

int Gateway::last_attempt_count() const { return impl_->last_attempts.load(); }

std::string Gateway::request_digest(const std::string& model_id,
                                    const std::vector<ChatMessage>& messages, double temperature) {
  return text::hex64(text::fnv1a64(request_json(model_id, messages, temperature).dump()));
}

std::string Gateway::complete(const std::string& user_message) {
  const std::vector<ChatMessage> messages = {{"user", user_message}};
  const std::string digest = request_digest(config_.model_id, messages, config_.temperature);

  ChatExchange exchange;
  exchange.model_id = config_.model_id;
  exchange.messages = messages;
  exchange.temperature = config_.temperature;
  exchange.request_digest = digest;

  const auto log_exchange = [&] {
    if (config_.exchange_log_path.empty()) return;
    exchange.timestamp = utc_timestamp();
    std::lock_guard<std::mutex> lock(impl_->log_mu);
    io::append_line(config_.exchange_log_path, serialize_exchange(exchange));
  };

  if (impl_->replay_mode) {
    exchange.attempt_count = 1;
    impl_->last_attempts = 1;
    auto it = impl_->replay.find(digest);
    if (it == impl_->replay.end()) {
      exchange.error = "replay miss: no logged response for request";
      log_exchange();
      throw GatewayError(exchange.error);
    }
    exchange.ok = true;
    exchange.response = it->second;
    log_exchange();
    return it->second;
  }

  const char* api_key =
      config_.api_key_env.empty() ? nullptr : std::getenv(config_.api_key_env.c_str());
  if (!config_.api_key_env.empty() && api_key == nullptr) {
    exchange.error = "missing credential: " + config_.api_key_env;
    exchange.attempt_count = 0;
    log_exchange();
    throw GatewayError(exchange.error);
  }

  const auto [root, prefix] = split_base_url(config_.base_url);
  const std::string path = prefix + "/chat/completions";
  const std::string body = request_json(config_.model_id, messages, config_.temperature).dump();
  httplib::Headers headers;
  if (api_key != nullptr) headers.insert({"Authorization", std::string("Bearer ") + api_key});

  const auto t0 = std::chrono::steady_clock::now();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    exchange.attempt_count = attempt + 1;
    if (attempt > 0) {
      // Full jitter: uniform in [0, backoff_base * 2^(attempt-1)].
      const double cap = config_.backoff_base_s * std::pow(2.0, attempt - 1);
      double delay;
      {
        std::lock_guard<std::mutex> lock(impl_->rng_mu);
        delay = std::uniform_real_distribution<double>(0.0, cap)(impl_->rng);
      }
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    if (impl_->limiter) impl_->limiter->acquire();

    httplib::Client client(root);
    client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(config_.timeout_s));
    httplib::Result res = client.Post(path, headers, body, "application/json");

    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    exchange.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    impl_->last_attempts = exchange.attempt_count;
    if (res->status != 200) {
      exchange.error = "gateway unavailable (HTTP " + std::to_string(res->status) + ")";
      log_exchange();
      throw GatewayError(exchange.error);
    }
    ordered_json parsed = ordered_json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("message") ||
        !parsed["choices"][0]["message"].contains("content") ||
        !parsed["choices"][0]["message"]["content"].is_string()) {
      exchange.error = "malformed response";
      log_exchange();
      throw GatewayError(exchange.error);
    }
    exchange.ok = true;
    exchange.response = parsed["choices"][0]["message"]["content"].get<std::string>();
    log_exchange();
    return exchange.response;
  }
  exchange.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  impl_->last_attempts = exchange.attempt_count;
  exchange.error = "gateway unavailable (" + last_error + ")";
  log_exchange();
  throw GatewayError(exchange.error);
}

std::vector<BatchItem> Gateway::complete_batch(const std::vector<std::string>& messages) {
  std::vector<BatchItem> results(messages.size());
  if (messages.empty()) return results;
  const int workers =
      std::min<int>(config_.concurrency_limit, static_cast<int>(messages.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= messages.size()) return;
        try {
          results[i] = {true, complete(messages[i]), ""};
        } catch (const std::exception& e) {
          results[i] = {false, "", e.what()};
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace lyrav
