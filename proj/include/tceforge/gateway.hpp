#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>

#include "tceforge/errors.hpp"
#include "tceforge/tokenizer.hpp"

namespace tceforge {

struct GenerationRequest {
    std::optional<std::string> system_message;
    std::string prompt;
    int max_output_tokens = 512;
    double temperature = 0.0;
    std::string model_id = "default";
};

struct Completion {
    std::string text;
    int prompt_tokens = 0;
    int output_tokens = 0;
    int attempts = 1;
};

// One text-generation provider. Throws TransientError for failures worth
// retrying, TransportError otherwise, RefusalError for provider refusals.
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual std::string complete(const GenerationRequest& request) = 0;
    virtual std::string_view name() const = 0;
};

// Deterministic offline backend. Responses are looked up by prompt hash;
// unmatched prompts fall through to an optional scripted responder.
class MockBackend final : public TextBackend {
public:
    using Responder = std::function<std::string(const GenerationRequest&)>;

    void add_canned(std::string_view prompt, std::string response);
    void set_fallback(Responder responder) { fallback_ = std::move(responder); }

    std::string complete(const GenerationRequest& request) override;
    std::string_view name() const override { return "mock"; }

private:
    std::unordered_map<std::uint64_t, std::string> canned_;
    Responder fallback_;
};

// JSON-over-HTTP chat-completion protocol with per-provider field names.
struct HttpProfile {
    std::string base_url;  // falls back to TCEFORGE_BASE_URL
    std::string path = "/v1/chat/completions";
    std::string api_key_env = "TCEFORGE_API_KEY";

    std::string model_field = "model";
    std::string messages_field = "messages";
    std::string max_tokens_field = "max_tokens";
    std::string temperature_field = "temperature";
    std::string choices_field = "choices";
    std::string message_field = "message";
    std::string content_field = "content";
    std::string finish_reason_field = "finish_reason";

    int timeout_seconds = 120;
};

class HttpBackend final : public TextBackend {
public:
    explicit HttpBackend(HttpProfile profile);

    std::string complete(const GenerationRequest& request) override;
    std::string_view name() const override { return "http"; }

private:
    HttpProfile profile_;
};

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{200};
    double multiplier = 2.0;
    // Injectable for tests; defaults to sleeping the calling thread.
    std::function<void(std::chrono::milliseconds)> sleeper;
};

struct GatewayLimits {
    int max_concurrency = 4;
    int requests_per_minute = 0;  // 0 = unbounded
};

// Temperature defaults: deterministic judging, diverse authoring.
inline constexpr double kGenerationTemperature = 0.7;
inline constexpr double kJudgingTemperature = 0.0;

// Shared front door to a backend: request validation, bounded concurrency,
// per-minute budget, retry with exponential backoff, optional tracing.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<TextBackend> backend, RetryPolicy retry = {},
                     GatewayLimits limits = {},
                     std::shared_ptr<Tokenizer> tokenizer = nullptr);

    Completion complete(const GenerationRequest& request);

    // Request/response pairs as JSONL; the stream must outlive the gateway.
    void set_trace(std::ostream* sink) { trace_ = sink; }

    const Tokenizer& tokenizer() const { return *tokenizer_; }

private:
    void admit();
    void release();

    std::shared_ptr<TextBackend> backend_;
    RetryPolicy retry_;
    GatewayLimits limits_;
    std::shared_ptr<Tokenizer> tokenizer_;
    std::ostream* trace_ = nullptr;

    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::deque<std::chrono::steady_clock::time_point> recent_;
};

}  // namespace tceforge
