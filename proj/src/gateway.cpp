#include "tceforge/gateway.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tceforge/rng.hpp"

namespace tceforge {

using nlohmann::json;

void MockBackend::add_canned(std::string_view prompt, std::string response) {
    canned_[fnv1a(prompt)] = std::move(response);
}

std::string MockBackend::complete(const GenerationRequest& request) {
    auto it = canned_.find(fnv1a(request.prompt));
    if (it != canned_.end()) return it->second;
    if (fallback_) return fallback_(request);
    throw TransportError("mock backend has no response for prompt");
}

HttpBackend::HttpBackend(HttpProfile profile) : profile_(std::move(profile)) {
    if (profile_.base_url.empty()) {
        if (const char* env = std::getenv("TCEFORGE_BASE_URL")) profile_.base_url = env;
    }
    if (profile_.base_url.empty())
        throw ConfigError("http backend requires a base URL (config or TCEFORGE_BASE_URL)");
}

std::string HttpBackend::complete(const GenerationRequest& request) {
    json messages = json::array();
    if (request.system_message)
        messages.push_back({{"role", "system"}, {"content", *request.system_message}});
    messages.push_back({{"role", "user"}, {"content", request.prompt}});

    json body;
    body[profile_.model_field] = request.model_id;
    body[profile_.messages_field] = std::move(messages);
    body[profile_.max_tokens_field] = request.max_output_tokens;
    body[profile_.temperature_field] = request.temperature;

    httplib::Client client(profile_.base_url);
    client.set_connection_timeout(profile_.timeout_seconds, 0);
    client.set_read_timeout(profile_.timeout_seconds, 0);

    httplib::Headers headers;
    if (const char* key = std::getenv(profile_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(profile_.path, headers, body.dump(), "application/json");
    if (!res) throw TransientError("connection failure: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransientError("provider returned status " + std::to_string(res->status));
    if (res->status != 200)
        throw TransportError("provider returned status " + std::to_string(res->status) + ": " +
                             res->body);

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw TransportError("provider returned non-JSON body");

    const auto& choices = reply[profile_.choices_field];
    if (!choices.is_array() || choices.empty())
        throw TransportError("provider response has no choices");
    const auto& first = choices[0];

    if (first.value(profile_.finish_reason_field, std::string{}) == "content_filter")
        throw RefusalError("provider refused the request: content filter");

    const auto& message = first[profile_.message_field];
    if (!message.contains(profile_.content_field) ||
        message[profile_.content_field].is_null())
        throw RefusalError("provider returned no content: " + first.dump());
    return message[profile_.content_field].get<std::string>();
}

Gateway::Gateway(std::shared_ptr<TextBackend> backend, RetryPolicy retry,
                 GatewayLimits limits, std::shared_ptr<Tokenizer> tokenizer)
    : backend_(std::move(backend)),
      retry_(std::move(retry)),
      limits_(limits),
      tokenizer_(tokenizer ? std::move(tokenizer) : std::make_shared<HeuristicTokenizer>()) {
    if (!backend_) throw ConfigError("gateway requires a backend");
    if (!retry_.sleeper)
        retry_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

void Gateway::admit() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] {
        return limits_.max_concurrency <= 0 || in_flight_ < limits_.max_concurrency;
    });
    ++in_flight_;

    if (limits_.requests_per_minute > 0) {
        const auto window = std::chrono::minutes(1);
        for (;;) {
            const auto now = std::chrono::steady_clock::now();
            while (!recent_.empty() && now - recent_.front() >= window) recent_.pop_front();
            if (recent_.size() < static_cast<std::size_t>(limits_.requests_per_minute)) {
                recent_.push_back(now);
                break;
            }
            const auto wake = recent_.front() + window;
            cv_.wait_until(lock, wake);
        }
    }
}

void Gateway::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_all();
}

Completion Gateway::complete(const GenerationRequest& request) {
    if (text::trim(request.prompt).empty())
        throw PreconditionError("generation request prompt must be non-empty");
    if (request.max_output_tokens <= 0)
        throw PreconditionError("max_output_tokens must be positive");

    admit();
    struct Releaser {
        Gateway* g;
        ~Releaser() { g->release(); }
    } releaser{this};

    Completion result;
    auto backoff = retry_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            result.text = backend_->complete(request);
            result.attempts = attempt;
            break;
        } catch (const TransientError&) {
            if (attempt >= retry_.max_attempts) throw;
            retry_.sleeper(backoff);
            backoff = std::chrono::milliseconds(
                static_cast<long>(static_cast<double>(backoff.count()) * retry_.multiplier));
        }
    }

    result.prompt_tokens = tokenizer_->count_tokens(request.prompt);
    result.output_tokens = tokenizer_->count_tokens(result.text);

    if (trace_) {
        std::lock_guard lock(mutex_);
        json line{{"backend", std::string(backend_->name())},
                  {"model", request.model_id},
                  {"prompt", request.prompt},
                  {"response", result.text},
                  {"attempts", result.attempts}};
        *trace_ << line.dump() << '\n';
    }
    return result;
}

}  // namespace tceforge
