#include "tceforge/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "tceforge/text.hpp"

namespace tceforge {

using nlohmann::json;

double cosine(const Embedding& a, const Embedding& b) {
    const std::size_t n = std::min(a.size(), b.size());
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += static_cast<double>(a[i]) * b[i];
    return dot;
}

std::size_t OfflineScorer::term_id(const std::string& term) {
    auto [it, inserted] = vocab_.emplace(term, vocab_.size());
    return it->second;
}

std::vector<Embedding> OfflineScorer::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw PreconditionError("embed requires at least one text");
    std::lock_guard lock(mutex_);

    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        std::vector<std::pair<std::size_t, float>> counts;
        for (const auto& token : text::alnum_tokens(t)) {
            const std::size_t id = term_id(token);
            auto it = std::find_if(counts.begin(), counts.end(),
                                   [&](const auto& p) { return p.first == id; });
            if (it == counts.end())
                counts.emplace_back(id, 1.0f);
            else
                it->second += 1.0f;
        }
        Embedding v(vocab_.size(), 0.0f);
        double norm = 0.0;
        for (const auto& [id, c] : counts) {
            v[id] = c;
            norm += static_cast<double>(c) * c;
        }
        if (norm > 0.0) {
            const float inv = static_cast<float>(1.0 / std::sqrt(norm));
            for (auto& x : v) x *= inv;
        }
        out.push_back(std::move(v));
    }
    return out;
}

double OfflineScorer::duplicate_score(const std::string& a, const std::string& b) {
    if (text::trim(a).empty() || text::trim(b).empty())
        throw PreconditionError("duplicate_score requires non-empty texts");
    const auto wa = text::lowercase_words(a);
    const auto wb = text::lowercase_words(b);
    const std::set<std::string> sa(wa.begin(), wa.end());
    const std::set<std::string> sb(wb.begin(), wb.end());

    std::size_t inter = 0;
    for (const auto& w : sa) inter += sb.count(w);
    const std::size_t uni = sa.size() + sb.size() - inter;
    if (uni == 0) return 1.0;  // both texts are pure whitespace-free punctuation
    return static_cast<double>(inter) / static_cast<double>(uni);
}

HttpScorer::HttpScorer(ScoringHttpProfile profile) : profile_(std::move(profile)) {
    if (profile_.base_url.empty())
        throw ConfigError("http scorer requires a base URL");
}

std::vector<Embedding> HttpScorer::embed(std::span<const std::string> texts) {
    if (texts.empty()) throw PreconditionError("embed requires at least one text");

    httplib::Client client(profile_.base_url);
    client.set_read_timeout(profile_.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(profile_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    json body{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    auto res = client.Post(profile_.embed_path, headers, body.dump(), "application/json");
    if (!res || res->status != 200)
        throw TransportError("embedding endpoint failed" +
                             (res ? ": status " + std::to_string(res->status) : ""));

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("embeddings"))
        throw TransportError("embedding endpoint returned malformed body");

    std::vector<Embedding> out;
    for (const auto& row : reply["embeddings"]) {
        Embedding v = row.get<Embedding>();
        double norm = 0.0;
        for (float x : v) norm += static_cast<double>(x) * x;
        if (norm > 0.0) {
            const float inv = static_cast<float>(1.0 / std::sqrt(norm));
            for (auto& x : v) x *= inv;
        }
        out.push_back(std::move(v));
    }
    if (out.size() != texts.size())
        throw TransportError("embedding endpoint returned wrong row count");
    return out;
}

double HttpScorer::post_pair(const std::string& path, const char* key_a,
                             const std::string& a, const char* key_b,
                             const std::string& b) {
    httplib::Client client(profile_.base_url);
    client.set_read_timeout(profile_.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(profile_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    json body{{key_a, a}, {key_b, b}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res || res->status != 200)
        throw TransportError("scoring endpoint " + path + " failed" +
                             (res ? ": status " + std::to_string(res->status) : ""));
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("score"))
        throw TransportError("scoring endpoint " + path + " returned malformed body");
    return reply["score"].get<double>();
}

double HttpScorer::duplicate_score(const std::string& a, const std::string& b) {
    return post_pair(profile_.pair_path, "a", a, "b", b);
}

double HttpScorer::relevance(const std::string& query, const std::string& text) {
    return post_pair(profile_.rerank_path, "query", query, "text", text);
}

SimilarityScore score_pair(SimilarityScorer& scorer, const std::string& a,
                           const std::string& b) {
    const std::string texts[] = {a, b};
    auto embeddings = scorer.embed(texts);
    return SimilarityScore{cosine(embeddings[0], embeddings[1]),
                           scorer.duplicate_score(a, b)};
}

bool is_duplicate(SimilarityScorer& scorer, const std::string& a, const std::string& b,
                  const DedupConfig& config) {
    if (!config.valid()) throw PreconditionError("invalid dedup config");
    return is_duplicate(score_pair(scorer, a, b), config);
}

}  // namespace tceforge
