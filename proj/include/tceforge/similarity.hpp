#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tceforge/errors.hpp"

namespace tceforge {

struct SimilarityScore {
    double embedding_cosine = 0.0;       // in [-1, 1]
    double duplicate_probability = 0.0;  // in [0, 1]
};

struct DedupConfig {
    double duplicate_threshold = 0.8;
    double noise_threshold = 0.2;

    bool valid() const {
        return noise_threshold >= 0.0 && noise_threshold < duplicate_threshold &&
               duplicate_threshold <= 1.0;
    }
};

using Embedding = std::vector<float>;

// Dot product over the shared prefix; embeddings from the same scorer use
// stable term ids, so differing lengths just mean trailing zeros.
double cosine(const Embedding& a, const Embedding& b);

// Pair scoring backends. embed() returns L2-normalized vectors;
// duplicate_score() is a probability-like pairwise score in [0, 1];
// relevance() is the query/passage score used by re-ranking, which defaults
// to embedding cosine (TF-cosine on the offline scorer).
class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
    virtual double duplicate_score(const std::string& a, const std::string& b) = 0;

    virtual double relevance(const std::string& query, const std::string& text) {
        const std::string pair[] = {query, text};
        auto vectors = embed(pair);
        return cosine(vectors[0], vectors[1]);
    }
};

// Deterministic offline scorer: term-frequency embeddings over a growing
// term-id vocabulary (so vectors from different calls stay comparable) and
// token-set Jaccard as the duplicate score. Exists so dedup logic and
// invariants are testable without model services.
class OfflineScorer final : public SimilarityScorer {
public:
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    double duplicate_score(const std::string& a, const std::string& b) override;

private:
    std::size_t term_id(const std::string& term);

    std::mutex mutex_;
    std::unordered_map<std::string, std::size_t> vocab_;
};

struct ScoringHttpProfile {
    std::string base_url;
    std::string embed_path = "/embed";
    std::string pair_path = "/score_pair";
    std::string rerank_path = "/rerank";
    std::string api_key_env = "TCEFORGE_API_KEY";
    int timeout_seconds = 120;
};

// Remote scorer speaking a small JSON protocol:
//   POST embed_path  {"texts": [...]}                -> {"embeddings": [[...], ...]}
//   POST pair_path   {"a": "...", "b": "..."}        -> {"score": 0.87}
//   POST rerank_path {"query": "...", "text": "..."} -> {"score": 0.42}
class HttpScorer final : public SimilarityScorer {
public:
    explicit HttpScorer(ScoringHttpProfile profile);

    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    double duplicate_score(const std::string& a, const std::string& b) override;
    double relevance(const std::string& query, const std::string& text) override;

private:
    double post_pair(const std::string& path, const char* key_a, const std::string& a,
                     const char* key_b, const std::string& b);

    ScoringHttpProfile profile_;
};

SimilarityScore score_pair(SimilarityScorer& scorer, const std::string& a,
                           const std::string& b);

// "Exceeds" is strict: a score equal to the threshold is not a duplicate.
inline bool is_duplicate(const SimilarityScore& s, const DedupConfig& config) {
    return s.embedding_cosine > config.duplicate_threshold ||
           s.duplicate_probability > config.duplicate_threshold;
}

bool is_duplicate(SimilarityScorer& scorer, const std::string& a, const std::string& b,
                  const DedupConfig& config);

}  // namespace tceforge
