#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tceforge/corpus.hpp"
#include "tceforge/date.hpp"
#include "tceforge/similarity.hpp"
#include "tceforge/tokenizer.hpp"

namespace tceforge {

struct Chunk {
    std::string chunk_id;    // "<article_id>#<k>"
    std::string article_id;
    std::string tce_id;
    Date day;
    std::string text;
    int token_count = 0;
};

inline constexpr int kDefaultChunkSize = 512;
inline constexpr int kDefaultRetrieveCount = 3;  // u

// Greedy sentence packing under the token budget; sentences too large on
// their own are hard-split at word boundaries. Chunks of one article
// concatenate back to its body modulo boundary whitespace.
std::vector<Chunk> chunk_articles(std::span<const Article* const> articles,
                                  const Tokenizer& tokenizer,
                                  int chunk_size = kDefaultChunkSize);
std::vector<Chunk> chunk_articles(std::span<const Article> articles,
                                  const Tokenizer& tokenizer,
                                  int chunk_size = kDefaultChunkSize);

enum class IndexKind { sparse, dense, hybrid };

std::string_view to_string(IndexKind kind);
std::optional<IndexKind> index_kind_from_string(std::string_view name);

struct ScoredChunk {
    std::size_t chunk_index = 0;  // into Index::chunks()
    double score = 0.0;
};

// Immutable after build; concurrent queries are unrestricted. Sparse ranking
// is Okapi BM25 (k1=1.2, b=0.75, idf = log((N-df+0.5)/(df+0.5)+1)) over
// lowercase tokens; dense ranking is cosine over unit-norm embeddings;
// hybrid re-ranks the union of both top-2u candidate pools and keeps top-u.
class Index {
public:
    static Index build(std::vector<Chunk> chunks, IndexKind kind,
                       SimilarityScorer* scorer = nullptr);

    const std::vector<Chunk>& chunks() const { return chunks_; }
    IndexKind kind() const { return kind_; }

    // Every chunk is ranked (non-matching chunks score 0); ties break by
    // (day, chunk_id) ascending; u is clamped to the corpus size.
    std::vector<ScoredChunk> retrieve(std::string_view query,
                                      int u = kDefaultRetrieveCount,
                                      std::vector<std::string>* warnings = nullptr) const;

    double bm25_score(std::string_view query, std::size_t chunk_index) const;

private:
    std::vector<ScoredChunk> rank_sparse(std::string_view query) const;
    std::vector<ScoredChunk> rank_dense(std::string_view query) const;
    void sort_ranked(std::vector<ScoredChunk>& ranked) const;

    IndexKind kind_ = IndexKind::sparse;
    std::vector<Chunk> chunks_;
    SimilarityScorer* scorer_ = nullptr;

    // BM25 state
    std::unordered_map<std::string, std::vector<std::pair<std::size_t, int>>> postings_;
    std::vector<int> doc_len_;
    double avg_doc_len_ = 0.0;

    // Dense state
    std::vector<Embedding> embeddings_;
};

// Retrieve Once: one query of the concatenated choices.
std::vector<ScoredChunk> retrieve_order_once(const Index& index,
                                             std::span<const std::string> choices,
                                             int u = kDefaultRetrieveCount);

struct ChoiceChunk {
    int choice_index = -1;
    std::size_t chunk_index = 0;
    double score = 0.0;
    bool found = false;  // false on an empty index
};

// Retrieve One by One: per choice, the earliest-day chunk among its top
// three (ties by higher score, then chunk id).
std::vector<ChoiceChunk> retrieve_order_one_by_one(const Index& index,
                                                   std::span<const std::string> choices);

struct RetrievalLog {
    std::string question_id;
    struct Hit {
        std::string chunk_id;
        std::string article_id;
        Date day;
        double score = 0.0;
    };
    std::vector<Hit> retrieved;
    std::vector<std::string> gold_article_ids;
    std::vector<Date> gold_days;
};

enum class RetrievalTask { detail, forecast, order };

struct RetrieverScores {
    double acc_doc = 0.0;
    double acc_date = 0.0;
    double acc_dates = 0.0;
};

// Acc_Doc: any retrieved chunk comes from a gold article. Acc_Date: any
// retrieved day equals a gold day. Acc_Dates (order): the set of retrieved
// days equals the set of the three choice days.
RetrieverScores score_retrieval(std::span<const RetrievalLog> logs, RetrievalTask task);

struct OrderByDateResult {
    std::vector<std::vector<int>> predicted_orders;
    double accuracy = 0.0;
};

// The no-LLM ordering baseline: choices ranked by their retrieved chunks'
// days (ties by score descending, then choice index).
OrderByDateResult acc_by_date(
    const std::vector<std::vector<std::pair<Date, double>>>& per_question_choice_days,
    const std::vector<std::vector<int>>& gold_orders);

// Versioned line-delimited chunk store (header record + one chunk per line).
void save_chunks(std::span<const Chunk> chunks, int chunk_size,
                 const std::filesystem::path& path);
std::vector<Chunk> load_chunks(const std::filesystem::path& path,
                               int* chunk_size = nullptr);

void append_retrieval_logs(std::span<const RetrievalLog> logs,
                           const std::filesystem::path& path);
std::vector<RetrievalLog> load_retrieval_logs(const std::filesystem::path& path);

}  // namespace tceforge
