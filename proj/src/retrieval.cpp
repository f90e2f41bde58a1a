#include "tceforge/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tceforge/errors.hpp"
#include "tceforge/jsonl.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

constexpr double kBm25K1 = 1.2;
constexpr double kBm25B = 0.75;

// Splits one oversized sentence into word groups that fit the budget.
std::vector<std::string> hard_split(const std::string& sentence, const Tokenizer& tokenizer,
                                    int chunk_size) {
    const auto words = text::split_whitespace(sentence);
    std::vector<std::string> pieces;
    std::string cur;
    for (const auto& w : words) {
        std::string candidate = cur.empty() ? w : cur + " " + w;
        if (!cur.empty() && tokenizer.count_tokens(candidate) > chunk_size) {
            pieces.push_back(std::move(cur));
            cur = w;
        } else {
            cur = std::move(candidate);
        }
    }
    if (!cur.empty()) pieces.push_back(std::move(cur));
    return pieces;
}

void chunk_one(const Article& article, const Tokenizer& tokenizer, int chunk_size,
               std::vector<Chunk>& out) {
    std::vector<std::string> units;
    for (const auto& sentence : text::split_sentences(article.body)) {
        if (tokenizer.count_tokens(sentence) > chunk_size) {
            auto pieces = hard_split(sentence, tokenizer, chunk_size);
            units.insert(units.end(), pieces.begin(), pieces.end());
        } else {
            units.push_back(sentence);
        }
    }

    std::vector<std::string> texts;
    std::string cur;
    for (const auto& unit : units) {
        std::string candidate = cur.empty() ? unit : cur + " " + unit;
        if (!cur.empty() && tokenizer.count_tokens(candidate) > chunk_size) {
            texts.push_back(std::move(cur));
            cur = unit;
        } else {
            cur = std::move(candidate);
        }
    }
    if (!cur.empty()) texts.push_back(std::move(cur));

    for (std::size_t k = 0; k < texts.size(); ++k) {
        Chunk c;
        c.chunk_id = article.id + "#" + std::to_string(k);
        c.article_id = article.id;
        c.tce_id = article.tce_id;
        c.day = article.day;
        c.token_count = tokenizer.count_tokens(texts[k]);
        c.text = std::move(texts[k]);
        out.push_back(std::move(c));
    }
}

}  // namespace

std::vector<Chunk> chunk_articles(std::span<const Article* const> articles,
                                  const Tokenizer& tokenizer, int chunk_size) {
    if (chunk_size <= 0) throw PreconditionError("chunk_size must be positive");
    std::vector<Chunk> out;
    for (const Article* a : articles) chunk_one(*a, tokenizer, chunk_size, out);
    return out;
}

std::vector<Chunk> chunk_articles(std::span<const Article> articles,
                                  const Tokenizer& tokenizer, int chunk_size) {
    if (chunk_size <= 0) throw PreconditionError("chunk_size must be positive");
    std::vector<Chunk> out;
    for (const Article& a : articles) chunk_one(a, tokenizer, chunk_size, out);
    return out;
}

std::string_view to_string(IndexKind kind) {
    switch (kind) {
        case IndexKind::sparse: return "sparse";
        case IndexKind::dense: return "dense";
        case IndexKind::hybrid: return "hybrid";
    }
    return "unknown";
}

std::optional<IndexKind> index_kind_from_string(std::string_view name) {
    if (name == "sparse" || name == "bm25") return IndexKind::sparse;
    if (name == "dense") return IndexKind::dense;
    if (name == "hybrid") return IndexKind::hybrid;
    return std::nullopt;
}

Index Index::build(std::vector<Chunk> chunks, IndexKind kind, SimilarityScorer* scorer) {
    if ((kind == IndexKind::dense || kind == IndexKind::hybrid) && scorer == nullptr)
        throw ConfigError("dense and hybrid indexes require an embedding backend");

    Index index;
    index.kind_ = kind;
    index.chunks_ = std::move(chunks);
    index.scorer_ = scorer;

    if (kind == IndexKind::sparse || kind == IndexKind::hybrid) {
        index.doc_len_.resize(index.chunks_.size(), 0);
        long total_len = 0;
        for (std::size_t i = 0; i < index.chunks_.size(); ++i) {
            std::map<std::string, int> tf;
            for (const auto& tok : text::alnum_tokens(index.chunks_[i].text)) tf[tok]++;
            int len = 0;
            for (const auto& [term, count] : tf) {
                index.postings_[term].emplace_back(i, count);
                len += count;
            }
            index.doc_len_[i] = len;
            total_len += len;
        }
        index.avg_doc_len_ = index.chunks_.empty()
                                 ? 0.0
                                 : static_cast<double>(total_len) /
                                       static_cast<double>(index.chunks_.size());
    }

    if (kind == IndexKind::dense || kind == IndexKind::hybrid) {
        std::vector<std::string> texts;
        texts.reserve(index.chunks_.size());
        for (const auto& c : index.chunks_) texts.push_back(c.text);
        if (!texts.empty()) index.embeddings_ = scorer->embed(texts);
    }
    return index;
}

void Index::sort_ranked(std::vector<ScoredChunk>& ranked) const {
    std::sort(ranked.begin(), ranked.end(), [&](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        const Chunk& ca = chunks_[a.chunk_index];
        const Chunk& cb = chunks_[b.chunk_index];
        if (ca.day != cb.day) return ca.day < cb.day;
        return ca.chunk_id < cb.chunk_id;
    });
}

std::vector<ScoredChunk> Index::rank_sparse(std::string_view query) const {
    std::vector<double> scores(chunks_.size(), 0.0);
    // Query tokens are taken as given: a repeated term contributes twice.
    for (const auto& term : text::alnum_tokens(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const double df = static_cast<double>(it->second.size());
        const double n = static_cast<double>(chunks_.size());
        const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
        for (const auto& [doc, tf] : it->second) {
            const double norm =
                kBm25K1 * (1.0 - kBm25B + kBm25B * doc_len_[doc] / avg_doc_len_);
            scores[doc] += idf * (tf * (kBm25K1 + 1.0)) / (tf + norm);
        }
    }
    std::vector<ScoredChunk> ranked(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i) ranked[i] = {i, scores[i]};
    sort_ranked(ranked);
    return ranked;
}

std::vector<ScoredChunk> Index::rank_dense(std::string_view query) const {
    const std::string q(query);
    const std::string texts[] = {q};
    const auto qv = scorer_->embed(texts);

    std::vector<ScoredChunk> ranked(chunks_.size());
    for (std::size_t i = 0; i < chunks_.size(); ++i)
        ranked[i] = {i, cosine(qv[0], embeddings_[i])};
    sort_ranked(ranked);
    return ranked;
}

double Index::bm25_score(std::string_view query, std::size_t chunk_index) const {
    double score = 0.0;
    for (const auto& term : text::alnum_tokens(query)) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        const auto& plist = it->second;
        auto doc_it = std::find_if(plist.begin(), plist.end(),
                                   [&](const auto& p) { return p.first == chunk_index; });
        if (doc_it == plist.end()) continue;
        const double df = static_cast<double>(plist.size());
        const double n = static_cast<double>(chunks_.size());
        const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
        const double norm =
            kBm25K1 * (1.0 - kBm25B + kBm25B * doc_len_[chunk_index] / avg_doc_len_);
        score += idf * (doc_it->second * (kBm25K1 + 1.0)) / (doc_it->second + norm);
    }
    return score;
}

std::vector<ScoredChunk> Index::retrieve(std::string_view query, int u,
                                         std::vector<std::string>* warnings) const {
    if (chunks_.empty()) return {};
    if (text::alnum_tokens(query).empty()) {
        if (warnings) warnings->push_back("empty query; returning no chunks");
        return {};
    }
    const std::size_t keep = std::min<std::size_t>(std::max(u, 0), chunks_.size());

    std::vector<ScoredChunk> ranked;
    switch (kind_) {
        case IndexKind::sparse:
            ranked = rank_sparse(query);
            break;
        case IndexKind::dense:
            ranked = rank_dense(query);
            break;
        case IndexKind::hybrid: {
            const auto sparse = rank_sparse(query);
            const auto dense = rank_dense(query);
            const std::size_t pool = std::min<std::size_t>(2 * keep, chunks_.size());
            std::set<std::size_t> candidates;
            for (std::size_t i = 0; i < pool; ++i) {
                candidates.insert(sparse[i].chunk_index);
                candidates.insert(dense[i].chunk_index);
            }
            const std::string q(query);
            for (std::size_t ci : candidates)
                ranked.push_back({ci, scorer_->relevance(q, chunks_[ci].text)});
            sort_ranked(ranked);
            break;
        }
    }
    ranked.resize(std::min(keep, ranked.size()));
    return ranked;
}

std::vector<ScoredChunk> retrieve_order_once(const Index& index,
                                             std::span<const std::string> choices, int u) {
    std::string query;
    for (const auto& c : choices) {
        if (!query.empty()) query += " ";
        query += c;
    }
    return index.retrieve(query, u);
}

std::vector<ChoiceChunk> retrieve_order_one_by_one(const Index& index,
                                                   std::span<const std::string> choices) {
    std::vector<ChoiceChunk> out;
    for (std::size_t r = 0; r < choices.size(); ++r) {
        const auto top = index.retrieve(choices[r], kDefaultRetrieveCount);
        ChoiceChunk pick;
        pick.choice_index = static_cast<int>(r);
        for (const auto& sc : top) {
            const Chunk& c = index.chunks()[sc.chunk_index];
            if (!pick.found) {
                pick = {static_cast<int>(r), sc.chunk_index, sc.score, true};
                continue;
            }
            const Chunk& best = index.chunks()[pick.chunk_index];
            const bool earlier = c.day < best.day;
            const bool same_day_better =
                c.day == best.day &&
                (sc.score > pick.score ||
                 (sc.score == pick.score && c.chunk_id < best.chunk_id));
            if (earlier || same_day_better) pick = {static_cast<int>(r), sc.chunk_index,
                                                    sc.score, true};
        }
        out.push_back(pick);
    }
    return out;
}

RetrieverScores score_retrieval(std::span<const RetrievalLog> logs, RetrievalTask task) {
    if (logs.empty()) throw PreconditionError("score_retrieval: no logs");

    std::size_t doc_hits = 0, date_hits = 0, dates_hits = 0;
    for (const auto& log : logs) {
        bool doc = false, date = false;
        for (const auto& hit : log.retrieved) {
            for (const auto& gold : log.gold_article_ids) doc = doc || hit.article_id == gold;
            for (const auto& gold : log.gold_days) date = date || hit.day == gold;
        }
        doc_hits += doc;
        date_hits += date;

        if (task == RetrievalTask::order) {
            std::set<Date> retrieved_days, gold_days(log.gold_days.begin(),
                                                     log.gold_days.end());
            for (const auto& hit : log.retrieved) retrieved_days.insert(hit.day);
            dates_hits += retrieved_days == gold_days;
        }
    }

    const double n = static_cast<double>(logs.size());
    RetrieverScores scores;
    scores.acc_doc = doc_hits / n;
    scores.acc_date = date_hits / n;
    scores.acc_dates = task == RetrievalTask::order ? dates_hits / n : 0.0;
    return scores;
}

OrderByDateResult acc_by_date(
    const std::vector<std::vector<std::pair<Date, double>>>& per_question_choice_days,
    const std::vector<std::vector<int>>& gold_orders) {
    if (per_question_choice_days.size() != gold_orders.size())
        throw PreconditionError("acc_by_date: size mismatch");

    OrderByDateResult result;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < per_question_choice_days.size(); ++i) {
        const auto& chosen = per_question_choice_days[i];
        std::vector<int> order(chosen.size());
        for (std::size_t r = 0; r < chosen.size(); ++r) order[r] = static_cast<int>(r);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (chosen[a].first != chosen[b].first) return chosen[a].first < chosen[b].first;
            if (chosen[a].second != chosen[b].second)
                return chosen[a].second > chosen[b].second;
            return a < b;
        });
        correct += order == gold_orders[i];
        result.predicted_orders.push_back(std::move(order));
    }
    result.accuracy = per_question_choice_days.empty()
                          ? 0.0
                          : static_cast<double>(correct) /
                                static_cast<double>(per_question_choice_days.size());
    return result;
}

void save_chunks(std::span<const Chunk> chunks, int chunk_size,
                 const std::filesystem::path& path) {
    jsonl::Writer out(path);
    out.write({{"format", "tceforge-chunks"}, {"version", 1}, {"chunk_size", chunk_size}});
    for (const auto& c : chunks)
        out.write({{"chunk_id", c.chunk_id},
                   {"article_id", c.article_id},
                   {"tce_id", c.tce_id},
                   {"date", c.day.to_string()},
                   {"text", c.text},
                   {"tokens", c.token_count}});
}

std::vector<Chunk> load_chunks(const std::filesystem::path& path, int* chunk_size) {
    std::vector<Chunk> chunks;
    bool header_seen = false;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        if (!header_seen) {
            if (rec.value("format", std::string{}) != "tceforge-chunks" ||
                rec.value("version", 0) != 1)
                throw ParseError("unrecognized chunk store header at line " +
                                 std::to_string(line));
            if (chunk_size) *chunk_size = rec.value("chunk_size", kDefaultChunkSize);
            header_seen = true;
            return;
        }
        Chunk c;
        c.chunk_id = jsonl::require_string(rec, "chunk_id", line);
        c.article_id = jsonl::require_string(rec, "article_id", line);
        c.tce_id = rec.value("tce_id", std::string{});
        c.day = Date::parse(jsonl::require_string(rec, "date", line));
        c.text = jsonl::require_string(rec, "text", line);
        c.token_count = rec.value("tokens", 0);
        chunks.push_back(std::move(c));
    });
    if (!header_seen) throw ParseError("chunk store is missing its header: " + path.string());
    return chunks;
}

void append_retrieval_logs(std::span<const RetrievalLog> logs,
                           const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& log : logs) {
        jsonl::json hits = jsonl::json::array();
        for (const auto& h : log.retrieved)
            hits.push_back({{"chunk_id", h.chunk_id},
                            {"article_id", h.article_id},
                            {"date", h.day.to_string()},
                            {"score", h.score}});
        std::vector<std::string> days;
        for (auto d : log.gold_days) days.push_back(d.to_string());
        out.write({{"question_id", log.question_id},
                   {"retrieved", hits},
                   {"gold_article_ids", log.gold_article_ids},
                   {"gold_dates", days}});
    }
}

std::vector<RetrievalLog> load_retrieval_logs(const std::filesystem::path& path) {
    std::vector<RetrievalLog> logs;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        RetrievalLog log;
        log.question_id = jsonl::require_string(rec, "question_id", line);
        for (const auto& h : rec.at("retrieved"))
            log.retrieved.push_back({h.at("chunk_id").get<std::string>(),
                                     h.at("article_id").get<std::string>(),
                                     Date::parse(h.at("date").get<std::string>()),
                                     h.value("score", 0.0)});
        log.gold_article_ids =
            rec.value("gold_article_ids", std::vector<std::string>{});
        for (const auto& d : rec.at("gold_dates"))
            log.gold_days.push_back(Date::parse(d.get<std::string>()));
        logs.push_back(std::move(log));
    });
    return logs;
}

}  // namespace tceforge
