#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tceforge/date.hpp"
#include "tceforge/tokenizer.hpp"

namespace tceforge {

struct Article {
    std::string id;
    std::string tce_id;
    Date day;
    std::string title;
    std::string body;

    bool operator==(const Article&) const = default;
};

// A temporal complex event: a timeline of days, each holding one or more
// articles. Days are strictly ascending and mirror the map keys.
struct TemporalComplexEvent {
    std::string id;
    std::vector<Date> days;
    std::map<Date, std::vector<Article>> articles_by_day;

    bool operator==(const TemporalComplexEvent&) const = default;

    Date first_day() const { return days.front(); }
    Date last_day() const { return days.back(); }

    // Inclusive calendar span in days: (last - first) + 1.
    int span_days() const {
        return days.empty() ? 0 : (days.back() - days.front()) + 1;
    }

    std::size_t article_count() const;

    // Articles on every day except the last, in (day, input order). The last
    // day is reserved for forecasting ground truth and is never shown to
    // answer models.
    std::vector<const Article*> accessible_articles() const;

    std::vector<const Article*> articles_on(Date day) const;
};

struct Corpus {
    std::vector<TemporalComplexEvent> tces;  // sorted by id
    std::vector<std::string> warnings;       // e.g. single-day TCEs, kept but flagged

    const TemporalComplexEvent* find(const std::string& tce_id) const;
    std::size_t article_count() const;
};

struct CorpusSplit {
    std::set<std::string> train, dev, test;
};

struct StatsReport {
    std::size_t tce_count = 0;
    double avg_articles = 0.0;
    double avg_days = 0.0;
    std::map<int, std::int64_t> day_gap_histogram;    // inclusive span -> TCE count
    std::map<int, std::int64_t> token_histogram;      // bucket lower bound -> TCE count
    std::map<std::string, double> question_prefix_distribution;
    double avg_choice_day_gap = 0.0;

    static constexpr int kTokenBucketWidth = 2048;
};

// Optional QA-side inputs for corpus_stats, kept free of the QA types so the
// corpus model stays a leaf module.
struct QaStatsInput {
    std::vector<std::string> questions;
    // Per order item: gold days in chronological order.
    std::vector<std::vector<Date>> order_gold_days;
};

// Reads UTF-8 line-delimited records with fields id/tce_id/date/title/text,
// groups them into TCEs and sorts days. Order-independent: any permutation
// of input lines yields the same corpus.
Corpus load_corpus(const std::filesystem::path& path);

// Canonical serialization: one record per article, sorted by
// (tce_id, date, id). load(save(c)) == c.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Keeps TCEs whose inclusive span lies in [min_days, max_days].
Corpus filter_tces(const Corpus& corpus, int min_days = 5, int max_days = 30);

// Deterministic split: ids are shuffled with the seeded generator, sizes are
// floor allocations of the ratios with the remainder assigned to train.
CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> ratios,
                         std::uint64_t seed);

StatsReport corpus_stats(const Corpus& corpus, const Tokenizer& tokenizer,
                         const QaStatsInput* qa = nullptr);

}  // namespace tceforge
