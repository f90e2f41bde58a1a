#include "tceforge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "tceforge/errors.hpp"
#include "tceforge/jsonl.hpp"
#include "tceforge/rng.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

std::size_t TemporalComplexEvent::article_count() const {
    std::size_t n = 0;
    for (const auto& [day, arts] : articles_by_day) n += arts.size();
    return n;
}

std::vector<const Article*> TemporalComplexEvent::accessible_articles() const {
    std::vector<const Article*> out;
    if (days.size() < 2) return out;
    const Date last = days.back();
    for (const auto& [day, arts] : articles_by_day) {
        if (day == last) continue;
        for (const auto& a : arts) out.push_back(&a);
    }
    return out;
}

std::vector<const Article*> TemporalComplexEvent::articles_on(Date day) const {
    std::vector<const Article*> out;
    auto it = articles_by_day.find(day);
    if (it == articles_by_day.end()) return out;
    for (const auto& a : it->second) out.push_back(&a);
    return out;
}

const TemporalComplexEvent* Corpus::find(const std::string& tce_id) const {
    auto it = std::lower_bound(tces.begin(), tces.end(), tce_id,
                               [](const TemporalComplexEvent& t, const std::string& id) {
                                   return t.id < id;
                               });
    if (it == tces.end() || it->id != tce_id) return nullptr;
    return &*it;
}

std::size_t Corpus::article_count() const {
    std::size_t n = 0;
    for (const auto& t : tces) n += t.article_count();
    return n;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::map<std::string, std::map<Date, std::vector<Article>>> grouped;
    std::unordered_set<std::string> seen_ids;

    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        Article a;
        a.id = jsonl::require_string(rec, "id", line);
        a.tce_id = jsonl::require_string(rec, "tce_id", line);
        a.title = rec.value("title", std::string{});
        a.body = jsonl::require_string(rec, "text", line);
        try {
            a.day = Date::parse(jsonl::require_string(rec, "date", line));
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()) + " at line " + std::to_string(line));
        }
        if (text::trim(a.body).empty())
            throw ParseError("empty article text at line " + std::to_string(line));
        if (!seen_ids.insert(a.id).second)
            throw ParseError("duplicate id '" + a.id + "' at line " + std::to_string(line));
        grouped[a.tce_id][a.day].push_back(std::move(a));
    });

    Corpus corpus;
    for (auto& [tce_id, by_day] : grouped) {
        TemporalComplexEvent tce;
        tce.id = tce_id;
        for (auto& [day, arts] : by_day) {
            tce.days.push_back(day);
            // Canonical within-day order so parsing is order-independent.
            std::sort(arts.begin(), arts.end(),
                      [](const Article& x, const Article& y) { return x.id < y.id; });
        }
        tce.articles_by_day = std::move(by_day);
        if (tce.days.size() < 2)
            corpus.warnings.push_back("tce '" + tce.id + "' spans fewer than 2 days");
        corpus.tces.push_back(std::move(tce));
    }
    return corpus;  // std::map grouping leaves tces sorted by id
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& tce : corpus.tces) {
        for (const auto& [day, arts] : tce.articles_by_day) {
            for (const auto& a : arts) {
                out.write({{"id", a.id},
                           {"tce_id", a.tce_id},
                           {"date", a.day.to_string()},
                           {"title", a.title},
                           {"text", a.body}});
            }
        }
    }
}

Corpus filter_tces(const Corpus& corpus, int min_days, int max_days) {
    if (min_days > max_days)
        throw PreconditionError("filter_tces: min_days > max_days");
    Corpus out;
    out.warnings = corpus.warnings;
    for (const auto& tce : corpus.tces) {
        const int span = tce.span_days();
        if (span >= min_days && span <= max_days) out.tces.push_back(tce);
    }
    return out;
}

CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> ratios,
                         std::uint64_t seed) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0 || std::abs(sum - 1.0) > 1e-9)
        throw PreconditionError("split ratios must be non-negative and sum to 1");

    std::vector<std::string> ids;
    ids.reserve(corpus.tces.size());
    for (const auto& t : corpus.tces) ids.push_back(t.id);  // already sorted

    SeededRng rng(seed);
    rng.shuffle(ids);

    const std::size_t n = ids.size();
    std::size_t n_train = static_cast<std::size_t>(std::floor(ratios[0] * n));
    const std::size_t n_dev = static_cast<std::size_t>(std::floor(ratios[1] * n));
    const std::size_t n_test = static_cast<std::size_t>(std::floor(ratios[2] * n));
    n_train += n - (n_train + n_dev + n_test);  // remainder to train

    CorpusSplit split;
    std::size_t i = 0;
    for (; i < n_train; ++i) split.train.insert(ids[i]);
    for (; i < n_train + n_dev; ++i) split.dev.insert(ids[i]);
    for (; i < n; ++i) split.test.insert(ids[i]);
    return split;
}

StatsReport corpus_stats(const Corpus& corpus, const Tokenizer& tokenizer,
                         const QaStatsInput* qa) {
    StatsReport r;
    r.tce_count = corpus.tces.size();

    std::size_t total_articles = 0, total_days = 0;
    for (const auto& tce : corpus.tces) {
        total_articles += tce.article_count();
        total_days += tce.days.size();
        r.day_gap_histogram[tce.span_days()]++;

        std::int64_t tokens = 0;
        for (const auto& [day, arts] : tce.articles_by_day)
            for (const auto& a : arts)
                tokens += tokenizer.count_tokens(a.title) + tokenizer.count_tokens(a.body);
        const int bucket = static_cast<int>(tokens / StatsReport::kTokenBucketWidth) *
                           StatsReport::kTokenBucketWidth;
        r.token_histogram[bucket]++;
    }
    if (r.tce_count > 0) {
        r.avg_articles = static_cast<double>(total_articles) / r.tce_count;
        r.avg_days = static_cast<double>(total_days) / r.tce_count;
    }

    if (qa) {
        std::map<std::string, std::int64_t> prefix_counts;
        for (const auto& q : qa->questions) {
            const auto words = text::split_whitespace(q);
            std::string prefix;
            if (!words.empty()) {
                prefix = words[0];
                if (words.size() > 1) prefix += " " + words[1];
            }
            prefix_counts[prefix]++;
        }
        for (const auto& [prefix, count] : prefix_counts)
            r.question_prefix_distribution[prefix] =
                static_cast<double>(count) / static_cast<double>(qa->questions.size());

        double gap_sum = 0.0;
        std::size_t gap_items = 0;
        for (const auto& days : qa->order_gold_days) {
            if (days.size() < 2) continue;
            double item_sum = 0.0;
            for (std::size_t i = 1; i < days.size(); ++i) item_sum += days[i] - days[i - 1];
            gap_sum += item_sum / static_cast<double>(days.size() - 1);
            ++gap_items;
        }
        if (gap_items > 0) r.avg_choice_day_gap = gap_sum / static_cast<double>(gap_items);
    }
    return r;
}

}  // namespace tceforge
