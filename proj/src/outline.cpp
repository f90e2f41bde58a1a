#include "tceforge/outline.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "tceforge/errors.hpp"
#include "tceforge/jsonl.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

// Strips a leading list marker (`* `, `- `, `3.`, `3)`); returns nullopt for
// lines that are not list items.
std::optional<std::string> strip_bullet(std::string_view line) {
    auto t = text::trim(line);
    if (t.empty()) return std::nullopt;
    if (t[0] == '*' || t[0] == '-') return std::string(text::trim(t.substr(1)));
    std::size_t i = 0;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')'))
        return std::string(text::trim(t.substr(i + 1)));
    return std::nullopt;
}

std::string article_text(const Article& a) {
    if (text::trim(a.title).empty()) return a.body;
    return a.title + "\n" + a.body;
}

}  // namespace

std::vector<KeyPoint> parse_key_points(std::string_view raw, const std::string& tce_id,
                                       Date day, std::optional<std::string>* warning) {
    std::vector<KeyPoint> points;
    std::size_t start = 0;
    while (start <= raw.size()) {
        const std::size_t end = raw.find('\n', start);
        const auto line = raw.substr(start, end == std::string_view::npos ? raw.size() - start
                                                                          : end - start);
        if (auto item = strip_bullet(line); item && !item->empty()) {
            KeyPoint p;
            p.tce_id = tce_id;
            p.day = day;
            p.index_on_day = static_cast<int>(points.size()) + 1;
            p.text = std::move(*item);
            points.push_back(std::move(p));
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    if (points.empty() && warning)
        *warning = "no key points parsed for " + tce_id + " on " + day.to_string();
    return points;
}

Outline filter_key_points(std::vector<KeyPoint> points, SimilarityScorer& scorer,
                          const DedupConfig& config) {
    if (!config.valid()) throw PreconditionError("invalid dedup config");

    Outline outline;
    if (points.empty()) return outline;
    outline.tce_id = points.front().tce_id;

    std::sort(points.begin(), points.end(), [](const KeyPoint& a, const KeyPoint& b) {
        return std::tie(a.day, a.index_on_day) < std::tie(b.day, b.index_on_day);
    });

    std::vector<std::string> texts;
    texts.reserve(points.size());
    for (const auto& p : points) texts.push_back(p.text);
    const auto embeddings = scorer.embed(texts);

    // Pass 1: keep a point unless it duplicates an earlier kept one.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j : kept) {
            const double cos = cosine(embeddings[i], embeddings[j]);
            if (cos > config.duplicate_threshold ||
                scorer.duplicate_score(points[i].text, points[j].text) >
                    config.duplicate_threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) kept.push_back(i);
    }

    // Pass 2: drop isolated points, judged against the other kept points
    // all at once. A removed point's cosine with anyone is below the
    // threshold by definition, so simultaneous removal cannot orphan a
    // survivor -- which is what makes the whole filter idempotent.
    std::vector<bool> noisy(kept.size(), false);
    if (kept.size() > 1) {
        for (std::size_t a = 0; a < kept.size(); ++a) {
            double best = -1.0;
            for (std::size_t b = 0; b < kept.size(); ++b) {
                if (a == b) continue;
                best = std::max(best, cosine(embeddings[kept[a]], embeddings[kept[b]]));
            }
            noisy[a] = best < config.noise_threshold;
        }
    }

    for (std::size_t a = 0; a < kept.size(); ++a)
        if (!noisy[a]) outline.points.push_back(std::move(points[kept[a]]));
    return outline;
}

OutlineExtractor::OutlineExtractor(Gateway& gateway, const TemplateStore& templates,
                                   SimilarityScorer& scorer, DedupConfig dedup,
                                   OutlineExtractorConfig config)
    : gateway_(gateway),
      templates_(templates),
      scorer_(scorer),
      dedup_(dedup),
      config_(std::move(config)) {
    if (!dedup_.valid()) throw PreconditionError("invalid dedup config");
}

std::string OutlineExtractor::summarize_article(const Article& article) {
    if (text::trim(article.body).empty())
        throw PreconditionError("article " + article.id + " has an empty body");
    if (text::word_count(article.body) < static_cast<std::size_t>(config_.short_article_words))
        return article.body;

    GenerationRequest req;
    req.prompt = templates_.render(TemplateId::summarize_article,
                                   {{"article", article_text(article)}});
    req.max_output_tokens = config_.max_summary_tokens;
    req.temperature = config_.temperature;
    req.model_id = config_.model_id;
    try {
        return gateway_.complete(req).text;
    } catch (const Error& e) {
        throw Error("summarize_article failed for article " + article.id + ": " + e.what());
    }
}

DailySummary OutlineExtractor::summarize_day(const std::vector<std::string>& summaries,
                                             const std::string& tce_id, Date day) {
    if (summaries.empty())
        throw PreconditionError("summarize_day requires at least one summary");

    DailySummary out{tce_id, day, {}};
    if (summaries.size() == 1) {
        out.text = summaries.front();
        return out;
    }

    std::string joined;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        joined += "Summary " + std::to_string(i + 1) + ": " + summaries[i];
        if (i + 1 < summaries.size()) joined += "\n";
    }
    GenerationRequest req;
    req.prompt = templates_.render(TemplateId::summarize_day,
                                   {{"day", day.to_string()}, {"summaries", joined}});
    req.max_output_tokens = config_.max_summary_tokens;
    req.temperature = config_.temperature;
    req.model_id = config_.model_id;
    out.text = gateway_.complete(req).text;
    return out;
}

std::vector<KeyPoint> OutlineExtractor::extract_key_points(const DailySummary& summary) {
    if (text::trim(summary.text).empty())
        throw PreconditionError("extract_key_points requires a non-empty summary");

    GenerationRequest req;
    req.prompt =
        templates_.render(TemplateId::extract_key_points, {{"summary", summary.text}});
    req.max_output_tokens = config_.max_points_tokens;
    req.temperature = config_.temperature;
    req.model_id = config_.model_id;
    const auto raw = gateway_.complete(req).text;

    std::optional<std::string> warning;
    auto points = parse_key_points(raw, summary.tce_id, summary.day, &warning);
    if (warning) warnings_.push_back(*warning);
    return points;
}

Outline OutlineExtractor::extract(const TemporalComplexEvent& tce) {
    std::vector<KeyPoint> all_points;
    for (const auto& [day, articles] : tce.articles_by_day) {
        std::vector<std::string> summaries;
        summaries.reserve(articles.size());
        for (const auto& a : articles) summaries.push_back(summarize_article(a));
        const auto daily = summarize_day(summaries, tce.id, day);
        auto points = extract_key_points(daily);
        all_points.insert(all_points.end(), points.begin(), points.end());
    }
    return filter_key_points(std::move(all_points), scorer_, dedup_);
}

void save_outlines(std::span<const Outline> outlines, const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& o : outlines)
        for (const auto& p : o.points)
            out.write({{"tce_id", p.tce_id},
                       {"date", p.day.to_string()},
                       {"index", p.index_on_day},
                       {"text", p.text}});
}

std::vector<Outline> load_outlines(const std::filesystem::path& path) {
    std::map<std::string, Outline> by_tce;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        KeyPoint p;
        p.tce_id = jsonl::require_string(rec, "tce_id", line);
        p.day = Date::parse(jsonl::require_string(rec, "date", line));
        p.index_on_day = rec.value("index", 1);
        p.text = jsonl::require_string(rec, "text", line);
        auto& outline = by_tce[p.tce_id];
        outline.tce_id = p.tce_id;
        outline.points.push_back(std::move(p));
    });

    std::vector<Outline> out;
    for (auto& [id, outline] : by_tce) {
        std::sort(outline.points.begin(), outline.points.end(),
                  [](const KeyPoint& a, const KeyPoint& b) {
                      return std::tie(a.day, a.index_on_day) <
                             std::tie(b.day, b.index_on_day);
                  });
        out.push_back(std::move(outline));
    }
    return out;
}

}  // namespace tceforge
