#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tceforge/corpus.hpp"
#include "tceforge/gateway.hpp"
#include "tceforge/prompts.hpp"
#include "tceforge/similarity.hpp"

namespace tceforge {

struct DailySummary {
    std::string tce_id;
    Date day;
    std::string text;
};

struct KeyPoint {
    std::string tce_id;
    Date day;
    int index_on_day = 1;  // 1-based position within the day's output
    std::string text;

    // Stable id: `<tce>:<date>:<index>`. Used by order problems and dedup.
    std::string id() const {
        return tce_id + ":" + day.to_string() + ":" + std::to_string(index_on_day);
    }

    bool operator==(const KeyPoint&) const = default;
};

struct Outline {
    std::string tce_id;
    std::vector<KeyPoint> points;  // ordered by (day, index_on_day)
};

// Bullet parser for key-point output. Accepts `*`, `-` and `1.`/`1)` list
// markers (model formats drift); non-bulleted preamble lines are dropped.
// Zero parsed points is not an error: the warning is surfaced instead.
std::vector<KeyPoint> parse_key_points(std::string_view raw, const std::string& tce_id,
                                       Date day, std::optional<std::string>* warning);

// Duplicate-and-noise filter over one TCE's key points (any input order).
//
// Pass 1 walks points in (day, index) order and keeps a point only when it
// is not a duplicate of an already-kept point, so of any duplicate pair the
// later position is the one discarded. Pass 2 simultaneously removes kept
// points whose best embedding cosine against the other kept points is below
// noise_threshold; a lone point has no peers and survives. Both passes
// reuse one embedding batch.
Outline filter_key_points(std::vector<KeyPoint> points, SimilarityScorer& scorer,
                          const DedupConfig& config);

struct OutlineExtractorConfig {
    std::string model_id = "default";
    int max_summary_tokens = 256;
    int max_points_tokens = 512;
    int short_article_words = 30;  // bodies under this skip the summary call
    double temperature = kGenerationTemperature;
};

// Per-TCE pipeline: article summaries -> daily summary -> key points ->
// filtered outline.
class OutlineExtractor {
public:
    OutlineExtractor(Gateway& gateway, const TemplateStore& templates,
                     SimilarityScorer& scorer, DedupConfig dedup,
                     OutlineExtractorConfig config = {});

    std::string summarize_article(const Article& article);
    DailySummary summarize_day(const std::vector<std::string>& summaries,
                               const std::string& tce_id, Date day);
    std::vector<KeyPoint> extract_key_points(const DailySummary& summary);

    Outline extract(const TemporalComplexEvent& tce);

    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    Gateway& gateway_;
    const TemplateStore& templates_;
    SimilarityScorer& scorer_;
    DedupConfig dedup_;
    OutlineExtractorConfig config_;
    std::vector<std::string> warnings_;
};

// Line-delimited outline records: tce_id, date, index, text.
void save_outlines(std::span<const Outline> outlines, const std::filesystem::path& path);
std::vector<Outline> load_outlines(const std::filesystem::path& path);

}  // namespace tceforge
