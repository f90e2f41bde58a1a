#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tceforge/corpus.hpp"
#include "tceforge/gateway.hpp"
#include "tceforge/outline.hpp"
#include "tceforge/prompts.hpp"
#include "tceforge/qa.hpp"

namespace tceforge {

struct QaDraft {
    std::string question;
    std::string answer;
};

// Parses "Question: ...? Answer: ...." model output; throws FormatError when
// either marker is missing or empty.
QaDraft parse_qa_draft(std::string_view raw);

// Parses "(b) ... (c) ... (d) ..." distractor output. All three must be
// non-empty, mutually distinct and distinct from the correct answer.
std::array<std::string, 3> parse_distractors(std::string_view raw,
                                             const std::string& correct_answer);

// The phrases a forecasting question may start with.
std::span<const std::string_view> forecast_question_prefixes();

// Entity extraction is pluggable; the default heuristic keeps the pipeline
// dependency-free.
class EntityExtractor {
public:
    virtual ~EntityExtractor() = default;
    virtual std::set<std::string> extract(std::string_view text) = 0;
};

// Maximal runs of capitalized tokens, lowercased. A run's sentence-initial
// token is kept unless it is a function word, so "The Arbor Council" yields
// "arbor council" while "Israel reopened..." keeps "israel".
std::set<std::string> extract_entities(std::string_view text);

class HeuristicEntityExtractor final : public EntityExtractor {
public:
    std::set<std::string> extract(std::string_view text) override {
        return extract_entities(text);
    }
};

struct QaGeneratorConfig {
    std::string model_id = "default";
    int max_output_tokens = 256;
    double temperature = kGenerationTemperature;
};

// Gateway-backed draft generation for the MCQ families.
class QaGenerator {
public:
    QaGenerator(Gateway& gateway, const TemplateStore& templates,
                QaGeneratorConfig config = {});

    // Question + correct answer around a key point; the article must share
    // the key point's day.
    QaDraft generate_detail_qa(const KeyPoint& point, const Article& gold_article);

    // Forecasting draft: the key point, the gold article and the question
    // deadline all sit on the TCE's last day. Prefix, deadline and
    // no-"before" rules are enforced here.
    QaDraft generate_forecast_qa(const KeyPoint& point, const Article& gold_article,
                                 Date last_day);

    // STARC distractors; other_article must carry a different day than the
    // gold article.
    std::array<std::string, 3> generate_distractors(const QaDraft& draft,
                                                    const Article& gold_article,
                                                    const Article& other_article);

private:
    std::string call(TemplateId id, const Bindings& bindings);

    Gateway& gateway_;
    const TemplateStore& templates_;
    QaGeneratorConfig config_;
};

// One ranking problem per window of three consecutive same-entity key points
// on three distinct days. Choices are shuffled with a seed derived from the
// problem id.
std::vector<OrderQA> build_order_problems(const Outline& outline, std::uint64_t seed,
                                          EntityExtractor* extractor = nullptr);

// Seeded uniform relabeling; gold bookkeeping is remapped consistently.
DetailQA shuffle_choices(DetailQA item, std::uint64_t seed);
ForecastQA shuffle_choices(ForecastQA item, std::uint64_t seed);
OrderQA shuffle_choices(OrderQA item, std::uint64_t seed);

}  // namespace tceforge
