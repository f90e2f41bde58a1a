#include "tceforge/qa_verification.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tceforge/errors.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

constexpr std::string_view kEvidencePassPhrase = "The given answer is correct";

std::string article_prompt_text(const Article& a) {
    if (text::trim(a.title).empty()) return a.body;
    return a.title + "\n" + a.body;
}

char letter_after(std::string_view raw, std::string_view marker) {
    const std::size_t at = raw.find(marker);
    if (at == std::string_view::npos) return 'C';
    for (std::size_t i = at + marker.size(); i < raw.size(); ++i) {
        const char c = raw[i];
        if (std::isspace(static_cast<unsigned char>(c)) || c == ':' || c == '.') continue;
        const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return (u == 'A' || u == 'B' || u == 'C') ? u : 'C';
    }
    return 'C';
}

}  // namespace

std::string_view to_string(Aspect aspect) {
    switch (aspect) {
        case Aspect::Evidence: return "evidence";
        case Aspect::Plausible: return "plausible";
        case Aspect::Forecasting: return "forecasting";
        case Aspect::Storytelling: return "storytelling";
        case Aspect::Temporal: return "temporal";
    }
    return "unknown";
}

std::size_t word_symmetric_difference(std::string_view a, std::string_view b) {
    const auto wa = text::lowercase_words(a);
    const auto wb = text::lowercase_words(b);
    const std::set<std::string> sa(wa.begin(), wa.end());
    const std::set<std::string> sb(wb.begin(), wb.end());
    std::size_t diff = 0;
    for (const auto& w : sa) diff += sb.count(w) == 0;
    for (const auto& w : sb) diff += sa.count(w) == 0;
    return diff;
}

std::pair<char, char> parse_round_letters(std::string_view raw) {
    return {letter_after(raw, "Q1"), letter_after(raw, "Q2")};
}

Verifier::Verifier(Gateway& gateway, const TemplateStore& templates,
                   SimilarityScorer& scorer, DedupConfig dedup, VerifierConfig config)
    : gateway_(gateway),
      templates_(templates),
      scorer_(scorer),
      dedup_(dedup),
      config_(std::move(config)) {
    if (!dedup_.valid()) throw PreconditionError("invalid dedup config");
    if (config_.rounds < 1 || config_.majority_threshold < 1 ||
        config_.majority_threshold > config_.rounds)
        throw PreconditionError("invalid voting configuration");
}

std::string Verifier::round_call(TemplateId id, const Bindings& bindings) {
    GenerationRequest req;
    req.prompt = templates_.render(id, bindings);
    req.max_output_tokens = config_.max_output_tokens;
    req.temperature = kJudgingTemperature;
    req.model_id = config_.model_id;
    return gateway_.complete(req).text;
}

bool Verifier::tally(const std::vector<char>& rounds) const {
    const auto a_votes = std::count(rounds.begin(), rounds.end(), 'A');
    return a_votes >= config_.majority_threshold;
}

Verdict Verifier::verify_evidence(const QaDraft& draft, const Article& gold_article) {
    if (text::trim(draft.question).empty() || text::trim(draft.answer).empty())
        throw PreconditionError("evidence check requires a complete draft");

    Verdict v{Aspect::Evidence, {}, false};
    const auto raw = round_call(TemplateId::verify_evidence,
                                {{"article", article_prompt_text(gold_article)},
                                 {"question", draft.question},
                                 {"answer", draft.answer}});
    v.passed = raw.find(kEvidencePassPhrase) != std::string::npos;
    return v;
}

Verdict Verifier::verify_plausible(const std::vector<std::string>& choices,
                                   int gold_index) {
    if (choices.size() != 4 || gold_index < 0 || gold_index >= 4)
        throw PreconditionError("plausible check requires 4 choices and a gold index");

    Verdict v{Aspect::Plausible, {}, true};
    const std::string& gold = choices[gold_index];
    for (int i = 0; i < 4; ++i) {
        if (i == gold_index) continue;
        const bool wording_ok = word_symmetric_difference(choices[i], gold) < 10;
        const bool distinct_ok = !is_duplicate(scorer_, choices[i], gold, dedup_);
        if (!wording_ok || !distinct_ok) {
            v.passed = false;
            break;
        }
    }
    return v;
}

Verdict Verifier::verify_forecasting(const ForecastQA& item) {
    Verdict v{Aspect::Forecasting, {}, false};
    for (int round = 0; round < config_.rounds; ++round) {
        const auto raw = round_call(TemplateId::verify_forecasting,
                                    {{"question", item.question},
                                     {"day", item.question_deadline.to_string()}});
        const auto [q1, q2] = parse_round_letters(raw);
        char vote = 'B';
        if (q1 == 'C' || q2 == 'C')
            vote = 'C';
        else if (q1 == 'A' && q2 == 'B')
            vote = 'A';
        v.rounds.push_back(vote);
    }
    v.passed = tally(v.rounds);
    return v;
}

std::pair<Verdict, Verdict> Verifier::verify_order_aspects(const OrderQA& item) {
    std::string points;
    for (std::size_t k = 0; k < item.gold_order.size(); ++k) {
        points += std::to_string(k + 1) + ". " + item.choices[item.gold_order[k]];
        if (k + 1 < item.gold_order.size()) points += "\n";
    }

    Verdict story{Aspect::Storytelling, {}, false};
    Verdict temporal{Aspect::Temporal, {}, false};
    for (int round = 0; round < config_.rounds; ++round) {
        const auto raw =
            round_call(TemplateId::verify_story_temporal, {{"points", points}});
        const auto [q1, q2] = parse_round_letters(raw);
        story.rounds.push_back(q1);
        temporal.rounds.push_back(q2);
    }
    story.passed = tally(story.rounds);
    temporal.passed = tally(temporal.rounds);
    return {story, temporal};
}

Verdict Verifier::verify_voted_aspect(const ForecastQA& item, Aspect aspect) {
    if (aspect != Aspect::Forecasting)
        throw PreconditionError("forecast items support only the Forecasting aspect");
    return verify_forecasting(item);
}

Verdict Verifier::verify_voted_aspect(const OrderQA& item, Aspect aspect) {
    auto [story, temporal] = verify_order_aspects(item);
    if (aspect == Aspect::Storytelling) return story;
    if (aspect == Aspect::Temporal) return temporal;
    throw PreconditionError("order items support Storytelling and Temporal aspects");
}

namespace {

// Shared implementation for the MCQ families: embed all questions once,
// accept in generation order, drop duplicates of accepted questions.
template <typename Item>
std::vector<Item> dedup_by_question(std::vector<Item> items, SimilarityScorer& scorer,
                                    const DedupConfig& config) {
    if (!config.valid()) throw PreconditionError("invalid dedup config");
    if (items.empty()) return items;

    std::vector<std::string> questions;
    questions.reserve(items.size());
    for (const auto& it : items) questions.push_back(it.question);
    const auto embeddings = scorer.embed(questions);

    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < items.size(); ++i) {
        bool duplicate = false;
        for (std::size_t j : accepted) {
            if (cosine(embeddings[i], embeddings[j]) > config.duplicate_threshold ||
                scorer.duplicate_score(questions[i], questions[j]) >
                    config.duplicate_threshold) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) accepted.push_back(i);
    }

    std::vector<Item> out;
    out.reserve(accepted.size());
    for (std::size_t i : accepted) out.push_back(std::move(items[i]));
    return out;
}

}  // namespace

std::vector<DetailQA> dedup_qa(std::vector<DetailQA> items, SimilarityScorer& scorer,
                               const DedupConfig& config) {
    return dedup_by_question(std::move(items), scorer, config);
}

std::vector<ForecastQA> dedup_qa(std::vector<ForecastQA> items, SimilarityScorer& scorer,
                                 const DedupConfig& config) {
    return dedup_by_question(std::move(items), scorer, config);
}

std::vector<OrderQA> dedup_qa(std::vector<OrderQA> items, std::size_t max_shared_points) {
    std::vector<OrderQA> out;
    std::vector<std::set<std::string>> accepted_points;
    for (auto& item : items) {
        const std::set<std::string> points(item.source_point_ids.begin(),
                                           item.source_point_ids.end());
        bool duplicate = false;
        for (const auto& other : accepted_points) {
            std::size_t shared = 0;
            for (const auto& p : points) shared += other.count(p);
            if (shared > max_shared_points) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) {
            accepted_points.push_back(points);
            out.push_back(std::move(item));
        }
    }
    return out;
}

}  // namespace tceforge
