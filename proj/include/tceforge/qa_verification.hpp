#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tceforge/corpus.hpp"
#include "tceforge/gateway.hpp"
#include "tceforge/prompts.hpp"
#include "tceforge/qa.hpp"
#include "tceforge/qa_generation.hpp"
#include "tceforge/similarity.hpp"

namespace tceforge {

enum class Aspect { Evidence, Plausible, Forecasting, Storytelling, Temporal };

std::string_view to_string(Aspect aspect);

struct Verdict {
    Aspect aspect{};
    std::vector<char> rounds;  // votes in {A,B,C}; empty for unvoted aspects
    bool passed = false;
};

// |set(gold words) symmetric-difference set(distractor words)| over
// lowercase whitespace tokens.
std::size_t word_symmetric_difference(std::string_view a, std::string_view b);

// Extracts the "Q1: x. Q2: x" letters of a voting round; unparseable
// sub-answers come back as 'C' (not knowing).
std::pair<char, char> parse_round_letters(std::string_view raw);

struct VerifierConfig {
    std::string model_id = "default";
    int max_output_tokens = 256;
    int rounds = 3;
    int majority_threshold = 2;  // rounds voting A needed to pass
};

class Verifier {
public:
    Verifier(Gateway& gateway, const TemplateStore& templates, SimilarityScorer& scorer,
             DedupConfig dedup, VerifierConfig config = {});

    // One judging call; passes only on the literal confirmation phrase, so
    // ambiguous output fails closed.
    Verdict verify_evidence(const QaDraft& draft, const Article& gold_article);

    // Pure rule check, no model call: every distractor stays within ten
    // words of the gold answer and must not duplicate it.
    Verdict verify_plausible(const std::vector<std::string>& choices, int gold_index);

    // Three independent rounds of the forecasting prompt. A round votes A
    // when Q1 answers A (guessable) and Q2 answers B (not answerable from
    // earlier articles with certainty).
    Verdict verify_forecasting(const ForecastQA& item);

    // Three shared rounds of the storyline prompt; Q1 votes Storytelling,
    // Q2 votes Temporal.
    std::pair<Verdict, Verdict> verify_order_aspects(const OrderQA& item);

    Verdict verify_voted_aspect(const ForecastQA& item, Aspect aspect);
    Verdict verify_voted_aspect(const OrderQA& item, Aspect aspect);

private:
    std::string round_call(TemplateId id, const Bindings& bindings);
    bool tally(const std::vector<char>& rounds) const;

    Gateway& gateway_;
    const TemplateStore& templates_;
    SimilarityScorer& scorer_;
    DedupConfig dedup_;
    VerifierConfig config_;
};

// Survivor-stable dedup in generation order: an item is dropped when its
// question duplicates an already-accepted question.
std::vector<DetailQA> dedup_qa(std::vector<DetailQA> items, SimilarityScorer& scorer,
                               const DedupConfig& config);
std::vector<ForecastQA> dedup_qa(std::vector<ForecastQA> items, SimilarityScorer& scorer,
                                 const DedupConfig& config);

// Order problems are deduplicated structurally: a problem sharing more than
// one source key point with an accepted problem is dropped.
std::vector<OrderQA> dedup_qa(std::vector<OrderQA> items, std::size_t max_shared_points = 1);

}  // namespace tceforge
