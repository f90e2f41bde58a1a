#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tceforge/corpus.hpp"
#include "tceforge/prompts.hpp"
#include "tceforge/retrieval.hpp"
#include "tceforge/tokenizer.hpp"

namespace tceforge {

enum class TaskKind { detail, order, forecast_mcq, forecast_open };
enum class EvalMode { no_context, rag, long_context };
enum class OrderStrategy { once, one_by_one };

std::string_view to_string(TaskKind task);
std::optional<TaskKind> task_from_string(std::string_view name);
std::string_view to_string(EvalMode mode);
std::optional<EvalMode> eval_mode_from_string(std::string_view name);
std::string_view to_string(OrderStrategy strategy);
std::optional<OrderStrategy> order_strategy_from_string(std::string_view name);

struct EvalConfig {
    EvalMode mode = EvalMode::rag;
    IndexKind retriever_kind = IndexKind::sparse;
    OrderStrategy order_strategy = OrderStrategy::one_by_one;
    int context_token_limit = 16384;  // long-context budget
    int retrieve_count = kDefaultRetrieveCount;
    int chunk_size = kDefaultChunkSize;
    std::string model_id = "default";
    int max_output_tokens = 64;
    std::optional<double> gold_position;  // relocation knob, [0,1]
};

struct TruncationResult {
    std::vector<const Article*> kept;     // (day, input order)
    std::vector<const Article*> evicted;  // in eviction order
};

// Task-specific context truncation over the accessible articles (all days
// except the last). Gold-day articles are never evicted. Eviction order:
//   detail   - latest accessible day backward; once only [t1..gold] remains
//              over budget, earliest day forward; when both sides exceed the
//              budget on their own, alternately one from each end (late end
//              first).
//   order    - days after the last gold day backward, days before the first
//              gold day forward, then seeded random eviction strictly
//              between the outer gold days (middle gold day excluded).
//   forecast - earliest day forward.
// Throws Error("irreducible context") when gold-day articles alone exceed
// the limit.
TruncationResult truncate_context(const TemporalComplexEvent& tce,
                                  const Tokenizer& tokenizer, int limit, TaskKind task,
                                  std::span<const Date> gold_days, std::uint64_t seed);

struct ContextPiece {
    Date day;
    std::string text;
};

// Renders the task template with dated context blocks in chronological
// order. Order prompts carry no question section.
std::string build_eval_prompt(const TemplateStore& templates, TaskKind task,
                              std::span<const ContextPiece> context,
                              const std::string& question,
                              std::span<const std::string> choices);

struct ParsedAnswer {
    enum class Kind { letter, order, text, invalid };
    Kind kind = Kind::invalid;
    int letter_index = -1;      // letter
    std::vector<int> order;     // order
    std::string text;           // free text

    bool invalid() const { return kind == Kind::invalid; }
};

// Never throws; anything unrecognizable is INVALID.
ParsedAnswer parse_answer(TaskKind task, std::string_view raw, int n_choices);

struct EvalRecord {
    std::string question_id;
    TaskKind task = TaskKind::detail;
    std::string raw_output;
    ParsedAnswer parsed;
    bool correct = false;  // closed-ended only; INVALID implies false
    int context_tokens = 0;
    int gold_index = -1;              // MCQ tasks
    std::vector<int> gold_order;      // order task
    std::string reference_answer;     // open forecast
};

struct McqScore {
    double accuracy = 0.0;
    std::map<std::string, double> letter_distribution;  // "a".."d" and "invalid"
    std::size_t count = 0;
};
McqScore score_mcq(std::span<const EvalRecord> records);

struct OrderScore {
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    double mean_levenshtein = 0.0;
    std::size_t count = 0;
};
OrderScore score_order(std::span<const EvalRecord> records);

struct OpenScore {
    double bleu = 0.0;    // x100
    double meteor = 0.0;  // x100
    std::size_t count = 0;
};
OpenScore score_open(std::span<const EvalRecord> records);

// Moves gold-day articles as one contiguous block to the slot nearest
// position * (number of non-gold articles); relative order elsewhere is
// preserved.
std::vector<const Article*> relocate_gold(std::vector<const Article*> context,
                                          std::span<const Date> gold_days,
                                          double position);

struct LengthBucketStat {
    std::string label;
    std::size_t count = 0;
    double accuracy = 0.0;
};

// Fixed context-length buckets 0-4k / 4k-8k / 8k-12k / 12k+, lower bound
// inclusive, 4k = 4096 tokens.
std::vector<LengthBucketStat> bucket_by_length(std::span<const EvalRecord> records);

void save_eval_records(std::span<const EvalRecord> records,
                       const std::filesystem::path& path);
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path);

}  // namespace tceforge
