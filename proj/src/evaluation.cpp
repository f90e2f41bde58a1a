#include "tceforge/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "tceforge/errors.hpp"
#include "tceforge/jsonl.hpp"
#include "tceforge/metrics.hpp"
#include "tceforge/qa.hpp"
#include "tceforge/rng.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

std::string_view to_string(TaskKind task) {
    switch (task) {
        case TaskKind::detail: return "detail";
        case TaskKind::order: return "order";
        case TaskKind::forecast_mcq: return "forecast_mcq";
        case TaskKind::forecast_open: return "forecast_open";
    }
    return "unknown";
}

std::optional<TaskKind> task_from_string(std::string_view name) {
    if (name == "detail") return TaskKind::detail;
    if (name == "order") return TaskKind::order;
    if (name == "forecast" || name == "forecast_mcq") return TaskKind::forecast_mcq;
    if (name == "forecast_open" || name == "forecast-open") return TaskKind::forecast_open;
    return std::nullopt;
}

std::string_view to_string(EvalMode mode) {
    switch (mode) {
        case EvalMode::no_context: return "no_context";
        case EvalMode::rag: return "rag";
        case EvalMode::long_context: return "long_context";
    }
    return "unknown";
}

std::optional<EvalMode> eval_mode_from_string(std::string_view name) {
    if (name == "no_context" || name == "no-context") return EvalMode::no_context;
    if (name == "rag") return EvalMode::rag;
    if (name == "long_context" || name == "long-context") return EvalMode::long_context;
    return std::nullopt;
}

std::string_view to_string(OrderStrategy strategy) {
    return strategy == OrderStrategy::once ? "once" : "one_by_one";
}

std::optional<OrderStrategy> order_strategy_from_string(std::string_view name) {
    if (name == "once") return OrderStrategy::once;
    if (name == "one_by_one" || name == "one-by-one") return OrderStrategy::one_by_one;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Truncation
// ---------------------------------------------------------------------------

namespace {

struct Entry {
    const Article* article = nullptr;
    Date day;
    int tokens = 0;
    bool gold = false;
    bool evicted = false;
};

int article_tokens(const Article& a, const Tokenizer& tokenizer) {
    return tokenizer.count_tokens(a.title) + tokenizer.count_tokens(a.body);
}

}  // namespace

TruncationResult truncate_context(const TemporalComplexEvent& tce,
                                  const Tokenizer& tokenizer, int limit, TaskKind task,
                                  std::span<const Date> gold_days, std::uint64_t seed) {
    if (limit < 0) throw PreconditionError("context token limit must be non-negative");

    const std::set<Date> gold_set(gold_days.begin(), gold_days.end());
    std::vector<Entry> entries;
    long total = 0, gold_total = 0;
    if (tce.days.size() >= 2) {
        const Date last = tce.days.back();
        for (const auto& [day, articles] : tce.articles_by_day) {
            if (day == last) continue;
            for (const auto& a : articles) {
                Entry e{&a, day, article_tokens(a, tokenizer), gold_set.count(day) > 0};
                total += e.tokens;
                if (e.gold) gold_total += e.tokens;
                entries.push_back(e);
            }
        }
    }
    if (gold_total > limit)
        throw Error("irreducible context: gold-day articles alone exceed the token limit");

    TruncationResult result;
    auto evict = [&](std::size_t i) {
        entries[i].evicted = true;
        total -= entries[i].tokens;
        result.evicted.push_back(entries[i].article);
    };
    // Eligible victims never sit on a gold day.
    auto evict_back = [&](auto eligible) {
        for (std::size_t i = entries.size(); i-- > 0;) {
            if (entries[i].evicted || entries[i].gold || !eligible(entries[i])) continue;
            evict(i);
            return true;
        }
        return false;
    };
    auto evict_front = [&](auto eligible) {
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (entries[i].evicted || entries[i].gold || !eligible(entries[i])) continue;
            evict(i);
            return true;
        }
        return false;
    };
    auto any = [](const Entry&) { return true; };

    switch (task) {
        case TaskKind::detail: {
            if (gold_days.empty())
                throw PreconditionError("detail truncation requires the gold day");
            const Date gold = gold_days.front();
            long pre = 0, post = 0;
            for (const auto& e : entries) {
                if (e.day <= gold) pre += e.tokens;
                if (e.day >= gold) post += e.tokens;
            }
            if (pre > limit && post > limit) {
                // Both sides exceed the budget on their own: shed ends
                // alternately, starting from the late end.
                bool back = true;
                while (total > limit) {
                    const bool ok = back ? evict_back(any) : evict_front(any);
                    if (!ok && !(back ? evict_front(any) : evict_back(any))) break;
                    back = !back;
                }
            } else {
                auto after_gold = [&](const Entry& e) { return e.day > gold; };
                auto before_gold = [&](const Entry& e) { return e.day < gold; };
                while (total > limit && evict_back(after_gold)) {}
                while (total > limit && evict_front(before_gold)) {}
            }
            break;
        }
        case TaskKind::order: {
            if (gold_days.size() != 3)
                throw PreconditionError("order truncation requires three gold days");
            std::vector<Date> sorted(gold_days.begin(), gold_days.end());
            std::sort(sorted.begin(), sorted.end());
            const Date g1 = sorted[0], g2 = sorted[1], g3 = sorted[2];

            auto after_last = [&](const Entry& e) { return e.day > g3; };
            auto before_first = [&](const Entry& e) { return e.day < g1; };
            while (total > limit && evict_back(after_last)) {}
            while (total > limit && evict_front(before_first)) {}

            // Interior articles strictly between the outer gold days, the
            // middle gold day excluded, sampled out one by one.
            std::vector<std::size_t> interior;
            for (std::size_t i = 0; i < entries.size(); ++i) {
                const Entry& e = entries[i];
                if (!e.evicted && !e.gold && e.day > g1 && e.day < g3 && e.day != g2)
                    interior.push_back(i);
            }
            SeededRng rng(derive_seed(seed, tce.id + ":truncate"));
            while (total > limit && !interior.empty()) {
                const std::size_t pick = rng.below(interior.size());
                evict(interior[pick]);
                interior.erase(interior.begin() + static_cast<long>(pick));
            }
            break;
        }
        case TaskKind::forecast_mcq:
        case TaskKind::forecast_open: {
            while (total > limit && evict_front(any)) {}
            break;
        }
    }

    for (const auto& e : entries)
        if (!e.evicted) result.kept.push_back(e.article);
    return result;
}

// ---------------------------------------------------------------------------
// Prompt assembly and answer parsing
// ---------------------------------------------------------------------------

std::string build_eval_prompt(const TemplateStore& templates, TaskKind task,
                              std::span<const ContextPiece> context,
                              const std::string& question,
                              std::span<const std::string> choices) {
    std::vector<const ContextPiece*> ordered;
    ordered.reserve(context.size());
    for (const auto& p : context) ordered.push_back(&p);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const ContextPiece* a, const ContextPiece* b) {
                         return a->day < b->day;
                     });

    std::string context_text;
    for (const auto* p : ordered) {
        context_text += "Date: " + p->day.to_string() + "\n" + p->text + "\n\n";
    }

    std::string choice_text;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        choice_text += std::string(1, choice_label(static_cast<int>(i))) + ". " + choices[i];
        if (i + 1 < choices.size()) choice_text += "\n";
    }

    switch (task) {
        case TaskKind::detail:
            return templates.render(TemplateId::eval_detail, {{"context", context_text},
                                                              {"question", question},
                                                              {"choices", choice_text}});
        case TaskKind::order:
            return templates.render(TemplateId::eval_order,
                                    {{"context", context_text}, {"choices", choice_text}});
        case TaskKind::forecast_mcq:
            return templates.render(TemplateId::eval_forecast_mcq,
                                    {{"context", context_text},
                                     {"question", question},
                                     {"choices", choice_text}});
        case TaskKind::forecast_open:
            return templates.render(TemplateId::eval_forecast_open,
                                    {{"context", context_text}, {"question", question}});
    }
    throw PreconditionError("unknown task");
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Standalone letter: not embedded in a word.
std::optional<int> first_standalone_letter(std::string_view raw, int n_choices) {
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
        if (lower < 'a' || lower >= 'a' + n_choices) continue;
        const bool left_ok = i == 0 || !is_alnum(raw[i - 1]);
        const bool right_ok = i + 1 == raw.size() || !is_alnum(raw[i + 1]);
        if (left_ok && right_ok) return lower - 'a';
    }
    return std::nullopt;
}

std::optional<std::vector<int>> parse_order_sequence(std::string_view raw, int n_choices) {
    for (std::size_t start = 0; start < raw.size(); ++start) {
        std::size_t i = start;
        std::vector<int> seq;
        for (int want = 0; want < n_choices; ++want) {
            if (want > 0) {
                while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
                if (i >= raw.size() || raw[i] != ',') break;
                ++i;
                while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            }
            if (i >= raw.size()) break;
            const char lower =
                static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
            if (lower < 'a' || lower >= 'a' + n_choices) break;
            const bool left_ok = i == 0 || !is_alnum(raw[i - 1]);
            if (want == 0 && !left_ok) break;
            seq.push_back(lower - 'a');
            ++i;
        }
        if (static_cast<int>(seq.size()) == n_choices) {
            const bool right_ok = i >= raw.size() || !is_alnum(raw[i]);
            const std::set<int> distinct(seq.begin(), seq.end());
            if (right_ok && static_cast<int>(distinct.size()) == n_choices) return seq;
        }
    }
    return std::nullopt;
}

}  // namespace

ParsedAnswer parse_answer(TaskKind task, std::string_view raw, int n_choices) {
    ParsedAnswer p;
    switch (task) {
        case TaskKind::detail:
        case TaskKind::forecast_mcq: {
            if (auto letter = first_standalone_letter(raw, n_choices)) {
                p.kind = ParsedAnswer::Kind::letter;
                p.letter_index = *letter;
            }
            break;
        }
        case TaskKind::order: {
            if (auto seq = parse_order_sequence(raw, n_choices)) {
                p.kind = ParsedAnswer::Kind::order;
                p.order = std::move(*seq);
            }
            break;
        }
        case TaskKind::forecast_open: {
            const auto trimmed = text::trim(raw);
            if (!trimmed.empty()) {
                p.kind = ParsedAnswer::Kind::text;
                p.text = std::string(trimmed);
            }
            break;
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

namespace {

bool record_correct(const EvalRecord& r) {
    switch (r.task) {
        case TaskKind::detail:
        case TaskKind::forecast_mcq:
            return r.parsed.kind == ParsedAnswer::Kind::letter &&
                   r.parsed.letter_index == r.gold_index;
        case TaskKind::order:
            return r.parsed.kind == ParsedAnswer::Kind::order && r.parsed.order == r.gold_order;
        case TaskKind::forecast_open:
            return false;  // open answers are scored with text metrics
    }
    return false;
}

}  // namespace

McqScore score_mcq(std::span<const EvalRecord> records) {
    if (records.empty()) throw PreconditionError("score_mcq: no records");
    McqScore score;
    score.count = records.size();
    std::map<std::string, std::size_t> counts;
    std::size_t correct = 0;
    for (const auto& r : records) {
        if (r.parsed.kind == ParsedAnswer::Kind::letter)
            counts[std::string(1, choice_label(r.parsed.letter_index))]++;
        else
            counts["invalid"]++;
        correct += record_correct(r);
    }
    score.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
    for (const auto& [letter, n] : counts)
        score.letter_distribution[letter] =
            static_cast<double>(n) / static_cast<double>(records.size());
    return score;
}

OrderScore score_order(std::span<const EvalRecord> records) {
    if (records.empty()) throw PreconditionError("score_order: no records");
    OrderScore score;
    score.count = records.size();

    std::vector<std::vector<int>> predicted, gold;
    std::size_t correct = 0;
    double lev_sum = 0.0;
    for (const auto& r : records) {
        gold.push_back(r.gold_order);
        if (r.parsed.kind == ParsedAnswer::Kind::order) {
            predicted.push_back(r.parsed.order);
            lev_sum += metrics::levenshtein(r.parsed.order, r.gold_order);
        } else {
            predicted.push_back({});
            lev_sum += static_cast<double>(r.gold_order.size());
        }
        correct += record_correct(r);
    }
    score.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
    score.weighted_f1 = metrics::weighted_f1_positions(predicted, gold);
    score.mean_levenshtein = lev_sum / static_cast<double>(records.size());
    return score;
}

OpenScore score_open(std::span<const EvalRecord> records) {
    if (records.empty()) throw PreconditionError("score_open: no records");
    OpenScore score;
    score.count = records.size();
    double bleu_sum = 0.0, meteor_sum = 0.0;
    for (const auto& r : records) {
        if (r.parsed.kind != ParsedAnswer::Kind::text) continue;  // contributes zero
        bleu_sum += metrics::sentence_bleu4(r.parsed.text, r.reference_answer);
        meteor_sum += metrics::meteor(r.parsed.text, r.reference_answer);
    }
    score.bleu = 100.0 * bleu_sum / static_cast<double>(records.size());
    score.meteor = 100.0 * meteor_sum / static_cast<double>(records.size());
    return score;
}

std::vector<const Article*> relocate_gold(std::vector<const Article*> context,
                                          std::span<const Date> gold_days,
                                          double position) {
    if (position < 0.0 || position > 1.0)
        throw PreconditionError("gold position must lie in [0, 1]");
    const std::set<Date> gold_set(gold_days.begin(), gold_days.end());

    std::vector<const Article*> gold_block, rest;
    for (const Article* a : context)
        (gold_set.count(a->day) ? gold_block : rest).push_back(a);
    if (gold_block.empty()) return context;

    const auto slot = static_cast<std::size_t>(
        std::llround(position * static_cast<double>(rest.size())));

    std::vector<const Article*> out;
    out.reserve(context.size());
    out.insert(out.end(), rest.begin(), rest.begin() + static_cast<long>(slot));
    out.insert(out.end(), gold_block.begin(), gold_block.end());
    out.insert(out.end(), rest.begin() + static_cast<long>(slot), rest.end());
    return out;
}

std::vector<LengthBucketStat> bucket_by_length(std::span<const EvalRecord> records) {
    static constexpr int kBounds[] = {0, 4096, 8192, 12288};
    static constexpr const char* kLabels[] = {"0-4k", "4k-8k", "8k-12k", "12k+"};

    std::array<std::size_t, 4> counts{};
    std::array<std::size_t, 4> correct{};
    for (const auto& r : records) {
        std::size_t b = 0;
        for (std::size_t i = 0; i < 4; ++i)
            if (r.context_tokens >= kBounds[i]) b = i;
        counts[b]++;
        correct[b] += record_correct(r);
    }

    std::vector<LengthBucketStat> out;
    for (std::size_t i = 0; i < 4; ++i) {
        LengthBucketStat s;
        s.label = kLabels[i];
        s.count = counts[i];
        s.accuracy = counts[i] ? static_cast<double>(correct[i]) /
                                     static_cast<double>(counts[i])
                               : 0.0;
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Record IO
// ---------------------------------------------------------------------------

namespace {

std::string parsed_to_string(const ParsedAnswer& p) {
    switch (p.kind) {
        case ParsedAnswer::Kind::letter: return std::string(1, choice_label(p.letter_index));
        case ParsedAnswer::Kind::order: {
            std::string out;
            for (std::size_t i = 0; i < p.order.size(); ++i) {
                if (i) out += ',';
                out += choice_label(p.order[i]);
            }
            return out;
        }
        case ParsedAnswer::Kind::text: return p.text;
        case ParsedAnswer::Kind::invalid: return "INVALID";
    }
    return "INVALID";
}

}  // namespace

void save_eval_records(std::span<const EvalRecord> records,
                       const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& r : records) {
        jsonl::json rec{{"question_id", r.question_id},
                        {"task", std::string(to_string(r.task))},
                        {"raw_output", r.raw_output},
                        {"parsed", parsed_to_string(r.parsed)},
                        {"correct", record_correct(r)},
                        {"context_tokens", r.context_tokens}};
        if (r.task == TaskKind::order) {
            std::string gold;
            for (std::size_t i = 0; i < r.gold_order.size(); ++i) {
                if (i) gold += ',';
                gold += choice_label(r.gold_order[i]);
            }
            rec["gold"] = gold;
        } else if (r.task == TaskKind::forecast_open) {
            rec["gold"] = r.reference_answer;
        } else {
            rec["gold"] = std::string(1, choice_label(r.gold_index));
        }
        out.write(rec);
    }
}

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path) {
    std::vector<EvalRecord> records;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        EvalRecord r;
        r.question_id = jsonl::require_string(rec, "question_id", line);
        const auto task = task_from_string(jsonl::require_string(rec, "task", line));
        if (!task) throw ParseError("unknown task at line " + std::to_string(line));
        r.task = *task;
        r.raw_output = rec.value("raw_output", std::string{});
        r.context_tokens = rec.value("context_tokens", 0);

        const std::string gold = rec.value("gold", std::string{});
        const std::string parsed = rec.value("parsed", std::string{"INVALID"});
        const int n_choices = r.task == TaskKind::order ? 3 : 4;
        if (r.task == TaskKind::order) {
            for (char c : gold)
                if (c >= 'a' && c <= 'c') r.gold_order.push_back(c - 'a');
        } else if (r.task == TaskKind::forecast_open) {
            r.reference_answer = gold;
        } else if (!gold.empty()) {
            r.gold_index = gold[0] - 'a';
        }
        if (parsed != "INVALID")
            r.parsed = parse_answer(r.task, parsed, n_choices);
        r.correct = record_correct(r);
        records.push_back(std::move(r));
    });
    return records;
}

}  // namespace tceforge
