#include "tceforge/qa_generation.hpp"

#include <algorithm>
#include <cctype>

#include "tceforge/errors.hpp"
#include "tceforge/rng.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

constexpr std::string_view kForecastPrefixes[] = {
    "What will", "Who will", "Where will", "Which country will",
    "Why will",  "How much", "How will",   "How many",
};

// Function words whose sentence-initial capitalization is not evidence of
// an entity.
const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "the", "a", "an", "in", "on", "at", "by", "of", "to", "for", "with", "from",
        "this", "that", "these", "those", "it", "its", "he", "his", "she", "her",
        "they", "their", "we", "our", "you", "your", "i", "my", "after", "before",
        "during", "when", "while", "however", "meanwhile", "today", "yesterday",
        "tomorrow", "as", "but", "and", "or", "if", "so", "not", "no", "now", "then",
        "there", "here", "is", "are", "was", "were",
    };
    return words;
}

bool is_capitalized(std::string_view token) {
    return !token.empty() && std::isupper(static_cast<unsigned char>(token[0])) != 0;
}

std::string clean_entity_token(std::string_view token) {
    std::size_t b = 0, e = token.size();
    while (b < e && !std::isalnum(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && !std::isalnum(static_cast<unsigned char>(token[e - 1]))) --e;
    return text::to_lower(token.substr(b, e - b));
}

std::string article_prompt_text(const Article& a) {
    if (text::trim(a.title).empty()) return a.body;
    return a.title + "\n" + a.body;
}

// Section of `raw` between `marker` and the next of `stops` (or the end).
std::optional<std::string> between(std::string_view raw, std::string_view marker,
                                   std::initializer_list<std::string_view> stops) {
    const std::size_t at = raw.find(marker);
    if (at == std::string_view::npos) return std::nullopt;
    const std::size_t from = at + marker.size();
    std::size_t to = raw.size();
    for (auto stop : stops) {
        const std::size_t pos = raw.find(stop, from);
        if (pos != std::string_view::npos) to = std::min(to, pos);
    }
    return std::string(text::trim(raw.substr(from, to - from)));
}

}  // namespace

std::span<const std::string_view> forecast_question_prefixes() {
    return kForecastPrefixes;
}

QaDraft parse_qa_draft(std::string_view raw) {
    auto question = between(raw, "Question:", {"Answer:"});
    auto answer = between(raw, "Answer:", {"Question:"});
    if (!question || question->empty() || !answer || answer->empty())
        throw FormatError("draft output lacks Question:/Answer: markers");

    QaDraft draft{std::move(*question), std::move(*answer)};
    // Trailing period is format scaffolding ("Answer: xxx."), not content.
    if (draft.answer.size() > 1 && draft.answer.back() == '.') draft.answer.pop_back();
    return draft;
}

std::array<std::string, 3> parse_distractors(std::string_view raw,
                                             const std::string& correct_answer) {
    auto b = between(raw, "(b)", {"(c)", "(d)"});
    auto c = between(raw, "(c)", {"(d)"});
    auto d = between(raw, "(d)", {});
    if (!b || b->empty() || !c || c->empty() || !d || d->empty())
        throw FormatError("distractor output lacks (b)/(c)/(d) markers");

    std::array<std::string, 3> out{std::move(*b), std::move(*c), std::move(*d)};
    std::set<std::string> seen{text::normalize_whitespace(correct_answer)};
    for (const auto& text_ : out) {
        if (!seen.insert(text::normalize_whitespace(text_)).second)
            throw FormatError("distractor repeats the correct answer or another choice");
    }
    return out;
}

std::set<std::string> extract_entities(std::string_view text_in) {
    std::set<std::string> entities;
    for (const auto& sentence : text::split_sentences(text_in)) {
        const auto tokens = text::split_whitespace(sentence);
        std::size_t i = 0;
        while (i < tokens.size()) {
            if (!is_capitalized(tokens[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < tokens.size() && is_capitalized(tokens[j])) ++j;

            std::vector<std::string> parts;
            for (std::size_t k = i; k < j; ++k) {
                auto cleaned = clean_entity_token(tokens[k]);
                if (cleaned.empty()) continue;
                // Sentence-initial capitalization of a function word is
                // positional, not an entity signal.
                if (k == 0 && i == 0 && stopwords().count(cleaned)) continue;
                parts.push_back(std::move(cleaned));
            }
            if (!parts.empty()) {
                std::string entity = parts[0];
                for (std::size_t k = 1; k < parts.size(); ++k) entity += " " + parts[k];
                entities.insert(std::move(entity));
            }
            i = j;
        }
    }
    return entities;
}

QaGenerator::QaGenerator(Gateway& gateway, const TemplateStore& templates,
                         QaGeneratorConfig config)
    : gateway_(gateway), templates_(templates), config_(std::move(config)) {}

std::string QaGenerator::call(TemplateId id, const Bindings& bindings) {
    GenerationRequest req;
    req.prompt = templates_.render(id, bindings);
    req.max_output_tokens = config_.max_output_tokens;
    req.temperature = config_.temperature;
    req.model_id = config_.model_id;
    return gateway_.complete(req).text;
}

QaDraft QaGenerator::generate_detail_qa(const KeyPoint& point, const Article& gold_article) {
    if (point.day != gold_article.day)
        throw PreconditionError("detail QA: key point day " + point.day.to_string() +
                                " does not match gold article day " +
                                gold_article.day.to_string());
    const auto raw = call(TemplateId::gen_detail_qa,
                          {{"article", article_prompt_text(gold_article)},
                           {"point", point.text}});
    return parse_qa_draft(raw);
}

QaDraft QaGenerator::generate_forecast_qa(const KeyPoint& point, const Article& gold_article,
                                          Date last_day) {
    if (point.day != last_day || gold_article.day != last_day)
        throw PreconditionError(
            "forecast QA: key point and gold article must sit on the last TCE day");

    const auto raw = call(TemplateId::gen_forecast_qa,
                          {{"article", article_prompt_text(gold_article)},
                           {"point", point.text},
                           {"day", last_day.to_string()}});
    auto draft = parse_qa_draft(raw);

    bool has_prefix = false;
    for (auto p : kForecastPrefixes)
        has_prefix = has_prefix || text::starts_with(draft.question, p);
    if (!has_prefix)
        throw FormatError("forecast question does not start with an allowed prefix: " +
                          draft.question);

    const std::string deadline = last_day.to_string();
    auto q = text::trim(std::string_view(draft.question));
    if (!q.empty() && q.back() == '?') q.remove_suffix(1);
    q = text::trim(q);
    if (q.size() < deadline.size() || q.substr(q.size() - deadline.size()) != deadline)
        throw FormatError("forecast question does not end with the deadline " + deadline +
                          ": " + draft.question);
    if (text::contains_word_ci(draft.question, "before"))
        throw FormatError("forecast question uses 'before': " + draft.question);
    return draft;
}

std::array<std::string, 3> QaGenerator::generate_distractors(const QaDraft& draft,
                                                             const Article& gold_article,
                                                             const Article& other_article) {
    if (other_article.day == gold_article.day)
        throw PreconditionError("distractor background must come from a different day");
    const auto raw = call(TemplateId::gen_distractors,
                          {{"background1", article_prompt_text(gold_article)},
                           {"background2", article_prompt_text(other_article)},
                           {"question", draft.question},
                           {"answer", draft.answer}});
    return parse_distractors(raw, draft.answer);
}

std::vector<OrderQA> build_order_problems(const Outline& outline, std::uint64_t seed,
                                          EntityExtractor* extractor) {
    HeuristicEntityExtractor default_extractor;
    EntityExtractor& ex = extractor ? *extractor : default_extractor;

    // Entity -> indexes of linked points, in outline (day, index) order.
    std::map<std::string, std::vector<std::size_t>> by_entity;
    for (std::size_t i = 0; i < outline.points.size(); ++i)
        for (const auto& e : ex.extract(outline.points[i].text))
            by_entity[e].push_back(i);

    std::vector<OrderQA> problems;
    for (const auto& [entity, indexes] : by_entity) {
        if (indexes.size() < 3) continue;
        std::set<Date> distinct_days;
        for (auto i : indexes) distinct_days.insert(outline.points[i].day);
        if (distinct_days.size() < 3) continue;

        for (std::size_t w = 0; w + 3 <= indexes.size(); ++w) {
            const KeyPoint& p0 = outline.points[indexes[w]];
            const KeyPoint& p1 = outline.points[indexes[w + 1]];
            const KeyPoint& p2 = outline.points[indexes[w + 2]];
            // A chronological gold order needs three distinct days.
            if (!(p0.day < p1.day && p1.day < p2.day)) continue;

            OrderQA qa;
            qa.tce_id = outline.tce_id;
            qa.id = outline.tce_id + ":order:" + entity + ":" + std::to_string(w);
            qa.choices = {p0.text, p1.text, p2.text};
            qa.gold_order = {0, 1, 2};
            qa.gold_days = {p0.day, p1.day, p2.day};
            qa.linking_entity = entity;
            qa.source_point_ids = {p0.id(), p1.id(), p2.id()};
            const std::uint64_t item_seed = derive_seed(seed, qa.id);
            problems.push_back(shuffle_choices(std::move(qa), item_seed));
        }
    }
    return problems;
}

namespace {

// new_position[i] holds the old index that moved to slot i.
std::vector<int> permutation(std::size_t n, std::uint64_t seed) {
    std::vector<int> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
    SeededRng rng(seed);
    rng.shuffle(perm);
    return perm;
}

template <typename T>
std::vector<T> apply_permutation(const std::vector<T>& v, const std::vector<int>& perm) {
    std::vector<T> out;
    out.reserve(v.size());
    for (int old_index : perm) out.push_back(v[old_index]);
    return out;
}

}  // namespace

DetailQA shuffle_choices(DetailQA item, std::uint64_t seed) {
    const auto perm = permutation(item.choices.size(), seed);
    item.choices = apply_permutation(item.choices, perm);
    for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] == item.gold_index) {
            item.gold_index = static_cast<int>(i);
            break;
        }
    return item;
}

ForecastQA shuffle_choices(ForecastQA item, std::uint64_t seed) {
    const auto perm = permutation(item.choices.size(), seed);
    item.choices = apply_permutation(item.choices, perm);
    for (std::size_t i = 0; i < perm.size(); ++i)
        if (perm[i] == item.gold_index) {
            item.gold_index = static_cast<int>(i);
            break;
        }
    return item;
}

OrderQA shuffle_choices(OrderQA item, std::uint64_t seed) {
    const auto perm = permutation(item.choices.size(), seed);
    std::vector<int> new_slot(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) new_slot[perm[i]] = static_cast<int>(i);

    item.choices = apply_permutation(item.choices, perm);
    item.gold_days = apply_permutation(item.gold_days, perm);
    item.source_point_ids = apply_permutation(item.source_point_ids, perm);
    for (auto& idx : item.gold_order) idx = new_slot[idx];
    return item;
}

}  // namespace tceforge
