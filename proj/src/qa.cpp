#include "tceforge/qa.hpp"

#include <algorithm>
#include <set>

#include "tceforge/errors.hpp"
#include "tceforge/jsonl.hpp"
#include "tceforge/qa_generation.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

void check(bool ok, const std::string& item_id, const char* what) {
    if (!ok) throw FormatError("qa item " + item_id + ": " + what);
}

void validate_mcq_common(const std::string& id, const std::string& question,
                         const std::vector<std::string>& choices, int gold_index) {
    check(!text::trim(question).empty(), id, "empty question");
    check(choices.size() == 4, id, "expected 4 choices");
    check(gold_index >= 0 && gold_index < 4, id, "gold index out of range");
    std::set<std::string> seen;
    for (const auto& c : choices) {
        check(!text::trim(c).empty(), id, "empty choice");
        check(seen.insert(text::normalize_whitespace(c)).second, id,
              "choices are not pairwise distinct");
    }
}

}  // namespace

std::string OrderQA::gold_order_letters() const {
    std::string out;
    for (std::size_t k = 0; k < gold_order.size(); ++k) {
        if (k) out += ',';
        out += choice_label(gold_order[k]);
    }
    return out;
}

void validate(const DetailQA& item) {
    validate_mcq_common(item.id, item.question, item.choices, item.gold_index);
    check(!item.gold_article_id.empty(), item.id, "missing gold article id");
}

void validate(const ForecastQA& item) {
    validate_mcq_common(item.id, item.question, item.choices, item.gold_index);
    check(!item.gold_article_id.empty(), item.id, "missing gold article id");
    check(item.gold_day == item.question_deadline, item.id,
          "gold day must equal the question deadline");

    bool has_prefix = false;
    for (auto p : forecast_question_prefixes())
        has_prefix = has_prefix || text::starts_with(item.question, p);
    check(has_prefix, item.id, "question does not start with an allowed prefix");

    const std::string deadline = item.question_deadline.to_string();
    auto q = text::trim(item.question);
    if (!q.empty() && q.back() == '?') q.remove_suffix(1);
    q = text::trim(q);
    check(q.size() >= deadline.size() && q.substr(q.size() - deadline.size()) == deadline,
          item.id, "question does not end with the deadline time element");
    check(!text::contains_word_ci(item.question, "before"), item.id,
          "question uses 'before'");
}

void validate(const OrderQA& item) {
    check(item.choices.size() == 3, item.id, "expected 3 choices");
    check(item.gold_order.size() == 3, item.id, "expected a 3-element gold order");
    check(item.gold_days.size() == 3, item.id, "expected 3 gold days");
    check(item.source_point_ids.size() == 3, item.id, "expected 3 source point ids");

    std::set<std::string> seen;
    for (const auto& c : item.choices) {
        check(!text::trim(c).empty(), item.id, "empty choice");
        check(seen.insert(text::normalize_whitespace(c)).second, item.id,
              "choices are not pairwise distinct");
    }

    std::set<int> order(item.gold_order.begin(), item.gold_order.end());
    check(order == std::set<int>{0, 1, 2}, item.id, "gold order is not a permutation");
    check(item.gold_days[item.gold_order[0]] < item.gold_days[item.gold_order[1]] &&
              item.gold_days[item.gold_order[1]] < item.gold_days[item.gold_order[2]],
          item.id, "gold days are not strictly ascending under the gold order");

    check(!item.linking_entity.empty(), item.id, "missing linking entity");
    for (const auto& c : item.choices)
        check(extract_entities(c).count(item.linking_entity) > 0, item.id,
              "a choice does not mention the linking entity");
}

namespace {

jsonl::json mcq_to_json(const std::string& task, const std::string& id,
                        const std::string& tce_id, const std::string& question,
                        const std::vector<std::string>& choices, int gold_index,
                        const std::string& gold_article_id, Date gold_day,
                        const std::string& source_key_point_id) {
    return {{"id", id},
            {"task", task},
            {"tce_id", tce_id},
            {"question", question},
            {"choices", choices},
            {"answer", std::string(1, choice_label(gold_index))},
            {"gold_article_id", gold_article_id},
            {"gold_date", gold_day.to_string()},
            {"source_key_point_id", source_key_point_id}};
}

int gold_index_from_letter(const std::string& letter, std::size_t line) {
    if (letter.size() != 1 || letter[0] < 'a' || letter[0] > 'd')
        throw ParseError("bad answer letter at line " + std::to_string(line));
    return letter[0] - 'a';
}

}  // namespace

void save_qa(std::span<const DetailQA> items, const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& q : items)
        out.write(mcq_to_json("detail", q.id, q.tce_id, q.question, q.choices, q.gold_index,
                              q.gold_article_id, q.gold_day, q.source_key_point_id));
}

void save_qa(std::span<const ForecastQA> items, const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& q : items) {
        auto rec = mcq_to_json("forecast", q.id, q.tce_id, q.question, q.choices,
                               q.gold_index, q.gold_article_id, q.gold_day,
                               q.source_key_point_id);
        rec["question_deadline"] = q.question_deadline.to_string();
        out.write(rec);
    }
}

void save_qa(std::span<const OrderQA> items, const std::filesystem::path& path) {
    jsonl::Writer out(path);
    for (const auto& q : items) {
        std::vector<std::string> dates;
        for (auto d : q.gold_days) dates.push_back(d.to_string());
        out.write({{"id", q.id},
                   {"task", "order"},
                   {"tce_id", q.tce_id},
                   {"choices", q.choices},
                   {"gold_order", q.gold_order_letters()},
                   {"gold_dates", dates},
                   {"linking_entity", q.linking_entity},
                   {"source_point_ids", q.source_point_ids}});
    }
}

std::vector<DetailQA> load_detail_qa(const std::filesystem::path& path) {
    std::vector<DetailQA> out;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        DetailQA q;
        q.id = jsonl::require_string(rec, "id", line);
        q.tce_id = jsonl::require_string(rec, "tce_id", line);
        q.question = jsonl::require_string(rec, "question", line);
        q.choices = rec.at("choices").get<std::vector<std::string>>();
        q.gold_index = gold_index_from_letter(jsonl::require_string(rec, "answer", line), line);
        q.gold_article_id = jsonl::require_string(rec, "gold_article_id", line);
        q.gold_day = Date::parse(jsonl::require_string(rec, "gold_date", line));
        q.source_key_point_id = rec.value("source_key_point_id", std::string{});
        out.push_back(std::move(q));
    });
    return out;
}

std::vector<ForecastQA> load_forecast_qa(const std::filesystem::path& path) {
    std::vector<ForecastQA> out;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        ForecastQA q;
        q.id = jsonl::require_string(rec, "id", line);
        q.tce_id = jsonl::require_string(rec, "tce_id", line);
        q.question = jsonl::require_string(rec, "question", line);
        q.choices = rec.at("choices").get<std::vector<std::string>>();
        q.gold_index = gold_index_from_letter(jsonl::require_string(rec, "answer", line), line);
        q.gold_article_id = jsonl::require_string(rec, "gold_article_id", line);
        q.gold_day = Date::parse(jsonl::require_string(rec, "gold_date", line));
        q.question_deadline =
            Date::parse(jsonl::require_string(rec, "question_deadline", line));
        q.source_key_point_id = rec.value("source_key_point_id", std::string{});
        out.push_back(std::move(q));
    });
    return out;
}

std::vector<OrderQA> load_order_qa(const std::filesystem::path& path) {
    std::vector<OrderQA> out;
    jsonl::for_each_record(path, [&](std::size_t line, const jsonl::json& rec) {
        OrderQA q;
        q.id = jsonl::require_string(rec, "id", line);
        q.tce_id = jsonl::require_string(rec, "tce_id", line);
        q.choices = rec.at("choices").get<std::vector<std::string>>();
        const std::string letters = jsonl::require_string(rec, "gold_order", line);
        for (char c : letters) {
            if (c == ',' || c == ' ') continue;
            if (c < 'a' || c > 'c')
                throw ParseError("bad gold_order letter at line " + std::to_string(line));
            q.gold_order.push_back(c - 'a');
        }
        for (const auto& d : rec.at("gold_dates"))
            q.gold_days.push_back(Date::parse(d.get<std::string>()));
        q.linking_entity = rec.value("linking_entity", std::string{});
        q.source_point_ids =
            rec.value("source_point_ids", std::vector<std::string>{});
        out.push_back(std::move(q));
    });
    return out;
}

}  // namespace tceforge
