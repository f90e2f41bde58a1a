#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tceforge/date.hpp"

namespace tceforge {

inline char choice_label(int index) { return static_cast<char>('a' + index); }

// Four-choice reading-comprehension item. Choices are positional: index i
// carries label 'a'+i after shuffling.
struct DetailQA {
    std::string id;
    std::string tce_id;
    std::string question;
    std::vector<std::string> choices;  // size 4
    int gold_index = 0;
    std::string gold_article_id;
    Date gold_day;
    std::string source_key_point_id;

    char gold_label() const { return choice_label(gold_index); }
    bool operator==(const DetailQA&) const = default;
};

// Forecasting item: like DetailQA but anchored on the last TCE day, with the
// deadline date embedded in the question. Also answers the open-domain mode
// (choices hidden, gold choice text used as the reference answer).
struct ForecastQA {
    std::string id;
    std::string tce_id;
    std::string question;
    std::vector<std::string> choices;  // size 4
    int gold_index = 0;
    std::string gold_article_id;
    Date gold_day;  // always the last TCE day
    Date question_deadline;
    std::string source_key_point_id;

    char gold_label() const { return choice_label(gold_index); }
    bool operator==(const ForecastQA&) const = default;
};

// Three-choice chronological ordering problem built from key points linked
// by one entity.
struct OrderQA {
    std::string id;
    std::string tce_id;
    std::vector<std::string> choices;        // size 3, shuffled
    std::vector<int> gold_order;             // choice indexes in chronological order
    std::vector<Date> gold_days;             // aligned with choices
    std::string linking_entity;
    std::vector<std::string> source_point_ids;  // aligned with choices

    // e.g. gold_order {0,2,1} -> "a,c,b"
    std::string gold_order_letters() const;
    bool operator==(const OrderQA&) const = default;
};

// Type-invariant validation; throws FormatError describing the violation.
void validate(const DetailQA& item);
void validate(const ForecastQA& item);
void validate(const OrderQA& item);

// Line-delimited QA records. MCQ records carry question/choices/answer/
// gold_article_id/gold_date; order records carry choices/gold_order (letter
// sequence)/gold_dates.
void save_qa(std::span<const DetailQA> items, const std::filesystem::path& path);
void save_qa(std::span<const ForecastQA> items, const std::filesystem::path& path);
void save_qa(std::span<const OrderQA> items, const std::filesystem::path& path);
std::vector<DetailQA> load_detail_qa(const std::filesystem::path& path);
std::vector<ForecastQA> load_forecast_qa(const std::filesystem::path& path);
std::vector<OrderQA> load_order_qa(const std::filesystem::path& path);

}  // namespace tceforge
