#include "tceforge/pipeline_mock.hpp"

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "tceforge/rng.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

bool has(std::string_view prompt, std::string_view marker) {
    return prompt.find(marker) != std::string_view::npos;
}

std::string section(std::string_view prompt, std::string_view from, std::string_view to,
                    bool last_from = false) {
    const std::size_t at = last_from ? prompt.rfind(from) : prompt.find(from);
    if (at == std::string_view::npos) return {};
    const std::size_t begin = at + from.size();
    std::size_t end = prompt.find(to, begin);
    if (end == std::string_view::npos) end = prompt.size();
    return std::string(text::trim(prompt.substr(begin, end - begin)));
}

std::string first_words(std::string_view s, std::size_t n) {
    const auto words = text::split_whitespace(s);
    std::string out;
    for (std::size_t i = 0; i < std::min(n, words.size()); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    // Drop trailing punctuation so the phrase composes into new sentences.
    while (!out.empty() && (out.back() == '.' || out.back() == ',')) out.pop_back();
    return out;
}

std::string join_leading_sentences(std::string_view body, std::size_t n) {
    const auto sentences = text::split_sentences(body);
    std::string out;
    for (std::size_t i = 0; i < std::min(n, sentences.size()); ++i) {
        if (i) out += ' ';
        out += sentences[i];
    }
    return out;
}

// Answer phrase: the key point's first six words. Distractors keep the
// leading two words (typically the entity) and swap the tail, which keeps
// them inside the plausibility rules yet clearly non-duplicate.
std::string answer_phrase(std::string_view point) { return first_words(point, 6); }

std::string distractor(std::string_view answer, int which) {
    static constexpr std::string_view kTails[] = {
        "rejected the border accord outright",
        "postponed the regional summit indefinitely",
        "denied the funding request entirely",
    };
    std::string head = first_words(answer, 2);
    if (head.empty()) head = "Officials";
    return head + " " + std::string(kTails[which]);
}

std::string summarize_article_reply(std::string_view prompt) {
    const auto article = section(prompt, "[Article:]", "[Output:]");
    return join_leading_sentences(article, 2);
}

std::string summarize_day_reply(std::string_view prompt) {
    const auto block = section(prompt, "[Summaries:]", "[Output:]");
    // "Summary k:" prefixes separate the inputs; strip them and merge.
    std::string merged;
    std::size_t start = 0;
    const std::string_view view(block);
    while (start < view.size()) {
        std::size_t end = view.find('\n', start);
        if (end == std::string_view::npos) end = view.size();
        auto line = text::trim(view.substr(start, end - start));
        if (text::starts_with(line, "Summary ")) {
            const std::size_t colon = line.find(':');
            if (colon != std::string_view::npos) line = text::trim(line.substr(colon + 1));
        }
        if (!line.empty()) {
            if (!merged.empty()) merged += ' ';
            merged += line;
        }
        start = end + 1;
    }
    return merged;
}

std::string key_points_reply(std::string_view prompt) {
    const auto summary = section(prompt, "Article: ", "\n[Output:]", /*last_from=*/true);
    std::string out;
    for (const auto& sentence : text::split_sentences(summary)) {
        out += "* " + sentence + "\n";
    }
    return out.empty() ? "* \n" : out;
}

std::string detail_qa_reply(std::string_view prompt) {
    const auto point = section(prompt, "key point \"", "\"");
    std::string topic = first_words(point, 5);
    if (topic.empty()) topic = "the reported development";
    return "Question: What did reports say about " + topic +
           "? Answer: " + answer_phrase(point) + ".";
}

std::string forecast_qa_reply(std::string_view prompt) {
    const auto point = section(prompt, "key point \"", "\"");
    const auto day = section(prompt, "Today is ", ".");
    std::string topic = first_words(point, 4);
    if (topic.empty()) topic = "the situation";
    return "Question: What will follow " + topic + " after " + day +
           "? Answer: " + answer_phrase(point) + ".";
}

std::string distractors_reply(std::string_view prompt) {
    const auto answer = section(prompt, "whose correct answer is \"", "\"");
    return "(b) " + distractor(answer, 0) + "\n(c) " + distractor(answer, 1) + "\n(d) " +
           distractor(answer, 2) + "\n";
}

std::string mcq_eval_reply(std::string_view prompt) {
    const char letter = static_cast<char>('A' + fnv1a(prompt) % 4);
    return std::string(1, letter) + ".";
}

}  // namespace

std::unique_ptr<MockBackend> make_pipeline_mock() {
    auto backend = std::make_unique<MockBackend>();
    backend->set_fallback([](const GenerationRequest& request) -> std::string {
        const std::string_view prompt = request.prompt;

        if (has(prompt, "expert news editor in distilling"))
            return summarize_article_reply(prompt);
        if (has(prompt, "expert news editor in merging"))
            return summarize_day_reply(prompt);
        if (has(prompt, "expert in extracting key contents"))
            return key_points_reply(prompt);
        if (has(prompt, "please generate one question along with its answer"))
            return detail_qa_reply(prompt);
        if (has(prompt, "Please generate one forecasting question"))
            return forecast_qa_reply(prompt);
        if (has(prompt, "please generate three noising answers"))
            return distractors_reply(prompt);
        if (has(prompt, "check if the answer is correct to the question"))
            return "The given answer is correct. The article states it directly.";
        if (has(prompt, "Please verify the question."))
            return "Q1: A. Q2: B";
        if (has(prompt, "Below are key points presenting a storyline"))
            return "Q1: A. Q2: A";
        if (has(prompt, "expert in ordering several sentences"))
            return "a,b,c.";
        if (has(prompt, "expert in answering multiple choice questions"))
            return mcq_eval_reply(prompt);
        if (has(prompt, "most likely to be the correct answer"))
            return mcq_eval_reply(prompt);
        if (has(prompt, "please answer the forecasting question below"))
            return "The announced plan will proceed as reported.";

        return "OK.";
    });
    return backend;
}

}  // namespace tceforge
