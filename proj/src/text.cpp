#include "tceforge/text.hpp"

#include <algorithm>
#include <cctype>

namespace tceforge::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), lower);
    return out;
}

std::string_view trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t b = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > b) out.emplace_back(s.substr(b, i - b));
    }
    return out;
}

std::vector<std::string> lowercase_words(std::string_view s) {
    auto out = split_whitespace(s);
    for (auto& w : out) w = to_lower(w);
    return out;
}

std::vector<std::string> alnum_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_alnum(c)) {
            cur.push_back(lower(c));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> metric_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (auto& w : split_whitespace(s)) {
        std::size_t b = 0, e = w.size();
        while (b < e && !is_alnum(w[b])) ++b;
        while (e > b && !is_alnum(w[e - 1])) --e;
        if (e > b) out.push_back(to_lower(std::string_view(w).substr(b, e - b)));
    }
    return out;
}

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '.' || c == '!' || c == '?') &&
            (i + 1 == s.size() || is_space(s[i + 1]))) {
            auto piece = trim(s.substr(start, i + 1 - start));
            if (!piece.empty()) out.emplace_back(piece);
            start = i + 1;
        }
    }
    auto tail = trim(s.substr(start));
    if (!tail.empty()) out.emplace_back(tail);
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : trim(s)) {
        if (is_space(c)) {
            pending_space = true;
        } else {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

std::size_t word_count(std::string_view s) {
    std::size_t n = 0, i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        if (i < s.size()) ++n;
        while (i < s.size() && !is_space(s[i])) ++i;
    }
    return n;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool contains_word_ci(std::string_view s, std::string_view word) {
    const std::string needle = to_lower(word);
    const std::string hay = to_lower(s);
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !is_alnum(hay[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end == hay.size() || !is_alnum(hay[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

}  // namespace tceforge::text
