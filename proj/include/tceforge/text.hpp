#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tceforge::text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

// Whitespace-delimited tokens, verbatim.
std::vector<std::string> split_whitespace(std::string_view s);

// Whitespace tokens, lowercased. Used for word-difference and Jaccard
// duplicate scoring, which the dedup rules define over lowercase
// whitespace tokens.
std::vector<std::string> lowercase_words(std::string_view s);

// Maximal alphanumeric runs, lowercased. Used by the sparse index and the
// offline term-frequency embedder so that punctuation does not fragment
// match statistics.
std::vector<std::string> alnum_tokens(std::string_view s);

// Lowercase whitespace tokens with non-alphanumeric edges stripped; empty
// tokens dropped. Shared by the BLEU and METEOR scorers.
std::vector<std::string> metric_tokens(std::string_view s);

// Splits on sentence-final punctuation (. ! ?) followed by whitespace.
// Returned pieces are trimmed substrings of the input in order; their
// whitespace-normalized concatenation equals the normalized input.
std::vector<std::string> split_sentences(std::string_view s);

// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view s);

std::size_t word_count(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);

// True when `word` occurs as a standalone lowercase-compared word.
bool contains_word_ci(std::string_view s, std::string_view word);

}  // namespace tceforge::text
