#pragma once

#include <cmath>
#include <memory>
#include <string_view>

#include "tceforge/text.hpp"

namespace tceforge {

// Token accounting interface. Context budgets, chunk sizes and length
// buckets all go through this so a model tokenizer can be swapped in.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual int count_tokens(std::string_view text) const = 0;
};

// Default heuristic: tokens = ceil(words * 4/3).
class HeuristicTokenizer final : public Tokenizer {
public:
    int count_tokens(std::string_view text) const override {
        const auto words = text::word_count(text);
        return static_cast<int>((words * 4 + 2) / 3);
    }
};

}  // namespace tceforge
