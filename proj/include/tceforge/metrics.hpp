#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tceforge::metrics {

// Edit distance with unit insert/delete/substitute costs.
int levenshtein(std::span<const int> a, std::span<const int> b);
int levenshtein(std::string_view a, std::string_view b);

// Sentence-level BLEU-4 in [0, 1]: geometric mean of 1..4-gram precisions
// with add-one smoothing on the n >= 2 precisions and the brevity penalty.
// Zero unigram overlap (or an empty hypothesis) scores 0.
double sentence_bleu4(std::span<const std::string> hypothesis,
                      std::span<const std::string> reference);
double sentence_bleu4(std::string_view hypothesis, std::string_view reference);

// Porter (1980) stemmer over a lowercase word.
std::string porter_stem(std::string word);

// Unigram METEOR in [0, 1]: two-stage alignment (exact, then Porter stems),
// harmonic mean with recall weighted 9:1, and the fragmentation penalty
// 0.5 * (chunks / matches)^3. Synonym matching is intentionally absent.
double meteor(std::span<const std::string> hypothesis,
              std::span<const std::string> reference);
double meteor(std::string_view hypothesis, std::string_view reference);

// Weighted F1 over position classes for fixed-length order predictions:
// position p is a classification problem whose true class is the choice the
// gold order puts at p. Per position, class F1 scores are weighted by class
// support; positions are then averaged. An empty prediction row counts as a
// never-correct placeholder class.
double weighted_f1_positions(const std::vector<std::vector<int>>& predicted,
                             const std::vector<std::vector<int>>& gold);

}  // namespace tceforge::metrics
