#include "tceforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tceforge/errors.hpp"
#include "tceforge/text.hpp"

namespace tceforge::metrics {

namespace {

template <typename Seq>
int levenshtein_impl(const Seq& a, const Seq& b) {
    const std::size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    std::iota(prev.begin(), prev.end(), 0);
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

using Counts = std::map<std::vector<std::string_view>, int>;

Counts ngram_counts(std::span<const std::string> tokens, std::size_t n) {
    Counts counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string_view> gram;
        gram.reserve(n);
        for (std::size_t k = 0; k < n; ++k) gram.emplace_back(tokens[i + k]);
        counts[std::move(gram)]++;
    }
    return counts;
}

}  // namespace

int levenshtein(std::span<const int> a, std::span<const int> b) {
    return levenshtein_impl(a, b);
}

int levenshtein(std::string_view a, std::string_view b) {
    return levenshtein_impl(a, b);
}

double sentence_bleu4(std::span<const std::string> hypothesis,
                      std::span<const std::string> reference) {
    if (hypothesis.empty()) return 0.0;

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto hyp = ngram_counts(hypothesis, n);
        const auto ref = ngram_counts(reference, n);
        long total = 0, matched = 0;
        for (const auto& [gram, count] : hyp) {
            total += count;
            auto it = ref.find(gram);
            if (it != ref.end()) matched += std::min(count, it->second);
        }
        double p;
        if (n == 1) {
            if (matched == 0) return 0.0;
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else {
            p = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
        }
        log_sum += 0.25 * std::log(p);
    }

    const double h = static_cast<double>(hypothesis.size());
    const double r = static_cast<double>(reference.size());
    const double bp = h >= r ? 1.0 : std::exp(1.0 - r / h);
    return bp * std::exp(log_sum);
}

double sentence_bleu4(std::string_view hypothesis, std::string_view reference) {
    return sentence_bleu4(text::metric_tokens(hypothesis), text::metric_tokens(reference));
}

// ---------------------------------------------------------------------------
// Porter stemmer
// ---------------------------------------------------------------------------

namespace {

bool is_consonant(const std::string& w, std::size_t i) {
    switch (w[i]) {
        case 'a': case 'e': case 'i': case 'o': case 'u':
            return false;
        case 'y':
            return i == 0 || !is_consonant(w, i - 1);
        default:
            return true;
    }
}

// The measure m: count of VC sequences in [C](VC)^m[V].
int measure(const std::string& w) {
    int m = 0;
    std::size_t i = 0;
    const std::size_t n = w.size();
    while (i < n && is_consonant(w, i)) ++i;
    while (i < n) {
        while (i < n && !is_consonant(w, i)) ++i;
        if (i >= n) break;
        ++m;
        while (i < n && is_consonant(w, i)) ++i;
    }
    return m;
}

bool has_vowel(const std::string& w) {
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!is_consonant(w, i)) return true;
    return false;
}

bool double_consonant(const std::string& w) {
    const std::size_t n = w.size();
    return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

// *o: stem ends cvc where the final consonant is not w, x or y.
bool ends_cvc(const std::string& w) {
    const std::size_t n = w.size();
    if (n < 3) return false;
    return is_consonant(w, n - 3) && !is_consonant(w, n - 2) && is_consonant(w, n - 1) &&
           w[n - 1] != 'w' && w[n - 1] != 'x' && w[n - 1] != 'y';
}

bool ends_with(const std::string& w, std::string_view s) {
    return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0;
}

std::string chop(const std::string& w, std::size_t n) { return w.substr(0, w.size() - n); }

struct SuffixRule {
    std::string_view suffix;
    std::string_view replacement;
};

// Applies the longest matching suffix rule whose stem passes min_measure.
// Returns true when a suffix matched (even if the condition blocked the
// rewrite), mirroring the original algorithm's per-step exclusivity.
bool apply_rules(std::string& w, std::span<const SuffixRule> rules, int min_measure) {
    const SuffixRule* best = nullptr;
    for (const auto& r : rules)
        if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size()))
            best = &r;
    if (!best) return false;
    std::string stem = chop(w, best->suffix.size());
    if (measure(stem) > min_measure) w = stem + std::string(best->replacement);
    return true;
}

}  // namespace

std::string porter_stem(std::string w) {
    if (w.size() <= 2) return w;

    // Step 1a
    if (ends_with(w, "sses")) w = chop(w, 2);
    else if (ends_with(w, "ies")) w = chop(w, 2);
    else if (!ends_with(w, "ss") && ends_with(w, "s")) w = chop(w, 1);

    // Step 1b
    bool cleanup = false;
    if (ends_with(w, "eed")) {
        if (measure(chop(w, 3)) > 0) w = chop(w, 1);
    } else if (ends_with(w, "ed") && has_vowel(chop(w, 2))) {
        w = chop(w, 2);
        cleanup = true;
    } else if (ends_with(w, "ing") && has_vowel(chop(w, 3))) {
        w = chop(w, 3);
        cleanup = true;
    }
    if (cleanup) {
        if (ends_with(w, "at") || ends_with(w, "bl") || ends_with(w, "iz")) {
            w += 'e';
        } else if (double_consonant(w) && !ends_with(w, "l") && !ends_with(w, "s") &&
                   !ends_with(w, "z")) {
            w = chop(w, 1);
        } else if (measure(w) == 1 && ends_cvc(w)) {
            w += 'e';
        }
    }

    // Step 1c
    if (ends_with(w, "y") && has_vowel(chop(w, 1))) w.back() = 'i';

    // Step 2
    static constexpr SuffixRule step2[] = {
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"}, {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},   {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    };
    apply_rules(w, step2, 0);

    // Step 3
    static constexpr SuffixRule step3[] = {
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    };
    apply_rules(w, step3, 0);

    // Step 4
    static constexpr SuffixRule step4[] = {
        {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},  {"ic", ""},
        {"able", ""}, {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
        {"ent", ""}, {"ou", ""},   {"ism", ""},  {"ate", ""}, {"iti", ""},
        {"ous", ""}, {"ive", ""},  {"ize", ""},
    };
    {
        // "ion" is valid only after s or t; handle it alongside the table so
        // longest-match still wins (e.g. "...sion"/"...tion").
        const SuffixRule* best = nullptr;
        for (const auto& r : step4)
            if (ends_with(w, r.suffix) && (!best || r.suffix.size() > best->suffix.size()))
                best = &r;
        bool ion = ends_with(w, "ion") && w.size() >= 4 &&
                   (w[w.size() - 4] == 's' || w[w.size() - 4] == 't');
        if (ion && (!best || best->suffix.size() < 3)) {
            std::string stem = chop(w, 3);
            if (measure(stem) > 1) w = std::move(stem);
        } else if (best) {
            std::string stem = chop(w, best->suffix.size());
            if (measure(stem) > 1) w = std::move(stem);
        }
    }

    // Step 5a
    if (ends_with(w, "e")) {
        std::string stem = chop(w, 1);
        const int m = measure(stem);
        if (m > 1 || (m == 1 && !ends_cvc(stem))) w = std::move(stem);
    }
    // Step 5b
    if (measure(w) > 1 && double_consonant(w) && ends_with(w, "l")) w = chop(w, 1);

    return w;
}

// ---------------------------------------------------------------------------
// METEOR
// ---------------------------------------------------------------------------

double meteor(std::span<const std::string> hypothesis,
              std::span<const std::string> reference) {
    if (hypothesis.empty() || reference.empty()) return 0.0;

    const std::size_t h = hypothesis.size(), r = reference.size();
    std::vector<int> hyp_match(h, -1);  // hyp index -> ref index
    std::vector<bool> ref_used(r, false);

    // Stage 1: exact matches, greedy left to right.
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < r; ++j)
            if (!ref_used[j] && hypothesis[i] == reference[j]) {
                hyp_match[i] = static_cast<int>(j);
                ref_used[j] = true;
                break;
            }

    // Stage 2: stem matches over the leftovers.
    std::vector<std::string> hyp_stem(h), ref_stem(r);
    for (std::size_t i = 0; i < h; ++i) hyp_stem[i] = porter_stem(hypothesis[i]);
    for (std::size_t j = 0; j < r; ++j) ref_stem[j] = porter_stem(reference[j]);
    for (std::size_t i = 0; i < h; ++i) {
        if (hyp_match[i] >= 0) continue;
        for (std::size_t j = 0; j < r; ++j)
            if (!ref_used[j] && hyp_stem[i] == ref_stem[j]) {
                hyp_match[i] = static_cast<int>(j);
                ref_used[j] = true;
                break;
            }
    }

    int m = 0;
    for (std::size_t i = 0; i < h; ++i)
        if (hyp_match[i] >= 0) ++m;
    if (m == 0) return 0.0;

    const double precision = static_cast<double>(m) / static_cast<double>(h);
    const double recall = static_cast<double>(m) / static_cast<double>(r);
    const double fmean = 10.0 * precision * recall / (recall + 9.0 * precision);

    // Chunks: maximal runs of matches adjacent in both strings.
    int chunks = 0;
    int prev_ref = -2;
    for (std::size_t i = 0; i < h; ++i) {
        if (hyp_match[i] < 0) {
            prev_ref = -2;
            continue;
        }
        if (hyp_match[i] != prev_ref + 1) ++chunks;
        prev_ref = hyp_match[i];
    }

    const double frag = static_cast<double>(chunks) / static_cast<double>(m);
    const double penalty = 0.5 * frag * frag * frag;
    return fmean * (1.0 - penalty);
}

double meteor(std::string_view hypothesis, std::string_view reference) {
    return meteor(text::metric_tokens(hypothesis), text::metric_tokens(reference));
}

double weighted_f1_positions(const std::vector<std::vector<int>>& predicted,
                             const std::vector<std::vector<int>>& gold) {
    if (gold.empty()) throw PreconditionError("weighted_f1_positions: empty gold set");
    if (predicted.size() != gold.size())
        throw PreconditionError("weighted_f1_positions: size mismatch");
    const std::size_t positions = gold.front().size();

    double position_sum = 0.0;
    for (std::size_t p = 0; p < positions; ++p) {
        std::map<int, int> tp, fp, fn, support;
        for (std::size_t i = 0; i < gold.size(); ++i) {
            const int truth = gold[i][p];
            const int pred = predicted[i].empty() ? -1 : predicted[i][p];
            support[truth]++;
            if (pred == truth) {
                tp[truth]++;
            } else {
                fn[truth]++;
                if (pred >= 0) fp[pred]++;
            }
        }
        double weighted = 0.0;
        for (const auto& [cls, sup] : support) {
            const double prec_den = tp[cls] + fp[cls];
            const double rec_den = tp[cls] + fn[cls];
            const double prec = prec_den > 0 ? tp[cls] / prec_den : 0.0;
            const double rec = rec_den > 0 ? tp[cls] / rec_den : 0.0;
            const double f1 = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
            weighted += f1 * sup / static_cast<double>(gold.size());
        }
        position_sum += weighted;
    }
    return position_sum / static_cast<double>(positions);
}

}  // namespace tceforge::metrics
