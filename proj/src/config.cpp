#include "tceforge/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tceforge/errors.hpp"
#include "tceforge/text.hpp"

extern char** environ;

namespace tceforge {

namespace {

// Separator-free lowercase form used to match env names to dotted keys.
std::string normalize_key(std::string_view key) {
    std::string out;
    for (char c : key) {
        if (c == '.' || c == '_' || c == '-') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

// Every key PipelineConfig understands; env overrides resolve against this.
constexpr const char* kKnownKeys[] = {
    "seed", "jobs", "paths.input", "paths.work_dir", "prompts.dir",
    "gateway.backend", "gateway.model_id", "gateway.base_url",
    "gateway.max_output_tokens", "gateway.retry_max_attempts", "gateway.concurrency",
    "gateway.requests_per_minute", "gateway.trace",
    "similarity.backend", "similarity.base_url", "similarity.duplicate_threshold",
    "similarity.noise_threshold",
    "corpus.min_span_days", "corpus.max_span_days", "corpus.split_train",
    "corpus.split_dev", "corpus.split_test",
    "verify.rounds", "verify.majority_threshold",
    "retrieval.u", "retrieval.chunk_size",
    "eval.mode", "eval.retriever", "eval.strategy", "eval.task",
    "eval.context_token_limit", "eval.gold_position",
};

}  // namespace

ConfigTree ConfigTree::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

ConfigTree ConfigTree::from_text(std::string_view content) {
    ConfigTree tree;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= content.size()) {
        const std::size_t end = content.find('\n', start);
        const auto raw = content.substr(
            start, end == std::string_view::npos ? content.size() - start : end - start);
        ++line_no;
        const auto line = text::trim(raw);
        if (!line.empty() && line[0] != '#') {
            const std::size_t eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  " is not 'key = value'");
            const auto key = text::trim(line.substr(0, eq));
            const auto value = text::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  " has an empty key");
            tree.entries_[std::string(key)] = std::string(value);
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return tree;
}

void ConfigTree::apply_env_overrides(const char* prefix) {
    const std::string pfx(prefix);
    for (char** env = environ; env && *env; ++env) {
        const std::string_view entry(*env);
        if (!text::starts_with(entry, pfx)) continue;
        const std::size_t eq = entry.find('=');
        if (eq == std::string_view::npos) continue;
        const auto name = entry.substr(pfx.size(), eq - pfx.size());
        const auto value = entry.substr(eq + 1);
        // API keys and other secrets stay in the environment.
        if (name == "API_KEY" || name == "BASE_URL") continue;

        const std::string wanted = normalize_key(name);
        for (const char* key : kKnownKeys) {
            if (normalize_key(key) == wanted) {
                entries_[key] = std::string(value);
                break;
            }
        }
    }
}

std::optional<std::string> ConfigTree::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string ConfigTree::get_or(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double ConfigTree::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (...) {
        throw ConfigError("config key '" + key + "' is not a number: " + *v);
    }
}

std::int64_t ConfigTree::get_int(const std::string& key, std::int64_t fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stoll(*v);
    } catch (...) {
        throw ConfigError("config key '" + key + "' is not an integer: " + *v);
    }
}

bool ConfigTree::get_bool(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: " + *v);
}

void ConfigTree::set(const std::string& key, std::string value) {
    entries_[key] = std::move(value);
}

PipelineConfig PipelineConfig::from_tree(const ConfigTree& tree) {
    PipelineConfig c;
    if (auto seed = tree.get("seed")) {
        c.seed = static_cast<std::uint64_t>(std::stoull(*seed));
        c.seed_set = true;
    }
    c.jobs = static_cast<int>(tree.get_int("jobs", c.jobs));

    c.input_articles = tree.get_or("paths.input", "");
    c.work_dir = tree.get_or("paths.work_dir", c.work_dir.string());
    c.prompt_dir = tree.get_or("prompts.dir", "");

    c.gateway_backend = tree.get_or("gateway.backend", c.gateway_backend);
    c.model_id = tree.get_or("gateway.model_id", c.model_id);
    c.base_url = tree.get_or("gateway.base_url", "");
    c.max_output_tokens =
        static_cast<int>(tree.get_int("gateway.max_output_tokens", c.max_output_tokens));
    c.retry_max_attempts =
        static_cast<int>(tree.get_int("gateway.retry_max_attempts", c.retry_max_attempts));
    c.gateway_concurrency =
        static_cast<int>(tree.get_int("gateway.concurrency", c.gateway_concurrency));
    c.requests_per_minute =
        static_cast<int>(tree.get_int("gateway.requests_per_minute", c.requests_per_minute));
    c.trace = tree.get_bool("gateway.trace", c.trace);

    c.scorer_backend = tree.get_or("similarity.backend", c.scorer_backend);
    c.scorer_base_url = tree.get_or("similarity.base_url", "");
    c.duplicate_threshold =
        tree.get_double("similarity.duplicate_threshold", c.duplicate_threshold);
    c.noise_threshold = tree.get_double("similarity.noise_threshold", c.noise_threshold);

    c.min_span_days = static_cast<int>(tree.get_int("corpus.min_span_days", c.min_span_days));
    c.max_span_days = static_cast<int>(tree.get_int("corpus.max_span_days", c.max_span_days));
    c.split_ratios[0] = tree.get_double("corpus.split_train", c.split_ratios[0]);
    c.split_ratios[1] = tree.get_double("corpus.split_dev", c.split_ratios[1]);
    c.split_ratios[2] = tree.get_double("corpus.split_test", c.split_ratios[2]);

    c.voting_rounds = static_cast<int>(tree.get_int("verify.rounds", c.voting_rounds));
    c.majority_threshold =
        static_cast<int>(tree.get_int("verify.majority_threshold", c.majority_threshold));

    c.retrieve_count = static_cast<int>(tree.get_int("retrieval.u", c.retrieve_count));
    c.chunk_size = static_cast<int>(tree.get_int("retrieval.chunk_size", c.chunk_size));

    c.eval_mode = tree.get_or("eval.mode", c.eval_mode);
    c.retriever = tree.get_or("eval.retriever", c.retriever);
    c.strategy = tree.get_or("eval.strategy", c.strategy);
    c.task = tree.get_or("eval.task", c.task);
    c.context_token_limit =
        static_cast<int>(tree.get_int("eval.context_token_limit", c.context_token_limit));
    c.gold_position = tree.get_double("eval.gold_position", c.gold_position);
    return c;
}

}  // namespace tceforge
