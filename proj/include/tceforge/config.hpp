#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace tceforge {

// Flat key-value configuration: `dotted.key = value` lines, `#` comments.
// Environment variables prefixed TCEFORGE_ override file values (separators
// are ignored when matching, so TCEFORGE_GATEWAY_BACKEND hits
// gateway.backend). Secrets are env-only and never read from files.
class ConfigTree {
public:
    static ConfigTree from_file(const std::filesystem::path& path);
    static ConfigTree from_text(std::string_view text);

    void apply_env_overrides(const char* prefix = "TCEFORGE_");

    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    void set(const std::string& key, std::string value);
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;

    std::filesystem::path input_articles;
    std::filesystem::path work_dir = "out";
    std::string prompt_dir;

    // gateway
    std::string gateway_backend = "mock";  // mock | http
    std::string model_id = "default";
    std::string base_url;
    int max_output_tokens = 256;
    int retry_max_attempts = 4;
    int gateway_concurrency = 4;
    int requests_per_minute = 0;
    bool trace = false;

    // similarity
    std::string scorer_backend = "offline";  // offline | http
    std::string scorer_base_url;
    double duplicate_threshold = 0.8;
    double noise_threshold = 0.2;

    // corpus
    int min_span_days = 5;
    int max_span_days = 30;
    std::array<double, 3> split_ratios{0.70, 0.15, 0.15};

    // verification
    int voting_rounds = 3;
    int majority_threshold = 2;

    // retrieval
    int retrieve_count = 3;
    int chunk_size = 512;

    // evaluation
    std::string eval_mode = "rag";
    std::string retriever = "sparse";
    std::string strategy = "one_by_one";
    std::string task = "detail";
    int context_token_limit = 16384;
    double gold_position = -1.0;  // < 0 disables relocation

    static PipelineConfig from_tree(const ConfigTree& tree);

    // Artifact locations under work_dir.
    std::filesystem::path corpus_path() const { return work_dir / "corpus.jsonl"; }
    std::filesystem::path splits_path() const { return work_dir / "splits.csv"; }
    std::filesystem::path outline_path() const { return work_dir / "outline.jsonl"; }
    std::filesystem::path qa_path(const std::string& task_name,
                                  const std::string& stage) const {
        return work_dir / ("qa_" + task_name + "." + stage + ".jsonl");
    }
    std::filesystem::path generation_log_path() const {
        return work_dir / "generation_log.jsonl";
    }
    std::filesystem::path verification_path() const {
        return work_dir / "verification.jsonl";
    }
    std::filesystem::path chunks_path() const { return work_dir / "chunks.jsonl"; }
    std::filesystem::path retrieval_logs_path(const std::string& tag) const {
        return work_dir / ("retrieval_logs." + tag + ".jsonl");
    }
    std::filesystem::path retriever_scores_path() const {
        return work_dir / "retriever_scores.csv";
    }
    std::filesystem::path records_path(const std::string& task_name) const {
        return work_dir / ("records." + task_name + ".jsonl");
    }
    std::filesystem::path scores_path(const std::string& task_name) const {
        return work_dir / ("scores." + task_name + ".csv");
    }
    std::filesystem::path trace_path() const { return work_dir / "gateway_trace.jsonl"; }
};

}  // namespace tceforge
