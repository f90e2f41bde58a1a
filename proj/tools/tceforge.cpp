// tceforge: outline extraction, QA synthesis and evaluation over temporal
// complex event corpora. Commands hand artifacts to each other as files
// under the work directory; every command is re-runnable and deterministic
// for a fixed seed.

#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tceforge/config.hpp"
#include "tceforge/errors.hpp"
#include "tceforge/pipeline.hpp"

namespace {

struct CliOverrides {
    std::string config_path;
    std::string seed;
    std::string jobs;
    std::string workdir;
    std::string input;
    std::string mode;
    std::string retriever;
    std::string strategy;
    std::string task;
    std::string limit_tokens;
    std::string gold_position;
};

tceforge::PipelineConfig build_config(const CliOverrides& cli) {
    tceforge::ConfigTree tree;
    if (!cli.config_path.empty())
        tree = tceforge::ConfigTree::from_file(cli.config_path);
    tree.apply_env_overrides();

    auto maybe_set = [&](const char* key, const std::string& value) {
        if (!value.empty()) tree.set(key, value);
    };
    maybe_set("seed", cli.seed);
    maybe_set("jobs", cli.jobs);
    maybe_set("paths.work_dir", cli.workdir);
    maybe_set("paths.input", cli.input);
    maybe_set("eval.mode", cli.mode);
    maybe_set("eval.retriever", cli.retriever);
    maybe_set("eval.strategy", cli.strategy);
    maybe_set("eval.task", cli.task);
    maybe_set("eval.context_token_limit", cli.limit_tokens);
    maybe_set("eval.gold_position", cli.gold_position);

    return tceforge::PipelineConfig::from_tree(tree);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tceforge: timeline QA benchmark construction and evaluation"};
    app.require_subcommand(1);

    CliOverrides cli;
    app.add_option("--config", cli.config_path, "Config file (key = value lines)");
    app.add_option("--seed", cli.seed, "Run seed (mandatory unless set in the config)");
    app.add_option("--jobs", cli.jobs, "Worker cap for parallel stages");
    app.add_option("--workdir", cli.workdir, "Artifact directory (default: out)");
    app.add_option("--input", cli.input, "Article JSONL for `ingest`");
    app.add_option("--mode", cli.mode, "Evaluation mode: no_context | rag | long_context");
    app.add_option("--retriever", cli.retriever, "Retriever kind: sparse | dense | hybrid");
    app.add_option("--strategy", cli.strategy, "Order retrieval: once | one_by_one");
    app.add_option("--task", cli.task,
                   "QA task: detail | order | forecast | forecast_open");
    app.add_option("--limit-tokens", cli.limit_tokens, "Long-context token budget");
    app.add_option("--gold-position", cli.gold_position,
                   "Relocate gold articles to this relative position in [0,1]");

    using Runner = void (*)(const tceforge::PipelineConfig&);
    struct Command {
        const char* name;
        const char* help;
        Runner runner;
    };
    const Command commands[] = {
        {"ingest", "Load, filter and split an article corpus", tceforge::run_ingest},
        {"stats", "Corpus and QA statistics tables", tceforge::run_stats},
        {"extract-outline", "Summarize and extract key points", tceforge::run_extract_outline},
        {"generate-qa", "Draft QA items with the evidence gate", tceforge::run_generate_qa},
        {"verify-qa", "Aspect checks and voting", tceforge::run_verify_qa},
        {"dedup-qa", "Drop redundant QA items", tceforge::run_dedup_qa},
        {"build-index", "Chunk accessible articles into the chunk store",
         tceforge::run_build_index},
        {"retriever-eval", "Retriever diagnostics (Acc_Doc/Acc_Date/Acc_Dates)",
         tceforge::run_retriever_eval},
        {"evaluate", "Answer QA items and score them", tceforge::run_evaluate},
        {"analyze", "Length buckets and choice distribution from records",
         tceforge::run_analyze},
        {"run-all", "ingest through build-index in one go", tceforge::run_full_pipeline},
    };

    Runner selected = nullptr;
    for (const auto& command : commands) {
        CLI::App* sub = app.add_subcommand(command.name, command.help);
        sub->fallthrough();
        sub->callback([&selected, runner = command.runner] { selected = runner; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        selected(build_config(cli));
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", e.what()}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}
