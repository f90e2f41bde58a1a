#include "tceforge/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "tceforge/corpus.hpp"
#include "tceforge/errors.hpp"
#include "tceforge/evaluation.hpp"
#include "tceforge/gateway.hpp"
#include "tceforge/jsonl.hpp"
#include "tceforge/metrics.hpp"
#include "tceforge/outline.hpp"
#include "tceforge/pipeline_mock.hpp"
#include "tceforge/prompts.hpp"
#include "tceforge/qa.hpp"
#include "tceforge/qa_generation.hpp"
#include "tceforge/qa_verification.hpp"
#include "tceforge/retrieval.hpp"
#include "tceforge/rng.hpp"
#include "tceforge/similarity.hpp"
#include "tceforge/text.hpp"

namespace tceforge {

namespace {

// ---------------------------------------------------------------------------
// Shared wiring
// ---------------------------------------------------------------------------

struct Runtime {
    PipelineConfig config;
    std::shared_ptr<TextBackend> backend;
    std::unique_ptr<Gateway> gateway;
    std::unique_ptr<SimilarityScorer> scorer;
    TemplateStore templates;
    HeuristicTokenizer tokenizer;
    DedupConfig dedup;
    std::ofstream trace_stream;
};

Runtime make_runtime(const PipelineConfig& config, bool needs_gateway) {
    Runtime rt;
    rt.config = config;
    std::filesystem::create_directories(config.work_dir);

    if (!config.prompt_dir.empty()) rt.templates = TemplateStore(config.prompt_dir);

    rt.dedup.duplicate_threshold = config.duplicate_threshold;
    rt.dedup.noise_threshold = config.noise_threshold;
    if (!rt.dedup.valid())
        throw ConfigError("similarity thresholds must satisfy 0 <= noise < duplicate <= 1");

    if (config.scorer_backend == "offline") {
        rt.scorer = std::make_unique<OfflineScorer>();
    } else if (config.scorer_backend == "http") {
        ScoringHttpProfile profile;
        profile.base_url = config.scorer_base_url;
        rt.scorer = std::make_unique<HttpScorer>(profile);
    } else {
        throw ConfigError("unknown similarity backend: " + config.scorer_backend);
    }

    if (needs_gateway) {
        if (config.gateway_backend == "mock") {
            rt.backend = make_pipeline_mock();
        } else if (config.gateway_backend == "http") {
            HttpProfile profile;
            profile.base_url = config.base_url;
            rt.backend = std::make_shared<HttpBackend>(profile);
        } else {
            throw ConfigError("unknown gateway backend: " + config.gateway_backend);
        }
        RetryPolicy retry;
        retry.max_attempts = config.retry_max_attempts;
        GatewayLimits limits;
        limits.max_concurrency = config.gateway_concurrency;
        limits.requests_per_minute = config.requests_per_minute;
        rt.gateway = std::make_unique<Gateway>(rt.backend, retry, limits);
        if (config.trace) {
            rt.trace_stream.open(config.trace_path());
            rt.gateway->set_trace(&rt.trace_stream);
        }
    }
    return rt;
}

void require_seed(const PipelineConfig& config) {
    if (!config.seed_set)
        throw ConfigError("a seed is mandatory; pass --seed or set `seed` in the config");
}

Corpus load_required_corpus(const PipelineConfig& config) {
    const auto path = config.corpus_path();
    if (!std::filesystem::exists(path))
        throw ConfigError("corpus file missing: " + path.string() + " (run `ingest` first)");
    return load_corpus(path);
}

// Runs fn(i) for i in [0, n) across `jobs` workers; exceptions propagate.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::string>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << header << '\n';
    for (const auto& row : rows) out << row << '\n';
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

// Latest existing stage of a QA family: final > verified > raw.
std::filesystem::path qa_stage_path(const PipelineConfig& config,
                                    const std::string& family) {
    for (const char* stage : {"final", "verified", "raw"}) {
        auto path = config.qa_path(family, stage);
        if (std::filesystem::exists(path)) return path;
    }
    throw ConfigError("no qa_" + family + " file under " + config.work_dir.string() +
                      " (run `generate-qa` first)");
}

std::string article_piece_text(const Article& a) {
    if (text::trim(a.title).empty()) return a.body;
    return a.title + "\n" + a.body;
}

// ---------------------------------------------------------------------------
// ingest / stats
// ---------------------------------------------------------------------------

void do_ingest(const PipelineConfig& config) {
    require_seed(config);
    if (config.input_articles.empty())
        throw ConfigError("ingest requires --input (or paths.input in the config)");
    std::filesystem::create_directories(config.work_dir);

    Corpus raw = load_corpus(config.input_articles);
    for (const auto& w : raw.warnings) std::cerr << "warning: " << w << '\n';

    Corpus kept = filter_tces(raw, config.min_span_days, config.max_span_days);
    save_corpus(kept, config.corpus_path());

    const auto split = split_corpus(kept, config.split_ratios, config.seed);
    std::vector<std::string> rows;
    for (const auto& tce : kept.tces) {
        const char* bucket = split.train.count(tce.id) ? "train"
                             : split.dev.count(tce.id) ? "dev"
                                                       : "test";
        rows.push_back(tce.id + "," + bucket);
    }
    write_csv(config.splits_path(), "tce_id,split", rows);

    std::cout << "ingested " << kept.tces.size() << " of " << raw.tces.size()
              << " tces (" << kept.article_count() << " articles) -> "
              << config.corpus_path().string() << '\n';
}

QaStatsInput collect_qa_stats_input(const PipelineConfig& config) {
    QaStatsInput qa;
    auto try_family = [&](const std::string& family) {
        for (const char* stage : {"final", "verified", "raw"}) {
            const auto path = config.qa_path(family, stage);
            if (!std::filesystem::exists(path)) continue;
            if (family == "order") {
                for (const auto& item : load_order_qa(path)) {
                    std::vector<Date> days;
                    for (int idx : item.gold_order) days.push_back(item.gold_days[idx]);
                    qa.order_gold_days.push_back(std::move(days));
                }
            } else if (family == "detail") {
                for (const auto& item : load_detail_qa(path))
                    qa.questions.push_back(item.question);
            } else {
                for (const auto& item : load_forecast_qa(path))
                    qa.questions.push_back(item.question);
            }
            return;
        }
    };
    try_family("detail");
    try_family("forecast");
    try_family("order");
    return qa;
}

void do_stats(const PipelineConfig& config) {
    Runtime rt = make_runtime(config, /*needs_gateway=*/false);
    const Corpus corpus = load_required_corpus(config);
    const QaStatsInput qa = collect_qa_stats_input(config);
    const StatsReport report =
        corpus_stats(corpus, rt.tokenizer, qa.questions.empty() && qa.order_gold_days.empty()
                                               ? nullptr
                                               : &qa);

    std::vector<std::string> rows;
    rows.push_back("tce_count," + std::to_string(report.tce_count));
    rows.push_back("avg_articles," + fmt(report.avg_articles));
    rows.push_back("avg_days," + fmt(report.avg_days));
    rows.push_back("avg_choice_day_gap," + fmt(report.avg_choice_day_gap));
    write_csv(config.work_dir / "stats_summary.csv", "metric,value", rows);

    rows.clear();
    for (const auto& [gap, count] : report.day_gap_histogram)
        rows.push_back(std::to_string(gap) + "," + std::to_string(count));
    write_csv(config.work_dir / "stats_day_gap.csv", "span_days,count", rows);

    rows.clear();
    for (const auto& [bucket, count] : report.token_histogram)
        rows.push_back(std::to_string(bucket) + "," + std::to_string(count));
    write_csv(config.work_dir / "stats_tokens.csv", "bucket_start,count", rows);

    rows.clear();
    for (const auto& [prefix, ratio] : report.question_prefix_distribution) {
        std::string quoted = prefix;
        for (auto& c : quoted)
            if (c == ',') c = ' ';
        rows.push_back(quoted + "," + fmt(ratio));
    }
    write_csv(config.work_dir / "stats_question_prefix.csv", "prefix,ratio", rows);

    std::cout << "stats over " << report.tce_count << " tces -> "
              << (config.work_dir / "stats_summary.csv").string() << '\n';
}

// ---------------------------------------------------------------------------
// extract-outline
// ---------------------------------------------------------------------------

void do_extract_outline(const PipelineConfig& config) {
    require_seed(config);
    Runtime rt = make_runtime(config, /*needs_gateway=*/true);
    const Corpus corpus = load_required_corpus(config);

    OutlineExtractorConfig ocfg;
    ocfg.model_id = config.model_id;
    ocfg.max_summary_tokens = config.max_output_tokens;
    ocfg.max_points_tokens = std::max(config.max_output_tokens, 512);

    std::vector<Outline> outlines(corpus.tces.size());
    std::vector<std::vector<std::string>> warnings(corpus.tces.size());
    parallel_for(corpus.tces.size(), config.jobs, [&](std::size_t i) {
        OutlineExtractor extractor(*rt.gateway, rt.templates, *rt.scorer, rt.dedup, ocfg);
        outlines[i] = extractor.extract(corpus.tces[i]);
        warnings[i] = extractor.warnings();
    });

    for (const auto& batch : warnings)
        for (const auto& w : batch) std::cerr << "warning: " << w << '\n';

    save_outlines(outlines, config.outline_path());
    std::size_t points = 0;
    for (const auto& o : outlines) points += o.points.size();
    std::cout << "extracted " << points << " key points across " << outlines.size()
              << " tces -> " << config.outline_path().string() << '\n';
}

// ---------------------------------------------------------------------------
// generate-qa
// ---------------------------------------------------------------------------

struct GenerationOutput {
    std::vector<DetailQA> detail;
    std::vector<ForecastQA> forecast;
    std::vector<OrderQA> order;
    std::vector<jsonl::json> log;
};

const Article* pick_gold_article(const TemporalComplexEvent& tce, const KeyPoint& point,
                                 SimilarityScorer& scorer) {
    const auto candidates = tce.articles_on(point.day);
    if (candidates.empty()) return nullptr;
    if (candidates.size() == 1) return candidates.front();

    std::vector<std::string> texts{point.text};
    for (const auto* a : candidates) texts.push_back(a->body);
    const auto vectors = scorer.embed(texts);

    const Article* best = candidates.front();
    double best_score = -2.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double score = cosine(vectors[0], vectors[i + 1]);
        if (score > best_score ||
            (score == best_score && candidates[i]->id < best->id)) {
            best = candidates[i];
            best_score = score;
        }
    }
    return best;
}

const Article* pick_other_article(const TemporalComplexEvent& tce, Date gold_day,
                                  std::uint64_t seed) {
    std::vector<const Article*> candidates;
    for (const Article* a : tce.accessible_articles())
        if (a->day != gold_day) candidates.push_back(a);
    if (candidates.empty()) return nullptr;
    SeededRng rng(seed);
    return candidates[rng.below(candidates.size())];
}

GenerationOutput generate_for_tce(Runtime& rt, const TemporalComplexEvent& tce,
                                  const Outline& outline) {
    GenerationOutput out;
    const PipelineConfig& config = rt.config;
    QaGeneratorConfig gcfg;
    gcfg.model_id = config.model_id;
    gcfg.max_output_tokens = config.max_output_tokens;
    QaGenerator generator(*rt.gateway, rt.templates, gcfg);

    VerifierConfig vcfg;
    vcfg.model_id = config.model_id;
    vcfg.rounds = config.voting_rounds;
    vcfg.majority_threshold = config.majority_threshold;
    Verifier verifier(*rt.gateway, rt.templates, *rt.scorer, rt.dedup, vcfg);

    const Date last_day = tce.last_day();

    auto log_skip = [&](const std::string& id, const std::string& stage,
                        const std::string& reason) {
        out.log.push_back({{"item", id}, {"stage", stage}, {"skipped", reason}});
    };
    auto log_verdict = [&](const std::string& id, const Verdict& v) {
        out.log.push_back({{"item", id},
                           {"aspect", std::string(to_string(v.aspect))},
                           {"votes", std::string(v.rounds.begin(), v.rounds.end())},
                           {"passed", v.passed}});
    };

    for (const auto& point : outline.points) {
        const bool is_forecast = point.day == last_day;
        const std::string item_id =
            point.id() + (is_forecast ? ":forecast" : ":detail");
        const Article* gold = pick_gold_article(tce, point, *rt.scorer);
        if (!gold) {
            log_skip(item_id, "gold", "no article on the key point's day");
            continue;
        }

        try {
            const QaDraft draft =
                is_forecast ? generator.generate_forecast_qa(point, *gold, last_day)
                            : generator.generate_detail_qa(point, *gold);

            // Evidence gate: generation for this key point stops on failure.
            const Verdict evidence = verifier.verify_evidence(draft, *gold);
            log_verdict(item_id, evidence);
            if (!evidence.passed) continue;

            const Article* other =
                pick_other_article(tce, gold->day, derive_seed(config.seed, item_id + ":other"));
            if (!other) {
                log_skip(item_id, "distractors", "no article on another day");
                continue;
            }
            const auto distractors = generator.generate_distractors(draft, *gold, *other);

            if (is_forecast) {
                ForecastQA item;
                item.id = item_id;
                item.tce_id = tce.id;
                item.question = draft.question;
                item.choices = {draft.answer, distractors[0], distractors[1], distractors[2]};
                item.gold_index = 0;
                item.gold_article_id = gold->id;
                item.gold_day = last_day;
                item.question_deadline = last_day;
                item.source_key_point_id = point.id();
                item = shuffle_choices(std::move(item), derive_seed(config.seed, item_id));
                validate(item);
                out.forecast.push_back(std::move(item));
            } else {
                DetailQA item;
                item.id = item_id;
                item.tce_id = tce.id;
                item.question = draft.question;
                item.choices = {draft.answer, distractors[0], distractors[1], distractors[2]};
                item.gold_index = 0;
                item.gold_article_id = gold->id;
                item.gold_day = gold->day;
                item.source_key_point_id = point.id();
                item = shuffle_choices(std::move(item), derive_seed(config.seed, item_id));
                validate(item);
                out.detail.push_back(std::move(item));
            }
        } catch (const FormatError& e) {
            log_skip(item_id, "format", e.what());
        } catch (const RefusalError& e) {
            log_skip(item_id, "refusal", e.what());
        }
    }

    // Ordering problems come from the accessible days only: choices about
    // the held-out last day would not be answerable from the visible
    // articles.
    Outline accessible;
    accessible.tce_id = outline.tce_id;
    for (const auto& p : outline.points)
        if (p.day < last_day) accessible.points.push_back(p);
    for (auto& item : build_order_problems(accessible, config.seed)) {
        try {
            validate(item);
            out.order.push_back(std::move(item));
        } catch (const FormatError& e) {
            log_skip(item.id, "order-validate", e.what());
        }
    }
    return out;
}

void do_generate_qa(const PipelineConfig& config) {
    require_seed(config);
    Runtime rt = make_runtime(config, /*needs_gateway=*/true);
    const Corpus corpus = load_required_corpus(config);
    const auto outlines = load_outlines(config.outline_path());

    std::vector<GenerationOutput> outputs(outlines.size());
    parallel_for(outlines.size(), config.jobs, [&](std::size_t i) {
        const auto* tce = corpus.find(outlines[i].tce_id);
        if (!tce) throw ConfigError("outline references unknown tce " + outlines[i].tce_id);
        outputs[i] = generate_for_tce(rt, *tce, outlines[i]);
    });

    std::vector<DetailQA> detail;
    std::vector<ForecastQA> forecast;
    std::vector<OrderQA> order;
    jsonl::Writer log(config.generation_log_path());
    for (auto& o : outputs) {
        std::move(o.detail.begin(), o.detail.end(), std::back_inserter(detail));
        std::move(o.forecast.begin(), o.forecast.end(), std::back_inserter(forecast));
        std::move(o.order.begin(), o.order.end(), std::back_inserter(order));
        for (const auto& line : o.log) log.write(line);
    }

    save_qa(std::span<const DetailQA>(detail), config.qa_path("detail", "raw"));
    save_qa(std::span<const ForecastQA>(forecast), config.qa_path("forecast", "raw"));
    save_qa(std::span<const OrderQA>(order), config.qa_path("order", "raw"));
    std::cout << "generated " << detail.size() << " detail, " << forecast.size()
              << " forecast, " << order.size() << " order items\n";
}

// ---------------------------------------------------------------------------
// verify-qa / dedup-qa
// ---------------------------------------------------------------------------

void do_verify_qa(const PipelineConfig& config) {
    require_seed(config);
    Runtime rt = make_runtime(config, /*needs_gateway=*/true);

    VerifierConfig vcfg;
    vcfg.model_id = config.model_id;
    vcfg.rounds = config.voting_rounds;
    vcfg.majority_threshold = config.majority_threshold;

    auto detail = load_detail_qa(config.qa_path("detail", "raw"));
    auto forecast = load_forecast_qa(config.qa_path("forecast", "raw"));
    auto order = load_order_qa(config.qa_path("order", "raw"));

    std::vector<std::vector<jsonl::json>> ledger_detail(detail.size()),
        ledger_forecast(forecast.size()), ledger_order(order.size());
    std::vector<char> keep_detail(detail.size(), 0), keep_forecast(forecast.size(), 0),
        keep_order(order.size(), 0);

    auto verdict_line = [](const std::string& id, const Verdict& v) -> jsonl::json {
        return {{"item", id},
                {"aspect", std::string(to_string(v.aspect))},
                {"votes", std::string(v.rounds.begin(), v.rounds.end())},
                {"passed", v.passed}};
    };

    parallel_for(detail.size(), config.jobs, [&](std::size_t i) {
        Verifier verifier(*rt.gateway, rt.templates, *rt.scorer, rt.dedup, vcfg);
        const Verdict plausible =
            verifier.verify_plausible(detail[i].choices, detail[i].gold_index);
        ledger_detail[i].push_back(verdict_line(detail[i].id, plausible));
        keep_detail[i] = plausible.passed;
    });

    parallel_for(forecast.size(), config.jobs, [&](std::size_t i) {
        Verifier verifier(*rt.gateway, rt.templates, *rt.scorer, rt.dedup, vcfg);
        const Verdict plausible =
            verifier.verify_plausible(forecast[i].choices, forecast[i].gold_index);
        ledger_forecast[i].push_back(verdict_line(forecast[i].id, plausible));
        bool keep = plausible.passed;
        if (keep) {
            const Verdict voted = verifier.verify_forecasting(forecast[i]);
            ledger_forecast[i].push_back(verdict_line(forecast[i].id, voted));
            keep = voted.passed;
        }
        keep_forecast[i] = keep;
    });

    parallel_for(order.size(), config.jobs, [&](std::size_t i) {
        Verifier verifier(*rt.gateway, rt.templates, *rt.scorer, rt.dedup, vcfg);
        const auto [story, temporal] = verifier.verify_order_aspects(order[i]);
        ledger_order[i].push_back(verdict_line(order[i].id, story));
        ledger_order[i].push_back(verdict_line(order[i].id, temporal));
        keep_order[i] = story.passed && temporal.passed;
    });

    jsonl::Writer ledger(config.verification_path());
    std::vector<DetailQA> detail_out;
    std::vector<ForecastQA> forecast_out;
    std::vector<OrderQA> order_out;
    for (std::size_t i = 0; i < detail.size(); ++i) {
        for (const auto& l : ledger_detail[i]) ledger.write(l);
        if (keep_detail[i]) detail_out.push_back(std::move(detail[i]));
    }
    for (std::size_t i = 0; i < forecast.size(); ++i) {
        for (const auto& l : ledger_forecast[i]) ledger.write(l);
        if (keep_forecast[i]) forecast_out.push_back(std::move(forecast[i]));
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (const auto& l : ledger_order[i]) ledger.write(l);
        if (keep_order[i]) order_out.push_back(std::move(order[i]));
    }

    save_qa(std::span<const DetailQA>(detail_out), config.qa_path("detail", "verified"));
    save_qa(std::span<const ForecastQA>(forecast_out),
            config.qa_path("forecast", "verified"));
    save_qa(std::span<const OrderQA>(order_out), config.qa_path("order", "verified"));
    std::cout << "verified: detail " << detail_out.size() << "/" << detail.size()
              << ", forecast " << forecast_out.size() << "/" << forecast.size()
              << ", order " << order_out.size() << "/" << order.size() << '\n';
}

void do_dedup_qa(const PipelineConfig& config) {
    Runtime rt = make_runtime(config, /*needs_gateway=*/false);

    auto detail = load_detail_qa(config.qa_path("detail", "verified"));
    auto forecast = load_forecast_qa(config.qa_path("forecast", "verified"));
    auto order = load_order_qa(config.qa_path("order", "verified"));
    const auto before = std::array<std::size_t, 3>{detail.size(), forecast.size(),
                                                   order.size()};

    auto detail_out = dedup_qa(std::move(detail), *rt.scorer, rt.dedup);
    auto forecast_out = dedup_qa(std::move(forecast), *rt.scorer, rt.dedup);
    auto order_out = dedup_qa(std::move(order));

    save_qa(std::span<const DetailQA>(detail_out), config.qa_path("detail", "final"));
    save_qa(std::span<const ForecastQA>(forecast_out), config.qa_path("forecast", "final"));
    save_qa(std::span<const OrderQA>(order_out), config.qa_path("order", "final"));
    std::cout << "dedup: detail " << before[0] << "->" << detail_out.size() << ", forecast "
              << before[1] << "->" << forecast_out.size() << ", order " << before[2] << "->"
              << order_out.size() << '\n';
}

// ---------------------------------------------------------------------------
// build-index / retriever-eval
// ---------------------------------------------------------------------------

void do_build_index(const PipelineConfig& config) {
    Runtime rt = make_runtime(config, /*needs_gateway=*/false);
    const Corpus corpus = load_required_corpus(config);

    std::vector<Chunk> chunks;
    for (const auto& tce : corpus.tces) {
        const auto accessible = tce.accessible_articles();
        auto tce_chunks = chunk_articles(std::span<const Article* const>(accessible),
                                         rt.tokenizer, config.chunk_size);
        std::move(tce_chunks.begin(), tce_chunks.end(), std::back_inserter(chunks));
    }
    save_chunks(chunks, config.chunk_size, config.chunks_path());
    std::cout << "chunked " << chunks.size() << " chunks -> "
              << config.chunks_path().string() << '\n';
}

// Per-TCE index cache; retrieval always happens within one TCE's articles.
class IndexCache {
public:
    IndexCache(std::vector<Chunk> chunks, IndexKind kind, SimilarityScorer* scorer)
        : kind_(kind), scorer_(scorer) {
        for (auto& c : chunks) by_tce_[c.tce_id].push_back(std::move(c));
    }

    const Index& for_tce(const std::string& tce_id) {
        std::lock_guard lock(mutex_);
        auto it = indexes_.find(tce_id);
        if (it == indexes_.end()) {
            auto chunks_it = by_tce_.find(tce_id);
            if (chunks_it == by_tce_.end())
                throw ConfigError("no chunks for tce " + tce_id + " (rebuild the index)");
            it = indexes_
                     .emplace(tce_id,
                              Index::build(chunks_it->second, kind_, scorer_))
                     .first;
        }
        return it->second;
    }

private:
    IndexKind kind_;
    SimilarityScorer* scorer_;
    std::map<std::string, std::vector<Chunk>> by_tce_;
    std::map<std::string, Index> indexes_;
    std::mutex mutex_;
};

IndexKind retriever_kind_or_throw(const std::string& name) {
    auto kind = index_kind_from_string(name);
    if (!kind) throw ConfigError("unknown retriever kind: " + name);
    return *kind;
}

RetrievalLog::Hit hit_from(const Index& index, const ScoredChunk& sc) {
    const Chunk& c = index.chunks()[sc.chunk_index];
    return {c.chunk_id, c.article_id, c.day, sc.score};
}

void do_retriever_eval(const PipelineConfig& config) {
    require_seed(config);
    Runtime rt = make_runtime(config, /*needs_gateway=*/false);

    const auto chunks = load_chunks(config.chunks_path());
    const IndexKind kind = retriever_kind_or_throw(config.retriever);
    IndexCache cache(chunks, kind, rt.scorer.get());

    const auto detail = load_detail_qa(qa_stage_path(config, "detail"));
    const auto order = load_order_qa(qa_stage_path(config, "order"));

    std::vector<std::string> score_rows;

    // Detail: gold article and gold day per question.
    {
        std::vector<RetrievalLog> logs(detail.size());
        parallel_for(detail.size(), config.jobs, [&](std::size_t i) {
            const Index& index = cache.for_tce(detail[i].tce_id);
            RetrievalLog log;
            log.question_id = detail[i].id;
            for (const auto& sc :
                 index.retrieve(detail[i].question, config.retrieve_count))
                log.retrieved.push_back(hit_from(index, sc));
            log.gold_article_ids = {detail[i].gold_article_id};
            log.gold_days = {detail[i].gold_day};
            logs[i] = std::move(log);
        });
        append_retrieval_logs(logs, config.retrieval_logs_path("detail"));
        if (!logs.empty()) {
            const auto scores = score_retrieval(logs, RetrievalTask::detail);
            score_rows.push_back("detail," + config.retriever + ",-,acc_doc," +
                                 fmt(scores.acc_doc));
            score_rows.push_back("detail," + config.retriever + ",-,acc_date," +
                                 fmt(scores.acc_date));
        }
    }

    // Order: both strategies, plus the date-ranking baseline for one-by-one.
    {
        std::vector<RetrievalLog> once_logs(order.size()), one_logs(order.size());
        std::vector<std::vector<std::pair<Date, double>>> choice_days(order.size());
        std::vector<std::vector<int>> gold_orders(order.size());
        parallel_for(order.size(), config.jobs, [&](std::size_t i) {
            const Index& index = cache.for_tce(order[i].tce_id);
            gold_orders[i] = order[i].gold_order;

            RetrievalLog once;
            once.question_id = order[i].id;
            for (const auto& sc :
                 retrieve_order_once(index, order[i].choices, config.retrieve_count))
                once.retrieved.push_back(hit_from(index, sc));
            for (int idx : order[i].gold_order)
                once.gold_days.push_back(order[i].gold_days[idx]);
            once_logs[i] = std::move(once);

            RetrievalLog one;
            one.question_id = order[i].id;
            const auto picks = retrieve_order_one_by_one(index, order[i].choices);
            for (const auto& pick : picks) {
                if (!pick.found) continue;
                const Chunk& c = index.chunks()[pick.chunk_index];
                one.retrieved.push_back({c.chunk_id, c.article_id, c.day, pick.score});
                choice_days[i].push_back({c.day, pick.score});
            }
            for (int idx : order[i].gold_order)
                one.gold_days.push_back(order[i].gold_days[idx]);
            one_logs[i] = std::move(one);
        });
        append_retrieval_logs(once_logs, config.retrieval_logs_path("order_once"));
        append_retrieval_logs(one_logs, config.retrieval_logs_path("order_one_by_one"));
        if (!order.empty()) {
            const auto once_scores = score_retrieval(once_logs, RetrievalTask::order);
            const auto one_scores = score_retrieval(one_logs, RetrievalTask::order);
            const auto by_date = acc_by_date(choice_days, gold_orders);
            score_rows.push_back("order," + config.retriever + ",once,acc_dates," +
                                 fmt(once_scores.acc_dates));
            score_rows.push_back("order," + config.retriever + ",one_by_one,acc_dates," +
                                 fmt(one_scores.acc_dates));
            score_rows.push_back("order," + config.retriever + ",one_by_one,acc_by_date," +
                                 fmt(by_date.accuracy));
        }
    }

    write_csv(config.retriever_scores_path(), "task,retriever,strategy,metric,value",
              score_rows);
    std::cout << "retriever scores -> " << config.retriever_scores_path().string() << '\n';
}

// ---------------------------------------------------------------------------
// evaluate / analyze
// ---------------------------------------------------------------------------

struct EvalContext {
    std::vector<ContextPiece> pieces;
    int tokens = 0;
};

EvalContext context_from_chunks(const Index& index, std::vector<ScoredChunk> scored,
                                const Tokenizer& tokenizer) {
    // Chronological presentation; retrieval order is a relevance artifact.
    std::sort(scored.begin(), scored.end(), [&](const ScoredChunk& a, const ScoredChunk& b) {
        const Chunk& ca = index.chunks()[a.chunk_index];
        const Chunk& cb = index.chunks()[b.chunk_index];
        if (ca.day != cb.day) return ca.day < cb.day;
        return ca.chunk_id < cb.chunk_id;
    });
    EvalContext ctx;
    for (const auto& sc : scored) {
        const Chunk& c = index.chunks()[sc.chunk_index];
        ctx.pieces.push_back({c.day, c.text});
        ctx.tokens += tokenizer.count_tokens(c.text);
    }
    return ctx;
}

EvalContext context_from_articles(const std::vector<const Article*>& articles,
                                  const Tokenizer& tokenizer) {
    EvalContext ctx;
    for (const Article* a : articles) {
        ctx.pieces.push_back({a->day, article_piece_text(*a)});
        ctx.tokens += tokenizer.count_tokens(a->title) + tokenizer.count_tokens(a->body);
    }
    return ctx;
}

void do_evaluate(const PipelineConfig& config) {
    require_seed(config);
    Runtime rt = make_runtime(config, /*needs_gateway=*/true);
    const Corpus corpus = load_required_corpus(config);

    const auto mode = eval_mode_from_string(config.eval_mode);
    if (!mode) throw ConfigError("unknown eval mode: " + config.eval_mode);
    const auto task = task_from_string(config.task);
    if (!task) throw ConfigError("unknown task: " + config.task);
    const auto strategy = order_strategy_from_string(config.strategy);
    if (!strategy) throw ConfigError("unknown order strategy: " + config.strategy);

    std::unique_ptr<IndexCache> cache;
    if (*mode == EvalMode::rag) {
        const auto chunks = load_chunks(config.chunks_path());
        cache = std::make_unique<IndexCache>(chunks, retriever_kind_or_throw(config.retriever),
                                             rt.scorer.get());
    }

    auto build_context = [&](const std::string& tce_id, TaskKind kind,
                             const std::string& question,
                             std::span<const std::string> choices,
                             std::span<const Date> gold_days) -> EvalContext {
        switch (*mode) {
            case EvalMode::no_context:
                return {};
            case EvalMode::rag: {
                const Index& index = cache->for_tce(tce_id);
                if (kind == TaskKind::order) {
                    if (*strategy == OrderStrategy::once)
                        return context_from_chunks(
                            index, retrieve_order_once(index, choices, config.retrieve_count),
                            rt.tokenizer);
                    std::vector<ScoredChunk> picks;
                    for (const auto& pick : retrieve_order_one_by_one(index, choices))
                        if (pick.found) picks.push_back({pick.chunk_index, pick.score});
                    return context_from_chunks(index, std::move(picks), rt.tokenizer);
                }
                return context_from_chunks(
                    index, index.retrieve(question, config.retrieve_count), rt.tokenizer);
            }
            case EvalMode::long_context: {
                const auto* tce = corpus.find(tce_id);
                if (!tce) throw ConfigError("qa item references unknown tce " + tce_id);
                auto truncation =
                    truncate_context(*tce, rt.tokenizer, config.context_token_limit, kind,
                                     gold_days, config.seed);
                auto kept = std::move(truncation.kept);
                if (config.gold_position >= 0.0)
                    kept = relocate_gold(std::move(kept), gold_days, config.gold_position);
                return context_from_articles(kept, rt.tokenizer);
            }
        }
        return {};
    };

    auto complete_answer = [&](const std::string& prompt) -> std::string {
        GenerationRequest req;
        req.prompt = prompt;
        req.max_output_tokens = 64;
        req.temperature = kJudgingTemperature;
        req.model_id = config.model_id;
        return rt.gateway->complete(req).text;
    };

    std::vector<EvalRecord> records;
    std::vector<std::string> score_rows;

    if (*task == TaskKind::detail || *task == TaskKind::forecast_mcq ||
        *task == TaskKind::forecast_open) {
        const bool is_detail = *task == TaskKind::detail;
        std::vector<DetailQA> detail_items;
        std::vector<ForecastQA> forecast_items;
        std::size_t n = 0;
        if (is_detail) {
            detail_items = load_detail_qa(qa_stage_path(config, "detail"));
            n = detail_items.size();
        } else {
            forecast_items = load_forecast_qa(qa_stage_path(config, "forecast"));
            n = forecast_items.size();
        }

        records.resize(n);
        parallel_for(n, config.jobs, [&](std::size_t i) {
            const std::string& tce_id =
                is_detail ? detail_items[i].tce_id : forecast_items[i].tce_id;
            const std::string& question =
                is_detail ? detail_items[i].question : forecast_items[i].question;
            const auto& choices =
                is_detail ? detail_items[i].choices : forecast_items[i].choices;
            const Date gold_day =
                is_detail ? detail_items[i].gold_day : forecast_items[i].gold_day;
            const int gold_index =
                is_detail ? detail_items[i].gold_index : forecast_items[i].gold_index;

            const Date gold_days[] = {gold_day};
            auto ctx = build_context(tce_id, *task, question, choices, gold_days);

            EvalRecord r;
            r.question_id = is_detail ? detail_items[i].id : forecast_items[i].id;
            r.task = *task;
            r.context_tokens = ctx.tokens;
            const auto prompt = build_eval_prompt(
                rt.templates, *task, ctx.pieces, question,
                *task == TaskKind::forecast_open ? std::span<const std::string>{}
                                                 : std::span<const std::string>(choices));
            r.raw_output = complete_answer(prompt);
            r.parsed = parse_answer(*task, r.raw_output, 4);
            if (*task == TaskKind::forecast_open) {
                r.reference_answer = choices[gold_index];
            } else {
                r.gold_index = gold_index;
                r.correct = r.parsed.kind == ParsedAnswer::Kind::letter &&
                            r.parsed.letter_index == gold_index;
            }
            records[i] = std::move(r);
        });

        if (*task == TaskKind::forecast_open) {
            const auto s = score_open(records);
            score_rows.push_back("bleu," + fmt(s.bleu));
            score_rows.push_back("meteor," + fmt(s.meteor));
        } else {
            const auto s = score_mcq(records);
            score_rows.push_back("accuracy," + fmt(s.accuracy));
            for (const auto& [letter, ratio] : s.letter_distribution)
                score_rows.push_back("selected_" + letter + "," + fmt(ratio));
        }
    } else {  // order
        const auto items = load_order_qa(qa_stage_path(config, "order"));
        records.resize(items.size());
        parallel_for(items.size(), config.jobs, [&](std::size_t i) {
            std::vector<Date> gold_days;
            for (int idx : items[i].gold_order) gold_days.push_back(items[i].gold_days[idx]);
            auto ctx = build_context(items[i].tce_id, TaskKind::order, {}, items[i].choices,
                                     gold_days);

            EvalRecord r;
            r.question_id = items[i].id;
            r.task = TaskKind::order;
            r.context_tokens = ctx.tokens;
            const auto prompt = build_eval_prompt(rt.templates, TaskKind::order, ctx.pieces,
                                                  {}, items[i].choices);
            r.raw_output = complete_answer(prompt);
            r.parsed = parse_answer(TaskKind::order, r.raw_output, 3);
            r.gold_order = items[i].gold_order;
            r.correct =
                r.parsed.kind == ParsedAnswer::Kind::order && r.parsed.order == r.gold_order;
            records[i] = std::move(r);
        });

        if (!records.empty()) {
            const auto s = score_order(records);
            score_rows.push_back("accuracy," + fmt(s.accuracy));
            score_rows.push_back("weighted_f1," + fmt(s.weighted_f1));
            score_rows.push_back("levenshtein," + fmt(s.mean_levenshtein));
        }
    }

    save_eval_records(records, config.records_path(config.task));
    write_csv(config.scores_path(config.task), "metric,value", score_rows);
    std::cout << "evaluated " << records.size() << " items -> "
              << config.scores_path(config.task).string() << '\n';
}

void do_analyze(const PipelineConfig& config) {
    const auto records = load_eval_records(config.records_path(config.task));
    if (records.empty()) throw ConfigError("no records for task " + config.task);

    std::vector<std::string> rows;
    for (const auto& b : bucket_by_length(records))
        rows.push_back(b.label + "," + std::to_string(b.count) + "," + fmt(b.accuracy));
    write_csv(config.work_dir / ("analysis_buckets." + config.task + ".csv"),
              "bucket,count,accuracy", rows);

    const auto task = task_from_string(config.task);
    if (task && (*task == TaskKind::detail || *task == TaskKind::forecast_mcq)) {
        const auto s = score_mcq(records);
        rows.clear();
        for (const auto& [letter, ratio] : s.letter_distribution)
            rows.push_back(letter + "," + fmt(ratio));
        write_csv(config.work_dir / ("analysis_letters." + config.task + ".csv"),
                  "letter,ratio", rows);
    }
    std::cout << "analysis -> "
              << (config.work_dir / ("analysis_buckets." + config.task + ".csv")).string()
              << '\n';
}

}  // namespace

void run_ingest(const PipelineConfig& config) { do_ingest(config); }
void run_stats(const PipelineConfig& config) { do_stats(config); }
void run_extract_outline(const PipelineConfig& config) { do_extract_outline(config); }
void run_generate_qa(const PipelineConfig& config) { do_generate_qa(config); }
void run_verify_qa(const PipelineConfig& config) { do_verify_qa(config); }
void run_dedup_qa(const PipelineConfig& config) { do_dedup_qa(config); }
void run_build_index(const PipelineConfig& config) { do_build_index(config); }
void run_retriever_eval(const PipelineConfig& config) { do_retriever_eval(config); }
void run_evaluate(const PipelineConfig& config) { do_evaluate(config); }
void run_analyze(const PipelineConfig& config) { do_analyze(config); }

void run_full_pipeline(const PipelineConfig& config) {
    run_ingest(config);
    run_stats(config);
    run_extract_outline(config);
    run_generate_qa(config);
    run_verify_qa(config);
    run_dedup_qa(config);
    run_build_index(config);
}

}  // namespace tceforge
