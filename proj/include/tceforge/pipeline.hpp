#pragma once

#include "tceforge/config.hpp"

namespace tceforge {

// One function per CLI command. Each reads its declared inputs from the
// config's work_dir, writes its outputs there, and is re-runnable: identical
// inputs and seed produce byte-identical artifacts. Fatal problems raise
// tceforge::Error; the CLI turns those into exit status 1.
void run_ingest(const PipelineConfig& config);
void run_stats(const PipelineConfig& config);
void run_extract_outline(const PipelineConfig& config);
void run_generate_qa(const PipelineConfig& config);
void run_verify_qa(const PipelineConfig& config);
void run_dedup_qa(const PipelineConfig& config);
void run_build_index(const PipelineConfig& config);
void run_retriever_eval(const PipelineConfig& config);
void run_evaluate(const PipelineConfig& config);
void run_analyze(const PipelineConfig& config);

// ingest .. dedup-qa + build-index in order; used by tests and `run-all`.
void run_full_pipeline(const PipelineConfig& config);

}  // namespace tceforge
