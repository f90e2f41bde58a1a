#pragma once

#include <memory>

#include "tceforge/gateway.hpp"

namespace tceforge {

// Scripted offline responder covering every pipeline template. Responses
// are pure functions of the rendered prompt (content is lifted back out of
// it), so full pipeline runs are bit-reproducible. Summaries echo leading
// sentences, key points bullet the summary sentences, QA drafts and
// distractors are synthesized from the bound key point, and all
// verification rounds pass.
std::unique_ptr<MockBackend> make_pipeline_mock();

}  // namespace tceforge
