#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace tceforge {

enum class TemplateId {
    summarize_article,
    summarize_day,
    extract_key_points,
    gen_detail_qa,
    gen_forecast_qa,
    gen_distractors,
    verify_evidence,
    verify_forecasting,
    verify_story_temporal,
    eval_detail,
    eval_order,
    eval_forecast_mcq,
    eval_forecast_open,
};

std::string_view to_string(TemplateId id);
std::optional<TemplateId> template_from_string(std::string_view name);

using Bindings = std::map<std::string, std::string>;

// Pure `{name}` substitution. Throws PreconditionError naming the first
// placeholder without a binding; the output never contains a residual
// `{identifier}` marker.
std::string render_template_text(std::string_view body, const Bindings& bindings);

// Prompt bodies ship as text assets compiled into the library; a directory
// of `<template_id>.txt` files can override any of them.
class TemplateStore {
public:
    TemplateStore() = default;
    explicit TemplateStore(std::filesystem::path override_dir)
        : override_dir_(std::move(override_dir)) {}

    std::string body(TemplateId id) const;
    std::string render(TemplateId id, const Bindings& bindings) const;

private:
    std::optional<std::filesystem::path> override_dir_;
};

std::string render_prompt(TemplateId id, const Bindings& bindings);

}  // namespace tceforge
