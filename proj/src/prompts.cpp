#include "tceforge/prompts.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "tceforge/errors.hpp"
#include "tceforge/prompts_data.hpp"

namespace tceforge {

namespace {

constexpr std::array<std::string_view, 13> kTemplateNames = {
    "summarize_article", "summarize_day",    "extract_key_points", "gen_detail_qa",
    "gen_forecast_qa",   "gen_distractors",  "verify_evidence",    "verify_forecasting",
    "verify_story_temporal", "eval_detail",  "eval_order",         "eval_forecast_mcq",
    "eval_forecast_open",
};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

std::string_view to_string(TemplateId id) {
    return kTemplateNames[static_cast<std::size_t>(id)];
}

std::optional<TemplateId> template_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kTemplateNames.size(); ++i)
        if (kTemplateNames[i] == name) return static_cast<TemplateId>(i);
    return std::nullopt;
}

std::string render_template_text(std::string_view body, const Bindings& bindings) {
    std::string out;
    out.reserve(body.size());
    std::size_t i = 0;
    while (i < body.size()) {
        const char c = body[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        // Scan an {identifier} placeholder; anything else is literal text.
        std::size_t j = i + 1;
        while (j < body.size() && is_ident_char(body[j])) ++j;
        if (j > i + 1 && j < body.size() && body[j] == '}') {
            const std::string name(body.substr(i + 1, j - i - 1));
            auto it = bindings.find(name);
            if (it == bindings.end())
                throw PreconditionError("unbound placeholder: " + name);
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

std::string TemplateStore::body(TemplateId id) const {
    const std::string_view name = to_string(id);
    if (override_dir_) {
        const auto path = *override_dir_ / (std::string(name) + ".txt");
        std::ifstream in(path);
        if (in) {
            std::ostringstream ss;
            ss << in.rdbuf();
            std::string text = ss.str();
            while (!text.empty() && text.back() == '\n') text.pop_back();
            return text;
        }
    }
    for (const auto& [asset_name, body] : detail::kPromptAssets) {
        if (asset_name == name) {
            std::string text(body);
            while (!text.empty() && text.back() == '\n') text.pop_back();
            return text;
        }
    }
    throw ConfigError("no prompt template asset for '" + std::string(name) + "'");
}

std::string TemplateStore::render(TemplateId id, const Bindings& bindings) const {
    return render_template_text(body(id), bindings);
}

std::string render_prompt(TemplateId id, const Bindings& bindings) {
    return TemplateStore{}.render(id, bindings);
}

}  // namespace tceforge
