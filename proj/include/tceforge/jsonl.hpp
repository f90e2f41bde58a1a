#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "tceforge/errors.hpp"

namespace tceforge::jsonl {

using nlohmann::json;

// Calls `fn(line_number, object)` for every non-blank line. Line numbers are
// 1-based; parse failures report them.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const json&)>& fn);

// Line-delimited writer. Objects are emitted compact, keys sorted (nlohmann
// objects iterate in key order), one per line.
class Writer {
public:
    explicit Writer(const std::filesystem::path& path);

    void write(const json& record);
    std::size_t count() const { return count_; }

private:
    std::ofstream out_;
    std::size_t count_ = 0;
};

// Field access that names the offending record on failure.
std::string require_string(const json& rec, const char* key, std::size_t line);

}  // namespace tceforge::jsonl
