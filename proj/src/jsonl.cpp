#include "tceforge/jsonl.hpp"

#include "tceforge/text.hpp"

namespace tceforge::jsonl {

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded())
            throw ParseError("malformed record at " + path.string() + ":" +
                             std::to_string(line_no));
        fn(line_no, rec);
    }
}

Writer::Writer(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw ConfigError("cannot open file for writing: " + path.string());
}

void Writer::write(const json& record) {
    out_ << record.dump() << '\n';
    ++count_;
}

std::string require_string(const json& rec, const char* key, std::size_t line) {
    auto it = rec.find(key);
    if (it == rec.end() || !it->is_string())
        throw ParseError(std::string("missing or non-string field '") + key + "' at line " +
                         std::to_string(line));
    return it->get<std::string>();
}

}  // namespace tceforge::jsonl
