#include "tceforge/date.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

namespace tceforge {

Date Date::parse(std::string_view text) {
    // Strict YYYY-MM-DD (4-2-2 digits).
    auto bad = [&] {
        throw ParseError("expected ISO-8601 date (YYYY-MM-DD), got '" + std::string(text) + "'");
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') bad();
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) bad();

    int y = 0;
    unsigned m = 0, d = 0;
    std::from_chars(text.data(), text.data() + 4, y);
    std::from_chars(text.data() + 5, text.data() + 7, m);
    std::from_chars(text.data() + 8, text.data() + 10, d);
    return from_ymd(y, m, d);
}

std::string Date::to_string() const {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{days_}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace tceforge
