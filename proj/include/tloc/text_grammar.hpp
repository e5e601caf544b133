#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <utility>

#include "tloc/detail/text.hpp"
#include "tloc/interval.hpp"
#include "tloc/time_codec.hpp"

namespace tloc {

// Surface form of a time token. The default renders index 38 as "<38>";
// the pair is configurable so a different vocabulary string costs nothing.
struct TokenStyle {
    std::string prefix = "<";
    std::string suffix = ">";
};

inline std::string render_time_token(int t, const TokenStyle& style = {}) {
    return style.prefix + std::to_string(t) + style.suffix;
}

// "[<start> <end>] Explanation"
inline std::string render_rtl_answer(const Interval& iv, const std::string& explanation, const TimeGrid& grid,
                                     const TokenStyle& style = {}) {
    return "[" + render_time_token(encode_time(iv.start, grid), style) + " " +
           render_time_token(encode_time(iv.end, grid), style) + "] " + explanation;
}

struct ParsedAnswer {
    std::optional<Interval> interval;
    std::string explanation;
};

namespace detail {

inline std::string regex_escape(const std::string& s) {
    static const std::string meta = R"(\^$.|?*+()[]{})";
    std::string out;
    for (char c : s) {
        if (meta.find(c) != std::string::npos) out += '\\';
        out += c;
    }
    return out;
}

struct AnswerGrammar {
    std::regex token;        // one time token, index captured
    std::regex bracket;      // any non-nested [...] span
    std::regex bracket_pair; // bracket content holding exactly two items
    std::regex from_to;      // "from 12.5 to 20" style decimals

    explicit AnswerGrammar(const TokenStyle& style) {
        const std::string tok = regex_escape(style.prefix) + R"((\d+))" + regex_escape(style.suffix);
        const std::string tok_nc = regex_escape(style.prefix) + R"(\d+)" + regex_escape(style.suffix);
        const std::string num = R"([-+]?(?:\d+(?:\.\d*)?|\.\d+))";
        const std::string item = "(" + tok_nc + "|" + num + ")";
        token = std::regex(tok);
        bracket = std::regex(R"(\[([^\[\]]*)\])");
        bracket_pair = std::regex(R"(^\s*)" + item + R"([\s,]+)" + item + R"(\s*$)");
        from_to = std::regex(R"(\bfrom\s+()" + num + R"()\s*(?:s\b|secs?\b|seconds?\b)?\s+to\s+()" + num + ")",
                             std::regex::icase);
    }
};

inline const AnswerGrammar& answer_grammar(const TokenStyle& style) {
    static std::mutex mu;
    static std::map<std::pair<std::string, std::string>, AnswerGrammar> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(style.prefix, style.suffix);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, AnswerGrammar(style)).first;
    return it->second;
}

// Token indices are clamped into [1, steps] and raw seconds into
// [0, length]; the parser must not reject any text.
inline double parse_item_seconds(const std::string& item, const TimeGrid& grid, const TokenStyle& style) {
    if (item.size() > style.prefix.size() && item.compare(0, style.prefix.size(), style.prefix) == 0) {
        std::string digits = item.substr(style.prefix.size(), item.size() - style.prefix.size() - style.suffix.size());
        long long t;
        try {
            t = std::stoll(digits);
        } catch (const std::out_of_range&) {
            t = grid.steps;
        }
        t = std::clamp(t, 1LL, static_cast<long long>(grid.steps));
        return decode_time(static_cast<int>(t), grid);
    }
    double v;
    try {
        v = std::stod(item);
    } catch (const std::out_of_range&) {
        v = item[0] == '-' ? 0.0 : grid.length;
    }
    return std::clamp(v, 0.0, grid.length);
}

} // namespace detail

// Extract an interval and explanation from a model answer. Recognized
// timestamp forms, in priority order:
//   1. a bracketed pair "[X Y]" where each of X, Y is a time token or a
//      decimal number of seconds,
//   2. the first two time tokens anywhere in the text,
//   3. the first two decimals in a "from ... to ..." phrase.
// The matched span is removed to obtain the explanation. Text with no
// recognizable pair yields an absent interval and the full trimmed text.
inline ParsedAnswer parse_answer(const std::string& text, const TimeGrid& grid, const TokenStyle& style = {}) {
    grid.validate();
    const auto& g = detail::answer_grammar(style);

    std::size_t span_begin = std::string::npos, span_end = std::string::npos;
    std::optional<Interval> interval;

    // 1. bracketed pair
    for (auto it = std::sregex_iterator(text.begin(), text.end(), g.bracket); it != std::sregex_iterator(); ++it) {
        std::smatch pair;
        const std::string content = (*it)[1].str();
        if (std::regex_match(content, pair, g.bracket_pair)) {
            double a = detail::parse_item_seconds(pair[1].str(), grid, style);
            double b = detail::parse_item_seconds(pair[2].str(), grid, style);
            interval = Interval{a, b};
            span_begin = static_cast<std::size_t>(it->position(0));
            span_end = span_begin + static_cast<std::size_t>(it->length(0));
            break;
        }
    }

    // 2. first two time tokens anywhere
    if (!interval) {
        auto it = std::sregex_iterator(text.begin(), text.end(), g.token);
        if (it != std::sregex_iterator()) {
            auto first = *it;
            ++it;
            if (it != std::sregex_iterator()) {
                auto second = *it;
                double a = detail::parse_item_seconds(first.str(), grid, style);
                double b = detail::parse_item_seconds(second.str(), grid, style);
                interval = Interval{a, b};
                span_begin = static_cast<std::size_t>(first.position(0));
                span_end = static_cast<std::size_t>(second.position(0)) + static_cast<std::size_t>(second.length(0));
            }
        }
    }

    // 3. "from ... to ..." decimals, taken as seconds
    if (!interval) {
        std::smatch m;
        if (std::regex_search(text, m, g.from_to)) {
            double a = detail::parse_item_seconds(m[1].str(), grid, style);
            double b = detail::parse_item_seconds(m[2].str(), grid, style);
            interval = Interval{a, b};
            span_begin = static_cast<std::size_t>(m.position(0));
            span_end = span_begin + static_cast<std::size_t>(m.length(0));
        }
    }

    ParsedAnswer out;
    if (!interval) {
        out.explanation = detail::trim(text);
        return out;
    }
    if (interval->start > interval->end) std::swap(interval->start, interval->end);
    out.interval = interval;
    std::string left = text.substr(0, span_begin);
    std::string right = text.substr(span_end);
    // drop one of the two spaces the removed span was wedged between
    if (!left.empty() && !right.empty() && std::isspace(static_cast<unsigned char>(left.back())) &&
        std::isspace(static_cast<unsigned char>(right.front())))
        right.erase(0, 1);
    out.explanation = detail::trim(left + right);
    return out;
}

} // namespace tloc
