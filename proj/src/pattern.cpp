#include "spn/pattern.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace spn {

std::size_t Pattern::id_symbol_count() const {
    return static_cast<std::size_t>(
        std::count_if(symbols.begin(), symbols.end(), [](const Symbol& s) { return s.role == Role::Id; }));
}

std::vector<std::string> Pattern::names() const {
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.push_back(s.name);
    return out;
}

ParseError::ParseError(std::size_t line, const std::string& what)
    : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

UnknownTokenError::UnknownTokenError(std::string_view token)
    : Error("unknown token '" + std::string(token) + "'"), token_(token) {}

bool is_valid_token(std::string_view token) {
    if (token.empty()) return false;
    return std::none_of(token.begin(), token.end(), [](char c) {
        return c == '/' || std::isspace(static_cast<unsigned char>(c));
    });
}

std::vector<std::string> split_tokens(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

Pattern make_new_pattern(const std::vector<std::string>& tokens) {
    Pattern p;
    p.id = "new";
    for (const auto& t : tokens) {
        if (!is_valid_token(t)) throw ParseError(0, "invalid token '" + t + "'");
        p.symbols.push_back({t, Role::Data});
    }
    return p;
}

Pattern parse_new_pattern(std::string_view line) { return make_new_pattern(split_tokens(line)); }

std::vector<Pattern> parse_new_file(std::string_view text) {
    std::vector<Pattern> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = split_tokens(line);
        if (toks.empty() || toks.front().starts_with("#")) continue;
        for (const auto& t : toks) {
            if (!is_valid_token(t)) throw ParseError(lineno, "invalid token '" + t + "'");
        }
        out.push_back(make_new_pattern(toks));
    }
    return out;
}

std::string_view role_name(Role role) {
    switch (role) {
    case Role::Id: return "I";
    case Role::Content: return "C";
    case Role::Data: return "D";
    }
    return "?";
}

std::string_view origin_name(Origin origin) {
    switch (origin) {
    case Origin::User: return "user";
    case Origin::Learned: return "learned";
    case Origin::Augmented: return "augmented";
    }
    return "?";
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

} // namespace spn
