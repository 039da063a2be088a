#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spn {

/// Role of a symbol inside a pattern. New (raw) data carries Data; stored
/// patterns mark each symbol as identification (Id) or contents (Content).
enum class Role { Id, Content, Data };

enum class Origin { User, Learned, Augmented };

struct Symbol {
    std::string name;
    Role role = Role::Data;

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

struct Pattern {
    std::string id;
    std::vector<Symbol> symbols;
    std::uint64_t frequency = 1;
    Origin origin = Origin::User;

    bool is_new() const { return !symbols.empty() && symbols.front().role == Role::Data; }
    std::size_t id_symbol_count() const;
    std::vector<std::string> names() const;

    friend bool operator==(const Pattern&, const Pattern&) = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed text input; carries the 1-based line number (0 when
/// the error is not tied to a line).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class UnknownTokenError : public Error {
public:
    explicit UnknownTokenError(std::string_view token);
    const std::string& token() const { return token_; }

private:
    std::string token_;
};

/// Tokens are non-empty, contain no whitespace and no '/'.
bool is_valid_token(std::string_view token);

std::vector<std::string> split_tokens(std::string_view line);

/// A New pattern: every symbol has role Data. Throws ParseError on bad tokens.
Pattern make_new_pattern(const std::vector<std::string>& tokens);
Pattern parse_new_pattern(std::string_view line);

/// One New pattern per non-empty, non-comment line.
std::vector<Pattern> parse_new_file(std::string_view text);

std::string_view role_name(Role role);
std::string_view origin_name(Origin origin);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

} // namespace spn
