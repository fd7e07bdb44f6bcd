#pragma once

#include <verifide/source.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace verifide {

enum class TokenKind : std::uint8_t {
    Keyword,
    Ident,
    Number,
    Operator,
    Comment,
    Whitespace,
    StringLit,
    Error,
};

const char* to_string(TokenKind kind);

struct Token {
    TokenKind kind = TokenKind::Error;
    std::string text;
    Span span;
};

bool is_keyword(std::string_view word);

/// Classifies every byte of `text` into tokens for highlighting. Total:
/// never fails, and concatenating the token texts reproduces the input.
std::vector<Token> lex_scan(std::string_view text);

}  // namespace verifide
