#include <verifide/lexer.hpp>

#include <algorithm>
#include <array>

namespace verifide {

namespace {

constexpr std::array<std::string_view, 24> kKeywords = {
    "method", "function", "returns", "requires", "ensures", "decreases",
    "invariant", "var", "if", "else", "while", "assert",
    "assume", "return", "forall", "old", "true", "false",
    "int", "bool", "array", "modifies", "reads", "then",
};

// Longest match first.
constexpr std::array<std::string_view, 31> kOperators = {
    "<==>", "==>", "::", ":=", "==", "!=", "<=", ">=", "&&", "||", "+",
    "-",    "*",   "/",  "%",  "<",  ">",  "!",  "(",  ")",  "{",  "}",
    "[",    "]",   ",",  ";",  ":",  ".",  "|",  "&",  "=",
};

bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

class Scanner {
public:
    explicit Scanner(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> tokens;
        while (pos_ < text_.size()) {
            tokens.push_back(next());
        }
        return tokens;
    }

private:
    Token next() {
        const std::size_t start = pos_;
        const int line = line_;
        const int col = col_;
        TokenKind kind = scan();
        Token token;
        token.kind = kind;
        token.text = std::string(text_.substr(start, pos_ - start));
        token.span = Span{line, col, line_, col_};
        return token;
    }

    TokenKind scan() {
        const char c = text_[pos_];
        if (is_space(c)) {
            while (pos_ < text_.size() && is_space(text_[pos_])) advance();
            return TokenKind::Whitespace;
        }
        if (starts_with("//")) {
            while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            return TokenKind::Comment;
        }
        if (starts_with("/*")) {
            advance(2);
            while (pos_ < text_.size()) {
                if (starts_with("*/")) {
                    advance(2);
                    return TokenKind::Comment;
                }
                advance();
            }
            return TokenKind::Error;  // unterminated block comment
        }
        if (is_digit(c)) {
            while (pos_ < text_.size() && is_digit(text_[pos_])) advance();
            return TokenKind::Number;
        }
        if (is_ident_start(c)) {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) advance();
            return is_keyword(text_.substr(start, pos_ - start)) ? TokenKind::Keyword : TokenKind::Ident;
        }
        if (c == '"') {
            advance();
            while (pos_ < text_.size() && text_[pos_] != '\n') {
                if (text_[pos_] == '\\' && pos_ + 1 < text_.size() && text_[pos_ + 1] != '\n') {
                    advance(2);
                    continue;
                }
                if (text_[pos_] == '"') {
                    advance();
                    return TokenKind::StringLit;
                }
                advance();
            }
            return TokenKind::Error;
        }
        for (std::string_view op : kOperators) {
            if (starts_with(op)) {
                advance(op.size());
                return TokenKind::Operator;
            }
        }
        // Unknown character: consume one whole UTF-8 sequence.
        advance();
        while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) advance();
        return TokenKind::Error;
    }

    bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }

    void advance(std::size_t n = 1) {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 0;
            } else {
                ++col_;
            }
            ++pos_;
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 0;
    int col_ = 0;
};

}  // namespace

const char* to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Ident: return "ident";
        case TokenKind::Number: return "number";
        case TokenKind::Operator: return "operator";
        case TokenKind::Comment: return "comment";
        case TokenKind::Whitespace: return "whitespace";
        case TokenKind::StringLit: return "string";
        case TokenKind::Error: return "error";
    }
    return "error";
}

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> lex_scan(std::string_view text) { return Scanner(text).run(); }

}  // namespace verifide
