#include <verifide/lexer.hpp>

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace verifide;

namespace {

// Independent character-class scanner: tells which class each byte should
// belong to, without sharing code with the lexer.
std::vector<TokenKind> reference_classes(const std::string& s) {
    std::vector<TokenKind> out(s.size(), TokenKind::Error);
    std::size_t i = 0;
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < s.size()) {
        const char c = s[i];
        std::size_t j = i + 1;
        TokenKind k = TokenKind::Error;
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t' || s[j] == '\n' || s[j] == '\r')) ++j;
            k = TokenKind::Whitespace;
        } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            while (j < s.size() && s[j] != '\n') ++j;
            k = TokenKind::Comment;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            k = TokenKind::Number;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (j < s.size() && ident_char(s[j])) ++j;
            k = is_keyword(s.substr(i, j - i)) ? TokenKind::Keyword : TokenKind::Ident;
        } else if (std::string("+-*/%<>=!&|()[]{},;:.").find(c) != std::string::npos) {
            k = TokenKind::Operator;
        }
        for (std::size_t x = i; x < j; ++x) out[x] = k;
        i = j;
    }
    return out;
}

std::vector<TokenKind> lexer_classes(const std::string& s) {
    std::vector<TokenKind> out;
    for (const Token& t : lex_scan(s)) out.insert(out.end(), t.text.size(), t.kind);
    return out;
}

std::string concat(const std::vector<Token>& tokens) {
    std::string out;
    for (const Token& t : tokens) out += t.text;
    return out;
}

}  // namespace

TEST(Lexer, ClassifiesSimpleMethod) {
    const auto tokens = lex_scan("method Foo() { }");
    ASSERT_GE(tokens.size(), 4u);
    EXPECT_EQ(tokens[0].kind, TokenKind::Keyword);
    EXPECT_EQ(tokens[0].text, "method");
    EXPECT_EQ(tokens[2].kind, TokenKind::Ident);
    EXPECT_EQ(tokens[2].text, "Foo");
}

TEST(Lexer, LongestOperatorWins) {
    std::vector<std::string> ops;
    for (const Token& t : lex_scan("a <==> b ==> c := d <= e")) {
        if (t.kind == TokenKind::Operator) ops.push_back(t.text);
    }
    EXPECT_EQ(ops, (std::vector<std::string>{"<==>", "==>", ":=", "<="}));
}

TEST(Lexer, SpansTrackLinesAndColumns) {
    const auto tokens = lex_scan("x\n  yy");
    ASSERT_EQ(tokens.size(), 3u);
    EXPECT_EQ(tokens[2].span, (Span{1, 2, 1, 4}));
}

TEST(Lexer, UnterminatedBlockCommentIsError) {
    const auto tokens = lex_scan("x /* never closed");
    EXPECT_EQ(tokens.back().kind, TokenKind::Error);
    EXPECT_EQ(concat(tokens), "x /* never closed");
}

TEST(Lexer, BlockCommentSpansLines) {
    const auto tokens = lex_scan("/* a\nb */x");
    ASSERT_EQ(tokens.size(), 2u);
    EXPECT_EQ(tokens[0].kind, TokenKind::Comment);
    EXPECT_EQ(tokens[0].span, (Span{0, 0, 1, 4}));
}

TEST(Lexer, MultibyteGarbageIsOneErrorToken) {
    const auto tokens = lex_scan("a \xC3\xA9 b");
    ASSERT_EQ(tokens.size(), 5u);
    EXPECT_EQ(tokens[2].kind, TokenKind::Error);
    EXPECT_EQ(tokens[2].text, "\xC3\xA9");
}

TEST(Lexer, MatchesReferenceScannerOnCorpus) {
    for (const auto& path : testing_support::corpus_files("programs", ".msp")) {
        const std::string text = testing_support::read_file(path);
        // The reference scanner ignores block comments; the corpus uses none.
        ASSERT_EQ(text.find("/*"), std::string::npos) << path;
        EXPECT_EQ(lexer_classes(text), reference_classes(text)) << path;
    }
}

TEST(Lexer, TotalAndLosslessOnRandomInput) {
    std::mt19937 rng(7);
    const std::string alphabet = "ab_9 \n\t/*+-<=>!&|(){}[]:;,.'\"#@\x80\xC3";
    for (int round = 0; round < 2000; ++round) {
        std::string s;
        const int len = static_cast<int>(rng() % 40);
        for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
        const auto tokens = lex_scan(s);
        ASSERT_EQ(concat(tokens), s);
        for (const Token& t : tokens) ASSERT_FALSE(t.text.empty());
    }
}

TEST(Lexer, RandomInputAgreesWithReferenceOutsideComments) {
    std::mt19937 rng(11);
    const std::string alphabet = "ab_9 \nxz+-<=>!&|(){}[]:;,.";
    for (int round = 0; round < 2000; ++round) {
        std::string s;
        const int len = static_cast<int>(rng() % 30);
        for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
        EXPECT_EQ(lexer_classes(s), reference_classes(s)) << s;
    }
}
