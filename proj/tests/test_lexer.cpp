#include <string>
#include <vector>

#include "doctest.h"
#include "vuldet/lexer.hpp"

using namespace vuldet::clex;

namespace {
std::vector<std::string> texts(const SourceFile& sf) {
    std::vector<std::string> out;
    for (const auto& t : sf.tokens) out.push_back(t.text);
    return out;
}
}  // namespace

TEST_CASE("symbolic statement lexes to the seven expected tokens") {
    SourceFile sf = lex_file("strcpy(VAR5, VAR2);", "<mem>");
    REQUIRE(sf.tokens.size() == 7);
    CHECK(texts(sf) == std::vector<std::string>{"strcpy", "(", "VAR5", ",",
                                                "VAR2", ")", ";"});
    CHECK(sf.tokens[0].kind == TokenKind::Identifier);
    CHECK(sf.tokens[1].kind == TokenKind::Punctuation);
    CHECK(sf.tokens[2].kind == TokenKind::Identifier);
}

TEST_CASE("empty input lexes to no tokens") {
    SourceFile sf = lex_file("", "<mem>");
    CHECK(sf.tokens.empty());
    CHECK(sf.diagnostics.empty());
}

TEST_CASE("comment removal, hand-tokenized oracle") {
    // Hand tokenization of the line: int | x | = | 5 | ; | x | ++ | ;
    SourceFile sf = lex_file("int x = 5; /* c */ x++;", "<mem>");
    CHECK(texts(sf) ==
          std::vector<std::string>{"int", "x", "=", "5", ";", "x", "++", ";"});
    CHECK(sf.tokens.size() == 8);
    CHECK(sf.tokens[0].kind == TokenKind::Keyword);
    CHECK(sf.tokens[3].kind == TokenKind::IntLiteral);
}

TEST_CASE("keyword table") {
    CHECK(is_keyword("while"));
    CHECK(is_keyword("restrict"));
    CHECK(is_keyword("nullptr"));
    CHECK_FALSE(is_keyword("strcpy"));
    CHECK_FALSE(is_keyword("VAR1"));
    CHECK_FALSE(is_keyword(""));
}

TEST_CASE("line and block comments never reach the token stream") {
    SourceFile sf = lex_file("a //x\nb /* c\nd */ e", "<mem>");
    CHECK(texts(sf) == std::vector<std::string>{"a", "b", "e"});
    CHECK(sf.tokens[0].line == 1);
    CHECK(sf.tokens[1].line == 2);
    CHECK(sf.tokens[2].line == 3);
}

TEST_CASE("unterminated comment recovers on the next line") {
    SourceFile sf = lex_file("int a; /* no close\nint b;", "<mem>");
    REQUIRE(sf.diagnostics.size() == 1);
    CHECK(sf.diagnostics[0].code == LexDiagnostic::Code::UnterminatedComment);
    CHECK(sf.diagnostics[0].line == 1);
    // recovery: the second line still lexes
    CHECK(texts(sf) ==
          std::vector<std::string>{"int", "a", ";", "int", "b", ";"});
}

TEST_CASE("unterminated string literal recovers on the next line") {
    SourceFile sf = lex_file("char *s = \"oops;\nint x;", "<mem>");
    REQUIRE(sf.diagnostics.size() == 1);
    CHECK(sf.diagnostics[0].code ==
          LexDiagnostic::Code::UnterminatedStringLiteral);
    CHECK(sf.diagnostics[0].line == 1);
    CHECK(texts(sf).back() == ";");
    CHECK(texts(sf)[texts(sf).size() - 3] == "x");
}

TEST_CASE("string and char literals stay single tokens") {
    SourceFile sf = lex_file("f(\"a, b\\\"c\", 'x', '\\n');", "<mem>");
    auto t = texts(sf);
    REQUIRE(t.size() == 9);
    CHECK(t[2] == "\"a, b\\\"c\"");
    CHECK(sf.tokens[2].kind == TokenKind::StringLiteral);
    CHECK(t[4] == "'x'");
    CHECK(sf.tokens[4].kind == TokenKind::CharLiteral);
    CHECK(t[6] == "'\\n'");
}

TEST_CASE("non-ASCII bytes are dropped before scanning") {
    std::string in = "int caf\xc3\xa9 = 1;";  // identifier with utf-8 bytes
    SourceFile sf = lex_file(in, "<mem>");
    CHECK(texts(sf) == std::vector<std::string>{"int", "caf", "=", "1", ";"});
    for (const auto& t : sf.tokens)
        for (char c : t.text) CHECK(static_cast<unsigned char>(c) < 0x80);
}

TEST_CASE("preprocessor directives become one whole-line token") {
    SourceFile sf = lex_file("#include <stdio.h>\nint x;", "<mem>");
    REQUIRE(sf.tokens.size() == 4);
    CHECK(sf.tokens[0].kind == TokenKind::Punctuation);
    CHECK(sf.tokens[0].text == "#include <stdio.h>");
    SUBCASE("continuation lines fold in") {
        SourceFile sf2 = lex_file("#define M(a) \\\n  (a+1)\nint y;", "<mem>");
        CHECK(sf2.tokens[0].text == "#define M(a)  (a+1)");
        CHECK(sf2.tokens[1].text == "int");
        CHECK(sf2.tokens[1].line == 3);
    }
}

TEST_CASE("numeric literal classification") {
    SourceFile sf = lex_file("a = 0x1F + 10 + 1.5e3 + 0x1p3 + 2e-2 + 07;",
                             "<mem>");
    std::vector<TokenKind> kinds;
    for (const auto& t : sf.tokens)
        if (t.kind == TokenKind::IntLiteral ||
            t.kind == TokenKind::FloatLiteral)
            kinds.push_back(t.kind);
    CHECK(kinds == std::vector<TokenKind>{
                       TokenKind::IntLiteral, TokenKind::IntLiteral,
                       TokenKind::FloatLiteral, TokenKind::FloatLiteral,
                       TokenKind::FloatLiteral, TokenKind::IntLiteral});
}

TEST_CASE("maximal munch on multi-character operators") {
    SourceFile sf = lex_file("a <<= b >> c->d && e++;", "<mem>");
    auto t = texts(sf);
    CHECK(std::find(t.begin(), t.end(), "<<=") != t.end());
    CHECK(std::find(t.begin(), t.end(), ">>") != t.end());
    CHECK(std::find(t.begin(), t.end(), "->") != t.end());
    CHECK(std::find(t.begin(), t.end(), "&&") != t.end());
    CHECK(std::find(t.begin(), t.end(), "++") != t.end());
}

TEST_CASE("token positions strictly increase in lexical order") {
    SourceFile sf = lex_file("int a = 1;\n  char b;\nfoo(a, b);", "<mem>");
    for (size_t i = 1; i < sf.tokens.size(); ++i) {
        const auto& prev = sf.tokens[i - 1];
        const auto& cur = sf.tokens[i];
        bool increases = cur.line > prev.line ||
                         (cur.line == prev.line && cur.column > prev.column);
        CHECK(increases);
    }
    for (const auto& t : sf.tokens) {
        CHECK(t.line >= 1);
        CHECK(t.line <= static_cast<int>(sf.lines.size()));
        CHECK_FALSE(t.text.empty());
    }
}

TEST_CASE("round-trip locality: space-joined token text re-lexes identically") {
    const char* samples[] = {
        "for (int i = 0; i < n; i++) sum += arr[i];",
        "char *p = (char*)malloc(len + 1);",
        "if (x >= 10 && y != 0) z = x / y;",
        "printf(\"%d %s\\n\", n, name);",
        "#define MAX 128",
        "while (*dst++ = *src++) count--;",
    };
    for (const char* sample : samples) {
        SourceFile first = lex_file(sample, "<mem>");
        std::string joined;
        for (const auto& t : first.tokens) {
            if (!joined.empty()) joined.push_back(' ');
            joined += t.text;
        }
        SourceFile second = lex_file(joined, "<mem>");
        REQUIRE(second.tokens.size() == first.tokens.size());
        for (size_t i = 0; i < first.tokens.size(); ++i) {
            CHECK(first.tokens[i].text == second.tokens[i].text);
            CHECK(first.tokens[i].kind == second.tokens[i].kind);
        }
    }
}

TEST_CASE("lexing is deterministic") {
    const char* src = "int main(void) { return 0; } /* tail */";
    SourceFile a = lex_file(src, "<mem>");
    SourceFile b = lex_file(src, "<mem>");
    REQUIRE(a.tokens.size() == b.tokens.size());
    for (size_t i = 0; i < a.tokens.size(); ++i) {
        CHECK(a.tokens[i].text == b.tokens[i].text);
        CHECK(a.tokens[i].kind == b.tokens[i].kind);
        CHECK(a.tokens[i].line == b.tokens[i].line);
        CHECK(a.tokens[i].column == b.tokens[i].column);
    }
}

TEST_CASE("trigraphs are rejected with a diagnostic") {
    SourceFile sf = lex_file("int a??(3??);", "<mem>");
    CHECK(!sf.diagnostics.empty());
    CHECK(sf.diagnostics[0].code ==
          LexDiagnostic::Code::UnsupportedTrigraph);
}
