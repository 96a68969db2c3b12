#pragma once

#include <string>
#include <vector>

namespace vuldet::clex {

enum class TokenKind {
    Identifier,
    Keyword,
    Operator,
    Punctuation,
    IntLiteral,
    FloatLiteral,
    StringLiteral,
    CharLiteral,
};

const char* to_string(TokenKind kind);

struct Token {
    std::string text;
    TokenKind kind = TokenKind::Identifier;
    int line = 1;    // 1-based
    int column = 1;  // 1-based, position in the (ASCII-filtered) line
};

struct LexDiagnostic {
    enum class Code {
        UnterminatedComment,
        UnterminatedStringLiteral,
        UnsupportedTrigraph,
    };
    Code code;
    std::string file;
    int line = 0;
    std::string message() const;
};

// One lexed translation unit.  `lines` holds the ASCII-filtered source
// lines; every Token.line indexes into it (1-based).  Comments never
// reach the token stream.
struct SourceFile {
    std::string path;
    std::vector<std::string> lines;
    std::vector<Token> tokens;
    std::vector<LexDiagnostic> diagnostics;
};

}  // namespace vuldet::clex
