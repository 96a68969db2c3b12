#include "vuldet/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace vuldet::clex {

namespace {

const std::unordered_set<std::string_view>& keyword_table() {
    // C89/C99 keywords plus a fixed C++ subset.
    static const std::unordered_set<std::string_view> kTable = {
        // C89
        "auto", "break", "case", "char", "const", "continue", "default",
        "do", "double", "else", "enum", "extern", "float", "for", "goto",
        "if", "int", "long", "register", "return", "short", "signed",
        "sizeof", "static", "struct", "switch", "typedef", "union",
        "unsigned", "void", "volatile", "while",
        // C99
        "inline", "restrict", "_Bool", "_Complex", "_Imaginary",
        // C++ subset
        "bool", "catch", "class", "const_cast", "constexpr", "delete",
        "dynamic_cast", "explicit", "false", "friend", "mutable",
        "namespace", "new", "noexcept", "nullptr", "operator", "private",
        "protected", "public", "reinterpret_cast", "static_cast",
        "template", "this", "throw", "true", "try", "typeid", "typename",
        "using", "virtual", "wchar_t",
    };
    return kTable;
}

// Multi-character operators, longest first for maximal munch.
constexpr std::array<std::string_view, 4> kOps3 = {"<<=", ">>=", "...",
                                                   "->*"};
constexpr std::array<std::string_view, 21> kOps2 = {
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "::", ".*"};

bool is_punct_char(char c) {
    return c == '(' || c == ')' || c == '[' || c == ']' || c == '{' ||
           c == '}' || c == ',' || c == ';';
}

bool is_op_char(char c) {
    return std::string_view("+-*/%=<>!&|^~?:.#").find(c) !=
           std::string_view::npos;
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct Cursor {
    const std::vector<std::string>& lines;
    size_t li = 0;  // 0-based line index
    size_t ci = 0;  // 0-based column index

    bool eof() const { return li >= lines.size(); }
    char peek(size_t ahead = 0) const {
        if (eof()) return '\0';
        const std::string& l = lines[li];
        return ci + ahead < l.size() ? l[ci + ahead] : '\0';
    }
    // Remaining text on the current line.
    std::string_view rest() const {
        if (eof()) return {};
        return std::string_view(lines[li]).substr(ci);
    }
    void advance(size_t n = 1) { ci += n; }
    void next_line() {
        ++li;
        ci = 0;
    }
    bool at_line_end() const { return eof() || ci >= lines[li].size(); }
};

}  // namespace

const char* to_string(TokenKind kind) {
    switch (kind) {
        case TokenKind::Identifier: return "identifier";
        case TokenKind::Keyword: return "keyword";
        case TokenKind::Operator: return "operator";
        case TokenKind::Punctuation: return "punctuation";
        case TokenKind::IntLiteral: return "int-literal";
        case TokenKind::FloatLiteral: return "float-literal";
        case TokenKind::StringLiteral: return "string-literal";
        case TokenKind::CharLiteral: return "char-literal";
    }
    return "unknown";
}

std::string LexDiagnostic::message() const {
    std::string what;
    switch (code) {
        case Code::UnterminatedComment: what = "unterminated comment"; break;
        case Code::UnterminatedStringLiteral:
            what = "unterminated string literal";
            break;
        case Code::UnsupportedTrigraph:
            what = "unsupported trigraph sequence";
            break;
    }
    return file + ":" + std::to_string(line) + ": " + what;
}

bool is_keyword(std::string_view text) {
    return keyword_table().count(text) > 0;
}

SourceFile lex_file(std::string_view raw_text, std::string path) {
    SourceFile out;
    out.path = std::move(path);

    // Drop non-ASCII bytes up front, preserving line structure.
    {
        std::string line;
        for (size_t i = 0; i < raw_text.size(); ++i) {
            unsigned char c = raw_text[i];
            if (c == '\r') continue;
            if (c == '\n') {
                out.lines.push_back(std::move(line));
                line.clear();
            } else if (c == '\t') {
                line.push_back(' ');
            } else if (c >= 0x20 && c < 0x7f) {
                line.push_back(static_cast<char>(c));
            }
            // else: control or non-ASCII byte, dropped
        }
        if (!line.empty()) out.lines.push_back(std::move(line));
    }

    Cursor cur{out.lines};
    auto emit = [&](std::string text, TokenKind kind, size_t li, size_t ci) {
        out.tokens.push_back(Token{std::move(text), kind,
                                   static_cast<int>(li + 1),
                                   static_cast<int>(ci + 1)});
    };
    auto diag = [&](LexDiagnostic::Code code, size_t li) {
        out.diagnostics.push_back(
            LexDiagnostic{code, out.path, static_cast<int>(li + 1)});
    };

    while (!cur.eof()) {
        if (cur.at_line_end()) {
            cur.next_line();
            continue;
        }
        char c = cur.peek();
        if (c == ' ') {
            cur.advance();
            continue;
        }

        // Preprocessor directive: whole (continued) line as one token.
        if (c == '#' && cur.lines[cur.li].find_first_not_of(' ') == cur.ci) {
            size_t startLi = cur.li, startCi = cur.ci;
            std::string text;
            for (;;) {
                std::string_view r = cur.rest();
                bool cont = !r.empty() && r.back() == '\\';
                text.append(r.substr(0, cont ? r.size() - 1 : r.size()));
                cur.next_line();
                if (!cont || cur.eof()) break;
                text.push_back(' ');
            }
            while (!text.empty() && text.back() == ' ') text.pop_back();
            emit(std::move(text), TokenKind::Punctuation, startLi, startCi);
            continue;
        }

        // Comments.
        if (c == '/' && cur.peek(1) == '/') {
            cur.next_line();
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            size_t openLi = cur.li;
            cur.advance(2);
            bool closed = false;
            while (!cur.eof()) {
                if (cur.at_line_end()) {
                    cur.next_line();
                    continue;
                }
                if (cur.peek() == '*' && cur.peek(1) == '/') {
                    cur.advance(2);
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) {
                diag(LexDiagnostic::Code::UnterminatedComment, openLi);
                // Recover: skip the rest of the opening line only.
                cur.li = openLi + 1;
                cur.ci = 0;
            }
            continue;
        }

        // Trigraphs are not supported; report and skip the introducer.
        if (c == '?' && cur.peek(1) == '?' &&
            std::string_view("=/'()!<>-").find(cur.peek(2)) !=
                std::string_view::npos) {
            diag(LexDiagnostic::Code::UnsupportedTrigraph, cur.li);
            cur.advance(3);
            continue;
        }

        // String and char literals (single token, escapes honored).
        if (c == '"' || c == '\'') {
            char quote = c;
            size_t startLi = cur.li, startCi = cur.ci;
            std::string text(1, quote);
            cur.advance();
            bool closed = false;
            while (!cur.at_line_end()) {
                char d = cur.peek();
                if (d == '\\' && !cur.at_line_end()) {
                    text.push_back(d);
                    cur.advance();
                    if (!cur.at_line_end()) {
                        text.push_back(cur.peek());
                        cur.advance();
                    }
                    continue;
                }
                text.push_back(d);
                cur.advance();
                if (d == quote) {
                    closed = true;
                    break;
                }
            }
            if (!closed) {
                diag(LexDiagnostic::Code::UnterminatedStringLiteral, startLi);
                cur.next_line();
                continue;
            }
            emit(std::move(text),
                 quote == '"' ? TokenKind::StringLiteral
                              : TokenKind::CharLiteral,
                 startLi, startCi);
            continue;
        }

        // Numeric literals (pp-number style scan, then classify).
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1))))) {
            size_t startCi = cur.ci;
            std::string text;
            bool hex = cur.peek() == '0' &&
                       (cur.peek(1) == 'x' || cur.peek(1) == 'X');
            while (!cur.at_line_end()) {
                char d = cur.peek();
                if (is_ident_char(d) || d == '.') {
                    text.push_back(d);
                    cur.advance();
                    continue;
                }
                // Exponent sign: e+/e- (decimal) or p+/p- (hex float).
                if ((d == '+' || d == '-') && !text.empty()) {
                    char prev = text.back();
                    bool expo = (!hex && (prev == 'e' || prev == 'E')) ||
                                (hex && (prev == 'p' || prev == 'P'));
                    if (expo) {
                        text.push_back(d);
                        cur.advance();
                        continue;
                    }
                }
                break;
            }
            bool isFloat =
                text.find('.') != std::string::npos ||
                (!hex && (text.find('e') != std::string::npos ||
                          text.find('E') != std::string::npos)) ||
                (hex && (text.find('p') != std::string::npos ||
                         text.find('P') != std::string::npos));
            emit(std::move(text),
                 isFloat ? TokenKind::FloatLiteral : TokenKind::IntLiteral,
                 cur.li, startCi);
            continue;
        }

        // Identifiers and keywords.
        if (is_ident_start(c)) {
            size_t startCi = cur.ci;
            std::string text;
            while (!cur.at_line_end() && is_ident_char(cur.peek())) {
                text.push_back(cur.peek());
                cur.advance();
            }
            TokenKind kind = is_keyword(text) ? TokenKind::Keyword
                                              : TokenKind::Identifier;
            emit(std::move(text), kind, cur.li, startCi);
            continue;
        }

        // Punctuation.
        if (is_punct_char(c)) {
            emit(std::string(1, c), TokenKind::Punctuation, cur.li, cur.ci);
            cur.advance();
            continue;
        }

        // Operators, maximal munch.
        if (is_op_char(c)) {
            std::string_view r = cur.rest();
            size_t len = 1;
            for (auto op : kOps3) {
                if (r.substr(0, 3) == op) {
                    len = 3;
                    break;
                }
            }
            if (len == 1) {
                for (auto op : kOps2) {
                    if (r.substr(0, 2) == op) {
                        len = 2;
                        break;
                    }
                }
            }
            emit(std::string(r.substr(0, len)), TokenKind::Operator, cur.li,
                 cur.ci);
            cur.advance(len);
            continue;
        }

        // Anything else (stray backslash etc.): skip.
        cur.advance();
    }

    return out;
}

}  // namespace vuldet::clex
