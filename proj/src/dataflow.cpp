#include "vuldet/dataflow.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

#include "vuldet/lexer.hpp"

namespace vuldet::dataflow {

namespace {

using clex::Token;
using clex::TokenKind;

bool is_type_keyword(const std::string& t) {
    static const std::unordered_set<std::string> kTypes = {
        "auto",     "bool",   "char",     "const",   "double",   "enum",
        "extern",   "float",  "int",      "long",    "register", "short",
        "signed",   "static", "struct",   "union",   "unsigned", "void",
        "volatile", "wchar_t", "_Bool",   "inline",  "typedef"};
    return kTypes.count(t) > 0;
}

bool is_flow_keyword(const std::string& t) {
    static const std::unordered_set<std::string> kFlow = {
        "if", "else", "while", "for", "switch", "do", "return", "case",
        "default"};
    return kFlow.count(t) > 0;
}

bool is_tok(const Token& t, const char* text) { return t.text == text; }

bool is_assign_op(const Token& t) {
    if (t.kind != TokenKind::Operator) return false;
    static const std::unordered_set<std::string> kAssign = {
        "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="};
    return kAssign.count(t.text) > 0;
}

bool prev_is_member_op(const std::vector<Token>& toks, int i) {
    return i > 0 && toks[i - 1].kind == TokenKind::Operator &&
           (toks[i - 1].text == "." || toks[i - 1].text == "->");
}

// Matching close token for the opener at openIdx; -1 when unbalanced.
int find_match(const std::vector<Token>& toks, int openIdx, const char* open,
               const char* close) {
    int depth = 0;
    for (int i = openIdx; i < static_cast<int>(toks.size()); ++i) {
        if (toks[i].text == open) ++depth;
        else if (toks[i].text == close && --depth == 0) return i;
    }
    return -1;
}

struct CallOcc {
    std::string name;
    bool member = false;
    std::string base;
    int nameIdx = -1;
    std::vector<Arg> args;
};

// Base identifiers an expression region reads: identifiers that are not
// in call position and not member names after `.`/`->`.
std::vector<std::string> region_ids(const std::vector<Token>& toks, int begin,
                                    int end) {
    std::vector<std::string> ids;
    for (int i = begin; i < end; ++i) {
        if (toks[i].kind != TokenKind::Identifier) continue;
        if (i + 1 < end && is_tok(toks[i + 1], "(")) continue;
        if (prev_is_member_op(toks, i)) continue;
        if (std::find(ids.begin(), ids.end(), toks[i].text) == ids.end())
            ids.push_back(toks[i].text);
    }
    return ids;
}

std::string join_tokens(const std::vector<Token>& toks, int begin, int end) {
    std::string out;
    for (int i = begin; i < end; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += toks[i].text;
    }
    return out;
}

// Every `ident(...)` occurrence in the statement, nested ones included.
// Function headers, preprocessor lines and prototype-looking statements
// contribute none.
std::vector<CallOcc> scan_calls(const Statement& s) {
    std::vector<CallOcc> occs;
    if (s.isFunctionHeader || s.isPreprocessor) return occs;
    const auto& toks = s.tokens;
    bool startsWithType = !toks.empty() &&
                          toks[0].kind == TokenKind::Keyword &&
                          is_type_keyword(toks[0].text);
    int firstIdentIdx = -1;
    for (int i = 0; i < static_cast<int>(toks.size()); ++i) {
        if (toks[i].kind == TokenKind::Identifier) {
            firstIdentIdx = i;
            break;
        }
    }
    bool hasAssign = std::any_of(toks.begin(), toks.end(), is_assign_op);

    for (int i = 0; i < static_cast<int>(toks.size()) - 1; ++i) {
        if (toks[i].kind != TokenKind::Identifier) continue;
        if (!is_tok(toks[i + 1], "(")) continue;
        // `int foo(int);` style prototype, not a call.
        if (startsWithType && !hasAssign && i == firstIdentIdx) continue;
        int close = find_match(toks, i + 1, "(", ")");
        if (close < 0) close = static_cast<int>(toks.size());
        CallOcc occ;
        occ.name = toks[i].text;
        occ.nameIdx = i;
        if (prev_is_member_op(toks, i) && i >= 2 &&
            toks[i - 2].kind == TokenKind::Identifier) {
            occ.member = true;
            occ.base = toks[i - 2].text;
        }
        int depth = 0;
        int argBegin = i + 2;
        for (int j = i + 2; j <= close && j <= static_cast<int>(toks.size());
             ++j) {
            bool atClose = j == close;
            if (atClose || (depth == 0 && is_tok(toks[j], ","))) {
                if (j > argBegin) {
                    Arg a;
                    a.text = join_tokens(toks, argBegin, j);
                    a.ids = region_ids(toks, argBegin, j);
                    occ.args.push_back(std::move(a));
                }
                argBegin = j + 1;
                if (atClose) break;
                continue;
            }
            if (is_tok(toks[j], "(") || is_tok(toks[j], "[")) ++depth;
            else if (is_tok(toks[j], ")") || is_tok(toks[j], "]")) --depth;
        }
        occs.push_back(std::move(occ));
    }
    return occs;
}

// ---------------------------------------------------------------------
// Def/use extraction (token-level heuristics, one statement at a time).

struct PartView {
    const std::vector<Token>* toks;
    int begin, end;
    int size() const { return end - begin; }
    const Token& at(int i) const { return (*toks)[begin + i]; }
};

void process_part(PartView part, Statement& s) {
    // Strip leading flow keywords; `goto` targets are labels, not data.
    while (part.size() > 0 && part.at(0).kind == TokenKind::Keyword) {
        const std::string& kw = part.at(0).text;
        if (kw == "goto" || kw == "break" || kw == "continue") return;
        if (!is_flow_keyword(kw)) break;
        ++part.begin;
    }
    while (part.size() > 0 &&
           (is_tok(part.at(0), "{") || is_tok(part.at(0), "}")))
        ++part.begin;
    while (part.size() > 0 && (is_tok(part.at(part.size() - 1), "{") ||
                               is_tok(part.at(part.size() - 1), "}")))
        --part.end;
    // Peel a fully enclosing paren pair, e.g. the condition of `if`.
    while (part.size() >= 2 && is_tok(part.at(0), "(")) {
        int close = -1, depth = 0;
        for (int i = 0; i < part.size(); ++i) {
            if (is_tok(part.at(i), "(")) ++depth;
            else if (is_tok(part.at(i), ")") && --depth == 0) {
                close = i;
                break;
            }
        }
        if (close != part.size() - 1) break;
        ++part.begin;
        --part.end;
    }
    if (part.size() == 0) return;

    auto add_use = [&](const std::string& v) { s.uses.insert(v); };

    // Top-level assignment operator.
    int assignIdx = -1;
    {
        int depth = 0;
        for (int i = 0; i < part.size(); ++i) {
            const Token& t = part.at(i);
            if (is_tok(t, "(") || is_tok(t, "[")) ++depth;
            else if (is_tok(t, ")") || is_tok(t, "]")) --depth;
            else if (depth == 0 && is_assign_op(t)) {
                assignIdx = i;
                break;
            }
        }
    }

    if (assignIdx > 0) {
        bool hasMemberOp = false, hasBracket = false;
        bool leadingStar = part.at(0).kind == TokenKind::Operator &&
                           part.at(0).text == "*";
        int depth = 0;
        std::vector<int> topIds;
        for (int i = 0; i < assignIdx; ++i) {
            const Token& t = part.at(i);
            if (is_tok(t, "[")) { hasBracket = true; ++depth; }
            else if (is_tok(t, "(")) ++depth;
            else if (is_tok(t, "]") || is_tok(t, ")")) --depth;
            else if (t.kind == TokenKind::Operator &&
                     (t.text == "." || t.text == "->"))
                hasMemberOp = true;
            else if (t.kind == TokenKind::Identifier) {
                if (depth == 0) topIds.push_back(i);
                else add_use(t.text);  // subscript index
            }
        }
        if (!topIds.empty()) {
            // `p->f` writes through p (first id); in declarations and
            // plain lvalues the declared/written name comes last.
            int baseIdx = hasMemberOp ? topIds.front() : topIds.back();
            const std::string base = part.at(baseIdx).text;
            bool decl = (part.at(0).kind == TokenKind::Keyword &&
                         is_type_keyword(part.at(0).text)) ||
                        (topIds.size() >= 2 && !hasMemberOp && !hasBracket);
            bool weak = !decl && (hasMemberOp || hasBracket || leadingStar);
            bool compound = part.at(assignIdx).text != "=";
            s.defs.insert(base);
            if (!weak) s.strongDefs.insert(base);
            if (weak || compound) add_use(base);
        }
        for (int i = assignIdx + 1; i < part.size(); ++i) {
            const Token& t = part.at(i);
            if (t.kind != TokenKind::Identifier) continue;
            if (i + 1 < part.size() && is_tok(part.at(i + 1), "(")) continue;
            if (prev_is_member_op(*part.toks, part.begin + i)) continue;
            add_use(t.text);
        }
        return;
    }

    // Declaration without initializer: `char buf[16];`, `int a, b;`.
    bool declStart = part.at(0).kind == TokenKind::Keyword &&
                     is_type_keyword(part.at(0).text);
    bool twoIds = false;
    for (int i = 0; i + 1 < part.size(); ++i) {
        if (part.at(i).kind == TokenKind::Identifier &&
            part.at(i + 1).kind == TokenKind::Identifier)
            twoIds = true;
    }
    bool hasCallParen = false;
    for (int i = 0; i + 1 < part.size(); ++i) {
        if (part.at(i).kind == TokenKind::Identifier &&
            is_tok(part.at(i + 1), "("))
            hasCallParen = true;
    }
    if ((declStart || twoIds) && !hasCallParen) {
        int depth = 0, lastId = -1;
        for (int i = 0; i <= part.size(); ++i) {
            bool atEnd = i == part.size();
            if (!atEnd) {
                const Token& t = part.at(i);
                if (is_tok(t, "[") || is_tok(t, "(")) { ++depth; continue; }
                if (is_tok(t, "]") || is_tok(t, ")")) { --depth; continue; }
                if (depth > 0) {
                    if (t.kind == TokenKind::Identifier) add_use(t.text);
                    continue;
                }
                if (t.kind == TokenKind::Identifier) { lastId = i; continue; }
                if (!is_tok(t, ",")) continue;
            }
            if (lastId >= 0) {
                s.defs.insert(part.at(lastId).text);
                s.strongDefs.insert(part.at(lastId).text);
                lastId = -1;
            }
        }
        return;
    }

    // Increment/decrement rewrites the variable.
    for (int i = 0; i < part.size(); ++i) {
        const Token& t = part.at(i);
        if (t.kind == TokenKind::Operator &&
            (t.text == "++" || t.text == "--")) {
            int idIdx = -1;
            if (i > 0 && part.at(i - 1).kind == TokenKind::Identifier)
                idIdx = i - 1;
            else if (i + 1 < part.size() &&
                     part.at(i + 1).kind == TokenKind::Identifier)
                idIdx = i + 1;
            if (idIdx >= 0) {
                const std::string v = part.at(idIdx).text;
                s.defs.insert(v);
                s.strongDefs.insert(v);
                add_use(v);
            }
        }
    }

    // General expression: remaining identifiers are uses.
    for (int i = 0; i < part.size(); ++i) {
        const Token& t = part.at(i);
        if (t.kind != TokenKind::Identifier) continue;
        if (i + 1 < part.size() && is_tok(part.at(i + 1), "(")) continue;
        if (prev_is_member_op(*part.toks, part.begin + i)) continue;
        add_use(t.text);
    }
}

void extract_def_use(Statement& s, const std::vector<CallOcc>& calls) {
    if (s.isFunctionHeader || s.isPreprocessor) return;
    const auto& toks = s.tokens;

    int begin = 0;
    for (int i = 0; i <= static_cast<int>(toks.size()); ++i) {
        if (i == static_cast<int>(toks.size()) || is_tok(toks[i], ";")) {
            if (i > begin) process_part(PartView{&toks, begin, i}, s);
            begin = i + 1;
        }
    }

    // Return-value binding `x = f(...)`: remember x and f so return
    // statements of f can be linked to this statement.
    {
        int depth = 0, assignIdx = -1;
        for (int i = 0; i < static_cast<int>(toks.size()); ++i) {
            if (is_tok(toks[i], "(") || is_tok(toks[i], "[")) ++depth;
            else if (is_tok(toks[i], ")") || is_tok(toks[i], "]")) --depth;
            else if (depth == 0 && is_assign_op(toks[i])) {
                assignIdx = i;
                break;
            }
        }
        if (assignIdx >= 0 && !s.strongDefs.empty()) {
            for (int i = assignIdx + 1; i < static_cast<int>(toks.size()) - 1;
                 ++i) {
                if (toks[i].kind == TokenKind::Identifier &&
                    is_tok(toks[i + 1], "(")) {
                    s.assignedFromCall = toks[i].text;
                    s.lhsVar = *s.strongDefs.begin();
                    break;
                }
            }
        }
    }

    // Conservative out-parameter rule: a call's bare argument
    // identifiers may be written by the callee (weak defs).
    for (const auto& occ : calls) {
        for (const auto& a : occ.args) {
            for (const auto& id : a.ids) {
                s.uses.insert(id);
                s.defs.insert(id);
            }
        }
    }
    // Address-of: `&x` both reads and may write x.
    for (int i = 0; i + 1 < static_cast<int>(toks.size()); ++i) {
        if (toks[i].kind == TokenKind::Operator && toks[i].text == "&" &&
            toks[i + 1].kind == TokenKind::Identifier) {
            bool unary = i == 0 || toks[i - 1].kind == TokenKind::Operator ||
                         is_tok(toks[i - 1], "(") || is_tok(toks[i - 1], ",");
            if (unary) {
                s.uses.insert(toks[i + 1].text);
                s.defs.insert(toks[i + 1].text);
            }
        }
    }
    // `delete p;` / `p = new T[n]`: trailing identifiers are reads.
    for (int i = 0; i < static_cast<int>(toks.size()); ++i) {
        if (toks[i].kind == TokenKind::Keyword &&
            (toks[i].text == "delete" || toks[i].text == "new")) {
            for (int j = i + 1; j < static_cast<int>(toks.size()); ++j) {
                if (is_tok(toks[j], ";")) break;
                if (toks[j].kind == TokenKind::Identifier &&
                    !(j + 1 < static_cast<int>(toks.size()) &&
                      is_tok(toks[j + 1], "(")))
                    s.uses.insert(toks[j].text);
            }
        }
    }
}

// ---------------------------------------------------------------------
// File structure: function boundaries by brace matching, loop extents.

struct FileStructure {
    bool balanced = true;
    int errorLine = 0;
    // (headerLine, closeLine, name); assigned innermost-last.
    std::vector<std::tuple<int, int, std::string>> functionRanges;
    std::map<std::string, std::pair<int, std::vector<std::string>>> headers;
    std::vector<std::pair<int, int>> loopRanges;
};

std::vector<std::string> parse_params(const std::vector<Token>& toks,
                                      int open, int close) {
    std::vector<std::string> params;
    int depth = 0, lastId = -1;
    for (int i = open + 1; i <= close; ++i) {
        const Token& t = toks[i];
        bool atEnd = i == close;
        if (!atEnd) {
            if (is_tok(t, "(") || is_tok(t, "[")) { ++depth; continue; }
            if (is_tok(t, ")") || is_tok(t, "]")) { --depth; continue; }
            if (depth > 0) continue;
            if (t.kind == TokenKind::Identifier) { lastId = i; continue; }
            if (!is_tok(t, ",")) continue;
        }
        if (lastId >= 0) params.push_back(toks[lastId].text);
        lastId = -1;
    }
    return params;
}

FileStructure analyze_file(const clex::SourceFile& file) {
    FileStructure fs;
    const auto& toks = file.tokens;

    // Balance check first.
    {
        int depth = 0;
        for (const auto& t : toks) {
            if (is_tok(t, "{")) ++depth;
            else if (is_tok(t, "}")) {
                if (--depth < 0) {
                    fs.balanced = false;
                    fs.errorLine = t.line;
                    return fs;
                }
            }
        }
        if (depth != 0) {
            fs.balanced = false;
            fs.errorLine = file.lines.empty()
                               ? 1
                               : static_cast<int>(file.lines.size());
            return fs;
        }
    }

    struct Scope {
        bool isFunction;
        std::string name;
        int headerLine;
    };
    std::vector<Scope> scopes;
    int segStart = 0;  // statement-boundary token index
    for (int i = 0; i < static_cast<int>(toks.size()); ++i) {
        const Token& t = toks[i];
        if (is_tok(t, ";") || is_tok(t, "}")) segStart = i + 1;
        if (is_tok(t, "}")) {
            if (!scopes.empty()) {
                Scope sc = scopes.back();
                scopes.pop_back();
                if (sc.isFunction)
                    fs.functionRanges.emplace_back(sc.headerLine, t.line,
                                                   sc.name);
            }
            continue;
        }
        if (toks[i].kind == TokenKind::Keyword &&
            (t.text == "for" || t.text == "while" || t.text == "do")) {
            // Loop extent: the braced body if present, otherwise up to
            // the next `;`.
            int bodyOpen = -1;
            int j = i + 1;
            if (t.text != "do" && j < static_cast<int>(toks.size()) &&
                is_tok(toks[j], "(")) {
                j = find_match(toks, j, "(", ")");
                if (j < 0) j = static_cast<int>(toks.size()) - 1;
                ++j;
            }
            if (j < static_cast<int>(toks.size()) && is_tok(toks[j], "{"))
                bodyOpen = j;
            if (bodyOpen >= 0) {
                int close = find_match(toks, bodyOpen, "{", "}");
                if (close > 0)
                    fs.loopRanges.emplace_back(t.line, toks[close].line);
            } else {
                for (int k = j; k < static_cast<int>(toks.size()); ++k) {
                    if (is_tok(toks[k], ";")) {
                        fs.loopRanges.emplace_back(t.line, toks[k].line);
                        break;
                    }
                }
            }
            continue;
        }
        if (!is_tok(t, "{")) continue;

        // Classify the block that opens here.
        bool isFunction = false;
        std::string name;
        int headerLine = t.line;
        std::vector<std::string> params;
        if (scopes.empty()) {
            bool sawAssign = false;
            for (int k = segStart; k < i; ++k)
                if (is_assign_op(toks[k])) sawAssign = true;
            // Find the parameter list: the last `)` before the brace.
            int closeParen = -1;
            for (int k = i - 1; k >= segStart; --k) {
                if (is_tok(toks[k], ")")) {
                    closeParen = k;
                    break;
                }
                // allow trailing qualifiers (const, noexcept) only
                if (toks[k].kind != TokenKind::Keyword &&
                    toks[k].kind != TokenKind::Identifier)
                    break;
            }
            if (!sawAssign && closeParen > segStart) {
                int openParen = -1;
                int depth = 0;
                for (int k = closeParen; k >= segStart; --k) {
                    if (is_tok(toks[k], ")")) ++depth;
                    else if (is_tok(toks[k], "(") && --depth == 0) {
                        openParen = k;
                        break;
                    }
                }
                if (openParen > segStart &&
                    toks[openParen - 1].kind == TokenKind::Identifier) {
                    isFunction = true;
                    name = toks[openParen - 1].text;
                    headerLine = toks[openParen - 1].line;
                    params = parse_params(toks, openParen, closeParen);
                }
            }
        }
        scopes.push_back(Scope{isFunction, name, headerLine});
        if (isFunction && !fs.headers.count(name))
            fs.headers[name] = {headerLine, std::move(params)};
        segStart = i + 1;
    }
    return fs;
}

}  // namespace

// ---------------------------------------------------------------------

DepGraph build_dep_graph(const std::vector<clex::SourceFile>& files) {
    DepGraph g;

    struct FileCtx {
        const clex::SourceFile* file;
        FileStructure structure;
    };
    std::vector<FileCtx> ctxs;
    for (const auto& f : files) {
        FileStructure fs = analyze_file(f);
        if (!fs.balanced) {
            g.diagnostics.push_back(
                Diagnostic{f.path, fs.errorLine,
                           "unbalanced braces, file skipped"});
            continue;
        }
        ctxs.push_back(FileCtx{&f, std::move(fs)});
    }

    // Statements: tokens grouped by line, bucketed by enclosing function.
    std::map<std::pair<std::string, std::string>, std::vector<StmtId>>
        buckets;  // (file, function) -> statement ids in line order
    for (const auto& ctx : ctxs) {
        const auto& f = *ctx.file;
        // line -> function, innermost range wins (ranges only nest with
        // non-function scopes, so any covering range is the function)
        auto function_of = [&](int line) -> std::pair<std::string, bool> {
            for (const auto& [hdr, close, name] : ctx.structure.functionRanges)
                if (line >= hdr && line <= close)
                    return {name, line == hdr};
            return {"<global>", false};
        };
        size_t i = 0;
        while (i < f.tokens.size()) {
            size_t j = i;
            while (j < f.tokens.size() &&
                   f.tokens[j].line == f.tokens[i].line)
                ++j;
            Statement st;
            st.file = f.path;
            st.line = f.tokens[i].line;
            st.tokens.assign(f.tokens.begin() + i, f.tokens.begin() + j);
            if (st.line - 1 < static_cast<int>(f.lines.size())) {
                const std::string& raw = f.lines[st.line - 1];
                size_t a = raw.find_first_not_of(' ');
                size_t b = raw.find_last_not_of(' ');
                st.text = a == std::string::npos
                              ? std::string()
                              : raw.substr(a, b - a + 1);
            }
            st.isPreprocessor = st.tokens.size() == 1 &&
                                st.tokens[0].kind == TokenKind::Punctuation &&
                                !st.tokens[0].text.empty() &&
                                st.tokens[0].text[0] == '#';
            auto [fn, isHeader] = function_of(st.line);
            st.function = fn;
            st.isFunctionHeader = isHeader;
            StmtId id = static_cast<StmtId>(g.statements.size());
            g.statements.push_back(std::move(st));
            buckets[{f.path, fn}].push_back(id);
            i = j;
        }
        // Function infos with parameter defs on the header statement.
        for (const auto& [name, hp] : ctx.structure.headers) {
            if (g.functions.count(name)) {
                g.diagnostics.push_back(Diagnostic{
                    f.path, hp.first,
                    "duplicate definition of function '" + name +
                        "', first definition used for binding"});
                continue;
            }
            FunctionInfo fi;
            fi.name = name;
            fi.file = f.path;
            fi.params = hp.second;
            for (const auto& [hdr, close, nm] : ctx.structure.functionRanges) {
                if (nm == name && hdr == hp.first) {
                    fi.bodyBegin = hdr;
                    fi.bodyEnd = close;
                }
            }
            g.functions[name] = std::move(fi);
        }
    }

    // Resolve header statement ids and parameter defs.
    for (size_t id = 0; id < g.statements.size(); ++id) {
        Statement& st = g.statements[id];
        if (!st.isFunctionHeader) continue;
        auto it = g.functions.find(st.function);
        if (it == g.functions.end() || it->second.file != st.file) continue;
        if (it->second.header >= 0) continue;
        it->second.header = static_cast<StmtId>(id);
        for (const auto& p : it->second.params) {
            st.defs.insert(p);
            st.strongDefs.insert(p);
        }
    }

    // Def/use extraction plus per-statement call occurrences.
    std::vector<std::vector<CallOcc>> stmtCalls(g.statements.size());
    for (size_t id = 0; id < g.statements.size(); ++id) {
        stmtCalls[id] = scan_calls(g.statements[id]);
        extract_def_use(g.statements[id], stmtCalls[id]);
    }

    // Return statements per function.
    for (size_t id = 0; id < g.statements.size(); ++id) {
        const Statement& st = g.statements[id];
        if (st.tokens.empty() || st.tokens[0].kind != TokenKind::Keyword ||
            st.tokens[0].text != "return")
            continue;
        auto it = g.functions.find(st.function);
        if (it != g.functions.end() && it->second.file == st.file)
            it->second.returns.push_back(static_cast<StmtId>(id));
    }

    // Loop ranges per file for the wrap-around reaching rule.
    std::map<std::string, std::vector<std::pair<int, int>>> loops;
    for (const auto& ctx : ctxs)
        loops[ctx.file->path] = ctx.structure.loopRanges;

    // Intraprocedural reaching def-use edges.
    std::set<std::tuple<StmtId, StmtId, std::string>> seen;
    auto add_edge = [&](StmtId src, StmtId dst, EdgeKind kind,
                        std::string var, std::vector<std::string> srcVars) {
        if (src == dst) return;
        if (kind == EdgeKind::DefUse &&
            !seen.insert({src, dst, var}).second)
            return;
        g.dataEdges.push_back(
            DataEdge{src, dst, kind, std::move(var), std::move(srcVars)});
    };

    for (const auto& [key, ids] : buckets) {
        const auto& fileLoops = loops[key.first];
        for (size_t ui = 0; ui < ids.size(); ++ui) {
            const Statement& use = g.statements[ids[ui]];
            for (const auto& v : use.uses) {
                // Walk back to the closest strong def, collecting weak
                // defs on the way.
                for (int di = static_cast<int>(ui) - 1; di >= 0; --di) {
                    const Statement& def = g.statements[ids[di]];
                    if (!def.defs.count(v)) continue;
                    add_edge(ids[di], ids[ui], EdgeKind::DefUse, v, {});
                    if (def.strongDefs.count(v)) break;
                }
                // A def inside a loop body reaches uses earlier in the
                // same body.
                for (const auto& [lo, hi] : fileLoops) {
                    if (use.line < lo || use.line > hi) continue;
                    for (size_t di = ui; di < ids.size(); ++di) {
                        const Statement& def = g.statements[ids[di]];
                        if (def.line < lo || def.line > hi) break;
                        if (ids[di] != ids[ui] && def.defs.count(v))
                            add_edge(ids[di], ids[ui], EdgeKind::DefUse, v,
                                     {});
                    }
                }
            }
        }
    }

    // Interprocedural binding edges and the call-edge list.
    for (size_t id = 0; id < g.statements.size(); ++id) {
        const Statement& st = g.statements[id];
        for (const auto& occ : stmtCalls[id]) {
            g.callEdges.emplace_back(static_cast<StmtId>(id), occ.name);
            if (occ.member) continue;
            auto it = g.functions.find(occ.name);
            if (it == g.functions.end() || it->second.header < 0) continue;
            const FunctionInfo& fi = it->second;
            size_t n = std::min(occ.args.size(), fi.params.size());
            for (size_t ai = 0; ai < n; ++ai) {
                add_edge(static_cast<StmtId>(id), fi.header,
                         EdgeKind::ParamBind, fi.params[ai],
                         occ.args[ai].ids);
            }
            if (!st.lhsVar.empty() && st.assignedFromCall == occ.name) {
                for (StmtId r : fi.returns) {
                    const Statement& ret = g.statements[r];
                    add_edge(r, static_cast<StmtId>(id),
                             EdgeKind::ReturnBind, st.lhsVar,
                             {ret.uses.begin(), ret.uses.end()});
                }
            }
        }
    }

    // Adjacency.
    g.edgesIn.assign(g.statements.size(), {});
    g.edgesOut.assign(g.statements.size(), {});
    for (size_t ei = 0; ei < g.dataEdges.size(); ++ei) {
        g.edgesOut[g.dataEdges[ei].src].push_back(static_cast<int>(ei));
        g.edgesIn[g.dataEdges[ei].dst].push_back(static_cast<int>(ei));
    }
    return g;
}

// ---------------------------------------------------------------------
// Call-site discovery.

std::vector<CallSite> find_call_sites(const DepGraph& graph,
                                      const CallTable& table) {
    std::vector<CallSite> sites;
    for (size_t id = 0; id < graph.statements.size(); ++id) {
        const Statement& st = graph.statements[id];
        for (const auto& occ : scan_calls(st)) {
            std::optional<CallDirection> dir;
            std::string callee = occ.name;
            if (occ.member) {
                dir = table.match_member(occ.base, occ.name);
                callee = occ.base + "." + occ.name;
            } else {
                dir = table.match(occ.name);
            }
            if (!dir) continue;
            CallSite cs;
            cs.callee = callee;
            cs.stmt = static_cast<StmtId>(id);
            cs.args = occ.args;
            cs.direction = *dir;
            cs.matchedEntry = occ.name;
            sites.push_back(std::move(cs));
        }
        // `new` / `delete` keyword forms.
        const auto& toks = st.tokens;
        for (int i = 0; i < static_cast<int>(toks.size()); ++i) {
            if (toks[i].kind != TokenKind::Keyword) continue;
            if (toks[i].text != "new" && toks[i].text != "delete") continue;
            auto dir = table.match(toks[i].text);
            if (!dir) continue;
            Arg a;
            int end = static_cast<int>(toks.size());
            for (int j = i + 1; j < end; ++j) {
                if (is_tok(toks[j], ";")) { end = j; break; }
            }
            a.text = join_tokens(toks, i + 1, end);
            a.ids = region_ids(toks, i + 1, end);
            CallSite cs;
            cs.callee = toks[i].text;
            cs.stmt = static_cast<StmtId>(id);
            cs.args.push_back(std::move(a));
            cs.direction = *dir;
            cs.matchedEntry = toks[i].text;
            sites.push_back(std::move(cs));
        }
        // Stream objects used without a call (cin >> x, stdin).
        if (!st.isPreprocessor && !st.isFunctionHeader) {
            for (int i = 0; i < static_cast<int>(toks.size()); ++i) {
                if (toks[i].kind != TokenKind::Identifier) continue;
                if (toks[i].text != "cin" && toks[i].text != "stdin")
                    continue;
                if (i + 1 < static_cast<int>(toks.size()) &&
                    is_tok(toks[i + 1], "("))
                    continue;
                if (prev_is_member_op(toks, i)) continue;
                auto dir = table.match(toks[i].text);
                if (!dir) continue;
                Arg a;
                a.text = st.text;
                for (const auto& v : region_ids(toks, 0,
                                                static_cast<int>(toks.size())))
                    if (v != toks[i].text) a.ids.push_back(v);
                CallSite cs;
                cs.callee = toks[i].text;
                cs.stmt = static_cast<StmtId>(id);
                cs.args.push_back(std::move(a));
                cs.direction = *dir;
                cs.matchedEntry = toks[i].text;
                sites.push_back(std::move(cs));
                break;  // one site per statement for stream objects
            }
        }
    }
    return sites;
}

// ---------------------------------------------------------------------
// Slicing: enumerate linear paths over the labeled dependency edges.

namespace {

struct Next {
    StmtId stmt;
    std::set<std::string> active;
    int hops;
};

// Variables that keep a backward traversal going once it reaches the
// definition statement `st` through variable `var`.  Headers continue
// through the parameter itself (into ParamBind edges); ordinary
// statements continue through everything they read, plus the assigned
// variable when a call result feeds it (into ReturnBind edges).
std::set<std::string> backward_continuation(const Statement& st,
                                            const std::string& var) {
    if (st.isFunctionHeader) return {var};
    std::set<std::string> c = st.uses;
    if (!st.lhsVar.empty()) c.insert(st.lhsVar);
    return c;
}

std::vector<Next> expand(const DepGraph& g, StmtId s,
                         const std::set<std::string>& active, int hops,
                         bool backward, const SliceOptions& opt) {
    std::map<StmtId, Next> merged;
    const auto& idxs = backward ? g.edgesIn[s] : g.edgesOut[s];
    for (int ei : idxs) {
        const DataEdge& e = g.dataEdges[ei];
        StmtId nb = backward ? e.src : e.dst;
        bool interproc = e.kind != EdgeKind::DefUse;
        if (interproc && hops + 1 > opt.maxInterproceduralHops) continue;

        bool triggered = false;
        std::set<std::string> cont;
        if (backward) {
            triggered = active.count(e.var) > 0;
            if (!triggered) continue;
            if (e.kind == EdgeKind::DefUse)
                cont = backward_continuation(g.stmt(e.src), e.var);
            else
                cont.insert(e.srcVars.begin(), e.srcVars.end());
        } else {
            if (e.kind == EdgeKind::DefUse) {
                triggered = active.count(e.var) > 0;
                if (triggered) {
                    cont = g.stmt(e.dst).defs;
                    cont.insert(e.var);
                }
            } else {
                for (const auto& v : e.srcVars)
                    if (active.count(v)) { triggered = true; break; }
                if (triggered) cont.insert(e.var);
            }
            if (!triggered) continue;
        }

        auto [it, inserted] = merged.try_emplace(
            nb, Next{nb, std::move(cont), hops + (interproc ? 1 : 0)});
        if (!inserted) {
            it->second.active.insert(cont.begin(), cont.end());
            it->second.hops = std::min(it->second.hops,
                                       hops + (interproc ? 1 : 0));
        }
    }
    std::vector<Next> out;
    out.reserve(merged.size());
    for (auto& [k, v] : merged) out.push_back(std::move(v));
    return out;
}

std::vector<std::vector<StmtId>> enumerate_paths(
    const DepGraph& g, StmtId start, const std::set<std::string>& seed,
    bool backward, const SliceOptions& opt) {
    std::vector<std::vector<StmtId>> paths;
    std::vector<StmtId> path{start};
    std::set<StmtId> onPath{start};

    std::function<void(StmtId, const std::set<std::string>&, int)> dfs =
        [&](StmtId s, const std::set<std::string>& active, int hops) {
            if (static_cast<int>(paths.size()) >= opt.maxRawPaths) return;
            std::vector<Next> nexts = expand(g, s, active, hops, backward,
                                             opt);
            nexts.erase(std::remove_if(nexts.begin(), nexts.end(),
                                       [&](const Next& n) {
                                           return onPath.count(n.stmt) > 0;
                                       }),
                        nexts.end());
            if (nexts.empty()) {
                paths.push_back(path);
                return;
            }
            for (const Next& n : nexts) {
                path.push_back(n.stmt);
                onPath.insert(n.stmt);
                dfs(n.stmt, n.active, n.hops);
                onPath.erase(n.stmt);
                path.pop_back();
                if (static_cast<int>(paths.size()) >= opt.maxRawPaths)
                    return;
            }
        };
    dfs(start, seed, 0);
    return paths;
}

std::vector<std::vector<StmtId>> finalize_chains(
    std::vector<std::vector<StmtId>> paths, bool backward,
    const SliceOptions& opt) {
    if (backward)
        for (auto& p : paths) std::reverse(p.begin(), p.end());

    // Merge: drop any chain whose statement set is contained in
    // another's (a shortcut path through the same dependencies).
    std::vector<std::set<StmtId>> sets;
    sets.reserve(paths.size());
    for (const auto& p : paths) sets.emplace_back(p.begin(), p.end());
    std::vector<bool> drop(paths.size(), false);
    for (size_t a = 0; a < paths.size(); ++a) {
        for (size_t b = 0; b < paths.size(); ++b) {
            if (a == b || drop[a]) continue;
            if (drop[b]) continue;
            if (sets[a] == sets[b]) {
                if (a > b) drop[a] = true;
                continue;
            }
            if (std::includes(sets[b].begin(), sets[b].end(),
                              sets[a].begin(), sets[a].end()))
                drop[a] = true;
        }
    }
    std::vector<std::vector<StmtId>> chains;
    for (size_t a = 0; a < paths.size(); ++a)
        if (!drop[a]) chains.push_back(std::move(paths[a]));

    std::stable_sort(chains.begin(), chains.end(),
                     [](const auto& x, const auto& y) {
                         return x.front() < y.front();
                     });
    if (static_cast<int>(chains.size()) > opt.maxChains)
        chains.resize(opt.maxChains);
    return chains;
}

std::vector<Slice> slice_impl(const DepGraph& g, const CallSite& call,
                              int argIndex, bool backward,
                              const SliceOptions& opt) {
    if (argIndex < 0 || argIndex >= static_cast<int>(call.args.size()))
        throw ArgOutOfRange("argument index " + std::to_string(argIndex) +
                            " out of range for call to " + call.callee);
    const auto& ids = call.args[argIndex].ids;
    std::set<std::string> seed(ids.begin(), ids.end());

    std::vector<std::vector<StmtId>> chains;
    if (seed.empty()) {
        // Literal-only argument: nothing flows, the call stands alone.
        chains.push_back({call.stmt});
    } else {
        chains = finalize_chains(
            enumerate_paths(g, call.stmt, seed, backward, opt), backward,
            opt);
    }

    std::vector<Slice> out;
    for (auto& c : chains) {
        Slice s;
        s.keyCall = call;
        s.argIndex = argIndex;
        s.direction = call.direction;
        s.chain = std::move(c);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::vector<Slice> backward_slice(const DepGraph& g, const CallSite& call,
                                  int argIndex, const SliceOptions& opt) {
    if (call.direction != CallDirection::Backward)
        throw std::invalid_argument(
            "backward_slice requires a backward call site");
    return slice_impl(g, call, argIndex, true, opt);
}

std::vector<Slice> forward_slice(const DepGraph& g, const CallSite& call,
                                 int argIndex, const SliceOptions& opt) {
    if (call.direction != CallDirection::Forward)
        throw std::invalid_argument(
            "forward_slice requires a forward call site");
    return slice_impl(g, call, argIndex, false, opt);
}

}  // namespace vuldet::dataflow
