#include "vuldet/symbolizer.hpp"

#include "vuldet/lexer.hpp"

namespace vuldet::symbolizer {

std::vector<std::string> SymbolicGadget::token_texts() const {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

std::string SymbolicGadget::canonical_text() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t.text;
    }
    return out;
}

SymbolicGadget symbolize(const gadget::CodeGadget& g,
                         const dataflow::CallTable& knownLibraryNames,
                         const SymbolizeOptions& options) {
    SymbolicGadget out;
    out.gadgetId = g.id;

    auto map_name = [](std::map<std::string, std::string>& m,
                       const std::string& name, const char* prefix) {
        auto it = m.find(name);
        if (it != m.end()) return it->second;
        std::string sym = prefix + std::to_string(m.size() + 1);
        m.emplace(name, sym);
        return sym;
    };

    for (const auto& st : g.statements) {
        out.statementOffsets.push_back(static_cast<int>(out.tokens.size()));
        const auto& toks = st.tokens;
        for (size_t i = 0; i < toks.size(); ++i) {
            clex::Token t = toks[i];
            switch (t.kind) {
                case clex::TokenKind::Identifier: {
                    if (knownLibraryNames.contains_name(t.text)) break;
                    bool callPos = i + 1 < toks.size() &&
                                   toks[i + 1].text == "(";
                    t.text = callPos
                                 ? map_name(out.funMap, t.text, "FUN")
                                 : map_name(out.varMap, t.text, "VAR");
                    break;
                }
                case clex::TokenKind::StringLiteral:
                    if (options.normalizeStringLiterals) t.text = "STR";
                    break;
                case clex::TokenKind::CharLiteral:
                    if (options.normalizeStringLiterals) t.text = "CHR";
                    break;
                default:
                    break;  // keywords, operators, numbers unchanged
            }
            out.tokens.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace vuldet::symbolizer
