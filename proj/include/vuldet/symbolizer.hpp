#pragma once

#include <map>
#include <string>
#include <vector>

#include "vuldet/calltable.hpp"
#include "vuldet/gadget.hpp"
#include "vuldet/token.hpp"

namespace vuldet::symbolizer {

// A gadget after one-to-one renaming of user-defined identifiers:
// variables become VARn, user functions FUNn, numbered by first
// occurrence within the gadget.  Library names, keywords and numeric
// literals pass through; string/char literals normalize to STR/CHR.
struct SymbolicGadget {
    std::string gadgetId;
    std::vector<clex::Token> tokens;       // renamed, gadget order
    std::vector<int> statementOffsets;     // start index per statement
    std::map<std::string, std::string> varMap;
    std::map<std::string, std::string> funMap;

    std::vector<std::string> token_texts() const;
    std::string canonical_text() const;  // texts joined with single spaces
};

struct SymbolizeOptions {
    bool normalizeStringLiterals = true;  // "..." -> STR, '...' -> CHR
};

SymbolicGadget symbolize(const gadget::CodeGadget& g,
                         const dataflow::CallTable& knownLibraryNames,
                         const SymbolizeOptions& options = {});

}  // namespace vuldet::symbolizer
