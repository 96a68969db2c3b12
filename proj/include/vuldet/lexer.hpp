#pragma once

#include <string_view>

#include "vuldet/token.hpp"

namespace vuldet::clex {

/// Lexes C/C++ source text into a classified token stream.
///
/// Non-ASCII bytes are dropped before scanning, `//` and `/* */`
/// comments are removed, and string/char literals are kept as single
/// tokens.  Preprocessor directives become one whole-line Punctuation
/// token (continuation lines folded in).  Unterminated comments and
/// string literals are reported as diagnostics and scanning resumes at
/// the start of the next line.
SourceFile lex_file(std::string_view raw_text, std::string path);

/// True iff `text` is a C89/C99 keyword or one of the fixed C++ subset.
bool is_keyword(std::string_view text);

}  // namespace vuldet::clex
