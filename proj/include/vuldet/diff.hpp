#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>

namespace vuldet::gadget {

/// Parses a unified diff and returns the (file, line) pairs deleted or
/// modified by the patch: the '-' lines of each hunk, numbered in the
/// original file, attributed to the `--- ` path (leading "a/" stripped).
std::set<std::pair<std::string, int>> parse_unified_diff(
    std::string_view text);

/// Reads one diff file, or every *.diff / *.patch under a directory.
std::set<std::pair<std::string, int>> load_patch_lines(
    const std::string& path);

}  // namespace vuldet::gadget
