#include "vuldet/diff.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vuldet::gadget {

std::set<std::pair<std::string, int>> parse_unified_diff(
    std::string_view text) {
    std::set<std::pair<std::string, int>> out;
    std::string currentFile;
    int oldLine = 0;
    bool inHunk = false;

    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, end == std::string_view::npos ? text.size() - pos
                                               : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;

        if (line.rfind("--- ", 0) == 0) {
            std::string_view p = line.substr(4);
            size_t tab = p.find('\t');
            if (tab != std::string_view::npos) p = p.substr(0, tab);
            if (p.rfind("a/", 0) == 0) p = p.substr(2);
            currentFile = std::string(p);
            inHunk = false;
            continue;
        }
        if (line.rfind("+++ ", 0) == 0) continue;
        if (line.rfind("@@", 0) == 0) {
            // "@@ -l[,c] +l[,c] @@"
            size_t minus = line.find('-');
            if (minus == std::string_view::npos) continue;
            oldLine = 0;
            size_t i = minus + 1;
            while (i < line.size() && isdigit(static_cast<unsigned char>(
                                          line[i]))) {
                oldLine = oldLine * 10 + (line[i] - '0');
                ++i;
            }
            inHunk = true;
            continue;
        }
        if (!inHunk || currentFile.empty() || currentFile == "/dev/null")
            continue;
        if (line.rfind("-", 0) == 0 && line.rfind("---", 0) != 0) {
            out.insert({currentFile, oldLine});
            ++oldLine;
        } else if (line.rfind("+", 0) == 0) {
            // added line, no old-file number consumed
        } else {
            ++oldLine;  // context line
        }
    }
    return out;
}

std::set<std::pair<std::string, int>> load_patch_lines(
    const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::recursive_directory_iterator(path)) {
            if (!e.is_regular_file()) continue;
            auto ext = e.path().extension().string();
            if (ext == ".diff" || ext == ".patch")
                files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    std::set<std::pair<std::string, int>> out;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open diff: " + f);
        std::stringstream ss;
        ss << in.rdbuf();
        auto lines = parse_unified_diff(ss.str());
        out.insert(lines.begin(), lines.end());
    }
    return out;
}

}  // namespace vuldet::gadget
