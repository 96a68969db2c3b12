#include "vuldet/calltable.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vuldet::dataflow {

const char* to_string(CallDirection d) {
    return d == CallDirection::Forward ? "forward" : "backward";
}

CallTable CallTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open call table: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

CallTable CallTable::parse(std::string_view text, std::string sourceName) {
    CallTable table;
    size_t lineNo = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        std::string_view line = text.substr(
            pos, end == std::string_view::npos ? text.size() - pos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++lineNo;
        if (line.empty() || line.front() == '#') continue;
        size_t tab = line.find('\t');
        if (tab == std::string_view::npos) {
            throw std::runtime_error(sourceName + ":" + std::to_string(lineNo) +
                                     ": expected <name><TAB><F|B>");
        }
        Entry e;
        e.name = std::string(line.substr(0, tab));
        std::string_view dir = line.substr(tab + 1);
        while (!dir.empty() && (dir.back() == ' ' || dir.back() == '\r'))
            dir.remove_suffix(1);
        if (dir == "F") {
            e.direction = CallDirection::Forward;
        } else if (dir == "B") {
            e.direction = CallDirection::Backward;
        } else {
            throw std::runtime_error(sourceName + ":" + std::to_string(lineNo) +
                                     ": direction must be F or B");
        }
        if (!e.name.empty() && e.name.back() == '*') {
            e.wildcard = true;
            e.name.pop_back();
        }
        size_t dot = e.name.find('.');
        if (dot != std::string::npos) {
            e.dotted = true;
            e.method = e.name.substr(dot + 1);
        }
        table.entries_.push_back(std::move(e));
    }
    return table;
}

void CallTable::merge(const CallTable& other) {
    for (const auto& e : other.entries_) {
        bool dup = false;
        for (const auto& mine : entries_) {
            if (mine.name == e.name && mine.wildcard == e.wildcard) {
                dup = true;
                break;
            }
        }
        if (!dup) entries_.push_back(e);
    }
}

namespace {
bool name_matches(const CallTable::Entry& e, std::string_view name) {
    if (e.wildcard) return name.substr(0, e.name.size()) == e.name;
    return name == e.name;
}
bool method_matches(const CallTable::Entry& e, std::string_view method) {
    if (e.wildcard) return method.substr(0, e.method.size()) == e.method;
    return method == e.method;
}
}  // namespace

std::optional<CallDirection> CallTable::match(std::string_view name) const {
    for (const auto& e : entries_) {
        if (!e.dotted && name_matches(e, name)) return e.direction;
    }
    return std::nullopt;
}

std::optional<CallDirection> CallTable::match_member(
    std::string_view base, std::string_view method) const {
    std::string dottedName = std::string(base) + "." + std::string(method);
    for (const auto& e : entries_) {
        if (e.dotted &&
            (name_matches(e, dottedName) || method_matches(e, method)))
            return e.direction;
    }
    // Plain entries also match member calls by method name.
    for (const auto& e : entries_) {
        if (!e.dotted && name_matches(e, method)) return e.direction;
    }
    return std::nullopt;
}

bool CallTable::contains_name(std::string_view name) const {
    if (match(name)) return true;
    for (const auto& e : entries_) {
        if (e.dotted && method_matches(e, name)) return true;
    }
    return false;
}

}  // namespace vuldet::dataflow
