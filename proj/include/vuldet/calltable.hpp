#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vuldet::dataflow {

enum class CallDirection { Forward, Backward };

const char* to_string(CallDirection d);

// Table of library/API key-point names.  File format: one entry per
// line, `<name><TAB><F|B>`; a trailing '*' makes the name a prefix
// wildcard; '#' starts a comment line.  Dotted entries (`class.method`)
// match member calls by their method component.
class CallTable {
public:
    struct Entry {
        std::string name;       // without the wildcard star
        bool wildcard = false;  // prefix match
        bool dotted = false;    // class.method entry
        std::string method;     // method component for dotted entries
        CallDirection direction = CallDirection::Backward;
    };

    static CallTable load(const std::string& path);
    static CallTable parse(std::string_view text, std::string sourceName);

    void merge(const CallTable& other);

    // Plain-name match (non-member call or keyword form).
    std::optional<CallDirection> match(std::string_view name) const;
    // Member-call match: tries `base.method` against dotted entries and
    // `method` against plain entries.
    std::optional<CallDirection> match_member(std::string_view base,
                                              std::string_view method) const;

    // True if the name matches any entry; used by the symbolizer to keep
    // library names unrenamed.
    bool contains_name(std::string_view name) const;

    const std::vector<Entry>& entries() const { return entries_; }
    size_t size() const { return entries_.size(); }

private:
    std::vector<Entry> entries_;
};

}  // namespace vuldet::dataflow
