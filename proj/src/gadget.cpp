#include "vuldet/gadget.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "vuldet/lexer.hpp"

namespace vuldet::gadget {

namespace {
constexpr char kUnitSep = '\x1f';

// Suffix-tolerant path comparison: diff and manifest paths rarely match
// the corpus layout exactly.
bool file_matches(const std::string& a, const std::string& b) {
    if (a == b) return true;
    if (a.size() > b.size())
        return a.size() > b.size() + 1 &&
               a.compare(a.size() - b.size() - 1, b.size() + 1, "/" + b) == 0;
    return b.size() > a.size() + 1 &&
           b.compare(b.size() - a.size() - 1, a.size() + 1, "/" + a) == 0;
}

bool hits_any(const CodeGadget& g, const FileLineSet& lines) {
    for (const auto& st : g.statements)
        for (const auto& [file, line] : lines)
            if (line == st.line && file_matches(file, st.file)) return true;
    return false;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == kUnitSep || c == '\n') c = ' ';
    return s;
}
}  // namespace

const char* to_string(GadgetDirection d) {
    switch (d) {
        case GadgetDirection::Forward: return "forward";
        case GadgetDirection::Backward: return "backward";
        case GadgetDirection::MixedBackward: return "mixed-backward";
    }
    return "?";
}

const char* to_string(Label l) {
    switch (l) {
        case Label::NotVulnerable: return "0";
        case Label::Vulnerable: return "1";
        case Label::Unlabeled: return "-";
    }
    return "?";
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::NvdDiff: return "nvd-diff";
        case Provenance::SardGood: return "sard-good";
        case Provenance::SardBadOrMixed: return "sard-bad-mixed";
        case Provenance::Target: return "target";
    }
    return "?";
}

GadgetDatabase::Counts GadgetDatabase::counts() const {
    Counts c;
    for (const auto& g : gadgets) {
        if (g.label == Label::Vulnerable) ++c.vulnerable;
        else if (g.label == Label::NotVulnerable) ++c.notVulnerable;
        else ++c.unlabeled;
    }
    return c;
}

std::string gadget_id(const std::vector<GadgetStatement>& statements,
                      const std::string& callee) {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& st : statements) {
        mix(st.text);
        mix("\x1f");
    }
    mix(callee);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

CodeGadget assemble(const dataflow::DepGraph& graph,
                    const std::vector<dataflow::Slice>& slices,
                    const AssembleOptions& options) {
    if (slices.empty()) throw EmptySliceSet("no slices to assemble");
    for (const auto& s : slices) {
        if (s.keyCall.stmt != slices.front().keyCall.stmt ||
            s.keyCall.callee != slices.front().keyCall.callee)
            throw std::invalid_argument(
                "assemble requires slices of a single call site");
    }

    // First-appearance order of functions over the concatenated chains,
    // plus the order constraints each individual chain carries.
    struct Key {
        std::string file, function;
        bool operator<(const Key& o) const {
            return std::tie(file, function) < std::tie(o.file, o.function);
        }
    };
    std::vector<Key> order;  // first appearance
    std::map<Key, std::set<dataflow::StmtId>> pieces;
    std::set<std::pair<Key, Key>> constraints;
    for (const auto& s : slices) {
        std::vector<Key> seq;
        for (dataflow::StmtId id : s.chain) {
            const auto& st = graph.stmt(id);
            Key k{st.file, st.function};
            pieces[k].insert(id);
            if (std::find(order.begin(), order.end(), k) == order.end())
                order.push_back(k);
            if (std::find(seq.begin(), seq.end(), k) == seq.end())
                seq.push_back(k);
        }
        for (size_t i = 0; i + 1 < seq.size(); ++i)
            constraints.insert({seq[i], seq[i + 1]});
    }

    // Topological order over the constraints; ties and cycles fall back
    // to first-appearance order.
    std::vector<Key> pieceOrder;
    {
        std::vector<Key> remaining = order;
        auto blocked = [&](const Key& k) {
            for (const auto& [a, b] : constraints) {
                if (b < k || k < b) continue;  // b != k
                if (std::find(remaining.begin(), remaining.end(), a) !=
                    remaining.end())
                    return true;
            }
            return false;
        };
        while (!remaining.empty()) {
            bool picked = false;
            for (auto it = remaining.begin(); it != remaining.end(); ++it) {
                if (!blocked(*it)) {
                    pieceOrder.push_back(*it);
                    remaining.erase(it);
                    picked = true;
                    break;
                }
            }
            if (!picked) {  // constraint cycle
                pieceOrder.push_back(remaining.front());
                remaining.erase(remaining.begin());
            }
        }
    }
    if (options.shufflePieces) {
        std::mt19937_64 rng(options.seed);
        std::shuffle(pieceOrder.begin(), pieceOrder.end(), rng);
    }

    CodeGadget g;
    const auto& key = slices.front().keyCall;
    g.callee = key.callee;
    const auto& keyStmt = graph.stmt(key.stmt);
    g.keyFile = keyStmt.file;
    g.keyLine = keyStmt.line;
    if (key.direction == dataflow::CallDirection::Forward) {
        g.direction = GadgetDirection::Forward;
    } else {
        g.direction = slices.size() > 1 ? GadgetDirection::MixedBackward
                                        : GadgetDirection::Backward;
    }
    for (const auto& k : pieceOrder) {
        std::vector<dataflow::StmtId> ids(pieces[k].begin(), pieces[k].end());
        std::sort(ids.begin(), ids.end(),
                  [&](dataflow::StmtId a, dataflow::StmtId b) {
                      return graph.stmt(a).line < graph.stmt(b).line;
                  });
        int lastLine = -1;
        for (dataflow::StmtId id : ids) {
            const auto& st = graph.stmt(id);
            if (st.line == lastLine) continue;  // duplicate (file, line)
            lastLine = st.line;
            GadgetStatement gs;
            gs.file = st.file;
            gs.function = st.function;
            gs.line = st.line;
            gs.text = st.text;
            gs.tokens = st.tokens;
            g.statements.push_back(std::move(gs));
        }
    }
    g.id = gadget_id(g.statements, g.callee);
    // Program identity defaults to the key statement's directory; the
    // extraction pipeline overrides it with the corpus-level program id.
    size_t slash = g.keyFile.find_last_of('/');
    g.program = slash == std::string::npos ? g.keyFile
                                           : g.keyFile.substr(0, slash);
    return g;
}

CodeGadget& label_by_diff(CodeGadget& g, const FileLineSet& patchLines) {
    bool hit = hits_any(g, patchLines);
    g.label = hit ? Label::Vulnerable : Label::NotVulnerable;
    g.needsReview = hit;
    return g;
}

CodeGadget& label_by_sard(CodeGadget& g, SardClass programClass,
                          const FileLineSet& vulnerableLines) {
    if (programClass == SardClass::Good) {
        g.label = Label::NotVulnerable;
        return g;
    }
    if (vulnerableLines.empty())
        throw MissingVulnerableLineAnnotation(
            "bad/mixed program has no flagged lines (gadget " + g.id + ")");
    g.label = hits_any(g, vulnerableLines) ? Label::Vulnerable
                                           : Label::NotVulnerable;
    return g;
}

ConflictResolution resolve_conflicts(const GadgetDatabase& db) {
    std::map<std::string, std::pair<bool, bool>> seenLabels;  // text -> (0,1)
    auto key_of = [](const CodeGadget& g) {
        if (!g.symbolicText.empty()) return g.symbolicText;
        std::string k;
        for (const auto& st : g.statements) {
            k += st.text;
            k.push_back('\n');
        }
        return k;
    };
    for (const auto& g : db.gadgets) {
        if (g.label == Label::Unlabeled) continue;
        auto& flags = seenLabels[key_of(g)];
        if (g.label == Label::NotVulnerable) flags.first = true;
        else flags.second = true;
    }
    ConflictResolution res;
    for (const auto& g : db.gadgets) {
        if (g.label != Label::Unlabeled) {
            const auto& flags = seenLabels[key_of(g)];
            if (flags.first && flags.second) {
                ++res.removed;
                continue;
            }
        }
        res.db.gadgets.push_back(g);
    }
    return res;
}

std::string serialize_gadget(const CodeGadget& g) {
    std::string out;
    auto field = [&](const std::string& s) {
        if (!out.empty()) out.push_back(kUnitSep);
        out += sanitize(s);
    };
    field(g.id);
    field(to_string(g.provenance));
    field(to_string(g.direction));
    field(g.callee);
    field(to_string(g.label));
    for (const auto& st : g.statements) {
        field(st.file);
        field(st.function);
        field(std::to_string(st.line));
        field(st.text);
    }
    field(g.program);
    out.push_back('\n');
    return out;
}

void save_database(const GadgetDatabase& db, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write gadget database: " + path);
    for (const auto& g : db.gadgets) out << serialize_gadget(g);
}

namespace {
Provenance parse_provenance(const std::string& s) {
    if (s == "nvd-diff") return Provenance::NvdDiff;
    if (s == "sard-good") return Provenance::SardGood;
    if (s == "sard-bad-mixed") return Provenance::SardBadOrMixed;
    return Provenance::Target;
}
GadgetDirection parse_direction(const std::string& s) {
    if (s == "forward") return GadgetDirection::Forward;
    if (s == "mixed-backward") return GadgetDirection::MixedBackward;
    return GadgetDirection::Backward;
}
Label parse_label(const std::string& s) {
    if (s == "1") return Label::Vulnerable;
    if (s == "0") return Label::NotVulnerable;
    return Label::Unlabeled;
}
}  // namespace

GadgetDatabase load_database(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open gadget database: " + path);
    GadgetDatabase db;
    std::string line;
    size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            size_t sep = line.find(kUnitSep, pos);
            fields.push_back(line.substr(
                pos, sep == std::string::npos ? std::string::npos
                                              : sep - pos));
            if (sep == std::string::npos) break;
            pos = sep + 1;
        }
        bool hasProgram = fields.size() >= 6 && (fields.size() - 6) % 4 == 0;
        bool bare = fields.size() >= 5 && (fields.size() - 5) % 4 == 0;
        if (!hasProgram && !bare)
            throw std::runtime_error(path + ":" + std::to_string(lineNo) +
                                     ": malformed gadget record");
        CodeGadget g;
        g.id = fields[0];
        g.provenance = parse_provenance(fields[1]);
        g.direction = parse_direction(fields[2]);
        g.callee = fields[3];
        g.label = parse_label(fields[4]);
        size_t stmtFields = fields.size() - 5 - (hasProgram ? 1 : 0);
        for (size_t i = 0; i < stmtFields; i += 4) {
            GadgetStatement st;
            st.file = fields[5 + i];
            st.function = fields[6 + i];
            st.line = std::stoi(fields[7 + i]);
            st.text = fields[8 + i];
            auto lexed = clex::lex_file(st.text, st.file);
            st.tokens = lexed.tokens;
            for (auto& t : st.tokens) t.line = st.line;
            g.statements.push_back(std::move(st));
        }
        if (hasProgram) g.program = fields.back();
        if (!g.statements.empty()) {
            bool fwd = g.direction == GadgetDirection::Forward;
            const auto& anchor =
                fwd ? g.statements.front() : g.statements.back();
            g.keyFile = anchor.file;
            g.keyLine = anchor.line;
            if (g.program.empty()) {
                const std::string& f = g.statements.front().file;
                size_t slash = f.find_last_of('/');
                g.program =
                    slash == std::string::npos ? f : f.substr(0, slash);
            }
        }
        db.gadgets.push_back(std::move(g));
    }
    return db;
}

}  // namespace vuldet::gadget
