#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vuldet/dataflow.hpp"

namespace vuldet::gadget {

enum class GadgetDirection { Forward, Backward, MixedBackward };
enum class Label { NotVulnerable = 0, Vulnerable = 1, Unlabeled };
enum class Provenance { NvdDiff, SardGood, SardBadOrMixed, Target };

const char* to_string(GadgetDirection d);
const char* to_string(Label l);
const char* to_string(Provenance p);

struct GadgetStatement {
    std::string file;
    std::string function;
    int line = 0;
    std::string text;
    std::vector<clex::Token> tokens;
};

// An assembled code gadget: the statements of one key-point call's
// slices, merged per function in ascending line order.
struct CodeGadget {
    std::string id;  // stable hash over (statement texts, callee)
    std::string callee;
    GadgetDirection direction = GadgetDirection::Backward;
    std::vector<GadgetStatement> statements;
    Label label = Label::Unlabeled;
    Provenance provenance = Provenance::Target;
    std::string keyFile;  // the key call's location
    int keyLine = 0;
    std::string program;       // program id, for split hygiene
    std::string symbolicText;  // cached canonical symbolic form
    bool needsReview = false;  // queued for the manual label check
};

struct GadgetDatabase {
    std::vector<CodeGadget> gadgets;

    struct Counts {
        size_t vulnerable = 0;
        size_t notVulnerable = 0;
        size_t unlabeled = 0;
    };
    Counts counts() const;
};

struct EmptySliceSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingVulnerableLineAnnotation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AssembleOptions {
    // The deterministic piece order can be replaced by a seeded shuffle
    // of order-unconstrained pieces.
    bool shufflePieces = false;
    uint64_t seed = 0;
};

/// Merges the slices of one call site into a gadget: statements of the
/// same user-defined function become one piece in ascending line order
/// (duplicates dropped); pieces keep any cross-function order present
/// in the slice chains, remaining ties ordered by first appearance.
CodeGadget assemble(const dataflow::DepGraph& graph,
                    const std::vector<dataflow::Slice>& slices,
                    const AssembleOptions& options = {});

using FileLineSet = std::set<std::pair<std::string, int>>;

/// Diff-based labeling: vulnerable iff any statement is on a line the
/// patch deleted or modified.  Label-1 gadgets are queued for review.
CodeGadget& label_by_diff(CodeGadget& g, const FileLineSet& patchLines);

enum class SardClass { Good, Bad, Mixed };

/// SARD labeling: good programs are clean; bad/mixed programs mark a
/// gadget vulnerable iff it contains a flagged statement.
CodeGadget& label_by_sard(CodeGadget& g, SardClass programClass,
                          const FileLineSet& vulnerableLines);

struct ConflictResolution {
    GadgetDatabase db;
    size_t removed = 0;
};

/// Deletes every gadget whose canonical (symbolic) text occurs with both
/// labels in the database.
ConflictResolution resolve_conflicts(const GadgetDatabase& db);

/// Stable content hash: a pure function of the statement texts in order
/// and the callee name.
std::string gadget_id(const std::vector<GadgetStatement>& statements,
                      const std::string& callee);

// Line-delimited database file; fields separated by the unit separator
// (0x1f): id, provenance, direction, callee, label, then per statement
// (file, function, line, raw text), then one trailing program-id field.
std::string serialize_gadget(const CodeGadget& g);
void save_database(const GadgetDatabase& db, const std::string& path);
GadgetDatabase load_database(const std::string& path);

}  // namespace vuldet::gadget
