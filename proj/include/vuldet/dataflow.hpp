#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vuldet/calltable.hpp"
#include "vuldet/token.hpp"

namespace vuldet::dataflow {

using StmtId = int;

// One line of code.  Statements are the atoms of slices and gadgets;
// def/use sets are extracted with conservative token-level heuristics
// (`&x`, `*p`, `p->f` all reduce to their base identifier).
struct Statement {
    std::string file;
    std::string function = "<global>";
    int line = 0;
    std::string text;  // trimmed source line
    std::vector<clex::Token> tokens;
    std::set<std::string> defs;
    std::set<std::string> uses;
    // Defs that overwrite the whole variable and kill earlier reaching
    // definitions; weak defs (writes through [], *, ->, call arguments)
    // are not in this set.
    std::set<std::string> strongDefs;
    bool isFunctionHeader = false;
    bool isPreprocessor = false;
    std::string lhsVar;            // x in `x = f(...)`
    std::string assignedFromCall;  // f in `x = f(...)`
};

struct Arg {
    std::string text;
    std::vector<std::string> ids;  // base identifiers the argument reads
};

struct CallSite {
    std::string callee;  // as written; `base.method` for member calls
    StmtId stmt = -1;
    std::vector<Arg> args;
    CallDirection direction = CallDirection::Backward;
    std::string matchedEntry;  // the call-table entry that matched
};

enum class EdgeKind { DefUse, ParamBind, ReturnBind };

// Value flow src -> dst.  DefUse edges connect a reaching definition to
// a use in the same function; ParamBind connects a call statement to the
// callee's header (which defines the parameters); ReturnBind connects a
// return statement to the call statement whose result is assigned.
struct DataEdge {
    StmtId src = -1;
    StmtId dst = -1;
    EdgeKind kind = EdgeKind::DefUse;
    std::string var;
    // Variables at src that continue a backward traversal (ParamBind:
    // the bound argument's identifiers; ReturnBind: the return
    // expression's identifiers).  Empty for DefUse (derived from src).
    std::vector<std::string> srcVars;
};

struct FunctionInfo {
    std::string name;
    std::string file;
    StmtId header = -1;
    std::vector<std::string> params;
    std::vector<StmtId> returns;
    int bodyBegin = 0;
    int bodyEnd = 0;
};

struct Diagnostic {
    std::string file;
    int line = 0;
    std::string message;
};

struct DepGraph {
    std::vector<Statement> statements;
    std::vector<DataEdge> dataEdges;
    std::vector<std::pair<StmtId, std::string>> callEdges;
    std::map<std::string, FunctionInfo> functions;
    std::vector<Diagnostic> diagnostics;
    // Adjacency by dataEdges index.
    std::vector<std::vector<int>> edgesIn;
    std::vector<std::vector<int>> edgesOut;

    const Statement& stmt(StmtId id) const { return statements.at(id); }
};

// A chain of statements affecting (backward) or affected by (forward)
// one argument of a key-point call.  Chains are linear: consecutive
// entries are connected by a DataEdge in the traversal direction.
struct Slice {
    CallSite keyCall;
    int argIndex = 0;
    CallDirection direction = CallDirection::Backward;
    std::vector<StmtId> chain;
};

struct SliceOptions {
    int maxChains = 8;              // per argument, after merging
    int maxInterproceduralHops = 3;
    int maxRawPaths = 64;           // enumeration guard
};

struct ArgOutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Builds the per-program statement list and data-dependency edges for a
/// set of lexed files.  Files with unbalanced braces are skipped with a
/// diagnostic.  Reaching definitions are computed over line order within
/// each function; a definition inside a loop body additionally reaches
/// uses earlier in the same body.
DepGraph build_dep_graph(const std::vector<clex::SourceFile>& files);

/// Every statement invoking a name in `table`, tagged forward/backward.
/// Wildcard entries match by prefix; `new`/`delete` match their keyword
/// forms; the stream objects `cin`/`stdin` match as bare identifiers.
std::vector<CallSite> find_call_sites(const DepGraph& graph,
                                      const CallTable& table);

/// Chains of statements that can affect the given argument's value,
/// ending at the call statement.  One chain per merged linear path.
std::vector<Slice> backward_slice(const DepGraph& graph, const CallSite& call,
                                  int argIndex, const SliceOptions& = {});

/// Chains of statements affected by the given argument, starting at the
/// call statement.  One chain per branch path.
std::vector<Slice> forward_slice(const DepGraph& graph, const CallSite& call,
                                 int argIndex, const SliceOptions& = {});

}  // namespace vuldet::dataflow
