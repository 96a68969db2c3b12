#pragma once

// Independent reachability oracle over a DepGraph's labeled edges.
// Plain worklist BFS, no path enumeration: used to check that slice
// membership equals graph reachability on small fixtures.

#include <map>
#include <queue>
#include <set>
#include <string>

#include "vuldet/dataflow.hpp"

namespace oracle {

using vuldet::dataflow::DataEdge;
using vuldet::dataflow::DepGraph;
using vuldet::dataflow::EdgeKind;
using vuldet::dataflow::StmtId;

inline std::set<StmtId> reach(const DepGraph& g, StmtId start,
                              const std::set<std::string>& seed,
                              bool backward, int maxHops) {
    struct State {
        StmtId stmt;
        std::set<std::string> vars;
        int hops;
    };
    std::set<StmtId> visited{start};
    std::map<std::pair<StmtId, std::string>, int> best;
    std::queue<State> work;
    work.push({start, seed, 0});
    while (!work.empty()) {
        State cur = work.front();
        work.pop();
        for (const DataEdge& e : g.dataEdges) {
            StmtId from = backward ? e.dst : e.src;
            StmtId to = backward ? e.src : e.dst;
            if (from != cur.stmt) continue;
            bool interproc = e.kind != EdgeKind::DefUse;
            int hops = cur.hops + (interproc ? 1 : 0);
            if (interproc && hops > maxHops) continue;

            bool triggered = false;
            std::set<std::string> next;
            if (backward) {
                triggered = cur.vars.count(e.var) > 0;
                if (triggered) {
                    if (e.kind == EdgeKind::DefUse) {
                        const auto& src = g.stmt(e.src);
                        if (src.isFunctionHeader) {
                            next.insert(e.var);
                        } else {
                            next = src.uses;
                            if (!src.lhsVar.empty()) next.insert(src.lhsVar);
                        }
                    } else {
                        next.insert(e.srcVars.begin(), e.srcVars.end());
                    }
                }
            } else {
                if (e.kind == EdgeKind::DefUse) {
                    triggered = cur.vars.count(e.var) > 0;
                    if (triggered) {
                        next = g.stmt(e.dst).defs;
                        next.insert(e.var);
                    }
                } else {
                    for (const auto& v : e.srcVars)
                        if (cur.vars.count(v)) triggered = true;
                    if (triggered) next.insert(e.var);
                }
            }
            if (!triggered) continue;

            bool fresh = false;
            for (const auto& v : next) {
                auto key = std::make_pair(to, v);
                auto it = best.find(key);
                if (it == best.end() || hops < it->second) {
                    best[key] = hops;
                    fresh = true;
                }
            }
            if (fresh) {
                visited.insert(to);
                work.push({to, next, hops});
            }
        }
    }
    return visited;
}

// Unlabeled transitive closure of the call statement (superset check).
inline std::set<StmtId> closure(const DepGraph& g, StmtId start,
                                bool backward) {
    std::set<StmtId> visited{start};
    std::queue<StmtId> work;
    work.push(start);
    while (!work.empty()) {
        StmtId cur = work.front();
        work.pop();
        for (const DataEdge& e : g.dataEdges) {
            StmtId from = backward ? e.dst : e.src;
            StmtId to = backward ? e.src : e.dst;
            if (from == cur && visited.insert(to).second) work.push(to);
        }
    }
    return visited;
}

}  // namespace oracle
