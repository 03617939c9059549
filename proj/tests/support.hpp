#pragma once

// Independent oracles and instance generators shared by the unit and
// acceptance suites. Everything here is deliberately brute force and kept
// separate from the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lachesis/candidate.hpp"
#include "lachesis/ir.hpp"

namespace support {

using lachesis::FlowKind;
using lachesis::IrEdge;
using lachesis::IrGraph;
using lachesis::IrNode;
using lachesis::NodeKind;
using lachesis::TwoTerminalDag;

// Recursive DFS over the raw edge list; no reliance on IrGraph adjacency.
inline void oracle_paths_rec(const std::vector<IrEdge>& edges, int current, int dst,
                             std::vector<int>& stack, std::set<int>& visited,
                             std::vector<std::vector<int>>& out) {
    if (current == dst) {
        out.push_back(stack);
        return;
    }
    std::vector<int> next;
    for (const IrEdge& e : edges) {
        if (e.src == current && !visited.count(e.dst)) next.push_back(e.dst);
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    for (int n : next) {
        visited.insert(n);
        stack.push_back(n);
        oracle_paths_rec(edges, n, dst, stack, visited, out);
        stack.pop_back();
        visited.erase(n);
    }
}

inline std::vector<std::vector<int>> oracle_paths(const std::vector<IrEdge>& edges, int src,
                                                  int dst) {
    std::vector<std::vector<int>> out;
    std::vector<int> stack{src};
    std::set<int> visited{src};
    oracle_paths_rec(edges, src, dst, stack, visited, out);
    std::sort(out.begin(), out.end());
    return out;
}

// Anchor test recomputed from scratch: v -> Pair child -> Join child.
inline bool oracle_is_anchor(const std::vector<IrNode>& nodes, const std::vector<IrEdge>& edges,
                             int v) {
    auto kind_of = [&](int id) {
        for (const IrNode& n : nodes) {
            if (n.id == id) return n.kind;
        }
        return NodeKind::Scan;
    };
    for (const IrEdge& e : edges) {
        if (e.src != v || kind_of(e.dst) != NodeKind::Pair) continue;
        for (const IrEdge& f : edges) {
            if (f.src == e.dst && kind_of(f.dst) == NodeKind::Join) return true;
        }
    }
    return false;
}

inline std::vector<int> oracle_anchors(const std::vector<IrNode>& nodes,
                                       const std::vector<IrEdge>& edges) {
    std::vector<int> out;
    for (const IrNode& n : nodes) {
        if (oracle_is_anchor(nodes, edges, n.id)) out.push_back(n.id);
    }
    return out;
}

struct NodeEdgeSet {
    std::set<int> nodes;
    std::set<std::tuple<int, int, int>> edges;  // (src, dst, flow)
};

// Union of all anchor-free simple paths scan -> anchor, per anchor.
inline std::map<int, NodeEdgeSet> oracle_candidate_sets(const std::vector<IrNode>& nodes,
                                                        const std::vector<IrEdge>& edges,
                                                        int scan) {
    auto flow_of = [&](int src, int dst) {
        for (const IrEdge& e : edges) {
            if (e.src == src && e.dst == dst) return e.flow == FlowKind::Control ? 1 : 0;
        }
        return 0;
    };
    std::map<int, NodeEdgeSet> out;
    for (int anchor : oracle_anchors(nodes, edges)) {
        NodeEdgeSet set;
        for (const std::vector<int>& path : oracle_paths(edges, scan, anchor)) {
            bool anchor_free = true;
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                if (oracle_is_anchor(nodes, edges, path[i])) anchor_free = false;
            }
            if (!anchor_free) continue;
            for (int id : path) set.nodes.insert(id);
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                set.edges.insert({path[i], path[i + 1], flow_of(path[i], path[i + 1])});
            }
        }
        if (!set.nodes.empty()) out[anchor] = set;
    }
    return out;
}

inline NodeEdgeSet dag_to_set(const TwoTerminalDag& dag) {
    NodeEdgeSet set;
    for (const IrNode& n : dag.nodes) set.nodes.insert(n.id);
    for (const IrEdge& e : dag.edges) {
        set.edges.insert({e.src, e.dst, e.flow == FlowKind::Control ? 1 : 0});
    }
    return set;
}

// Random DAG family used by the acceptance gate: one scan, a forward-edge
// middle layer, up to three join anchors feeding a shared Pair/Join/Write
// tail. Bounded to 12 nodes total and a label alphabet of 8.
inline IrGraph random_dag(std::mt19937_64& rng, const std::string& dataset = "D") {
    std::uniform_int_distribution<int> middle_count(4, 7);
    std::uniform_int_distribution<int> kind_pick(0, 4);
    std::uniform_int_distribution<int> label_pick(0, 7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const NodeKind kinds[5] = {NodeKind::Apply, NodeKind::Member, NodeKind::OpaqueFunc,
                               NodeKind::Conditional, NodeKind::Filter};
    int n = middle_count(rng);

    std::vector<IrNode> nodes;
    nodes.push_back({0, NodeKind::Scan, dataset, "", "set"});
    for (int i = 1; i <= n; ++i) {
        NodeKind kind = kinds[kind_pick(rng)];
        std::string label;
        if (kind == NodeKind::Member || kind == NodeKind::OpaqueFunc) {
            label = "l" + std::to_string(label_pick(rng));
        }
        nodes.push_back({i, kind, label, "t", "t"});
    }

    std::vector<IrEdge> edges;
    for (int i = 0; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            double p = (j == i + 1) ? 0.65 : 0.3;
            if (uni(rng) < p) {
                FlowKind flow = uni(rng) < 0.15 ? FlowKind::Control : FlowKind::Data;
                edges.push_back({i, j, flow});
            }
        }
    }

    // reachable middle nodes become anchor candidates
    std::set<int> reachable{0};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const IrEdge& e : edges) {
            if (reachable.count(e.src) && !reachable.count(e.dst)) {
                reachable.insert(e.dst);
                grew = true;
            }
        }
    }
    std::vector<int> pool;
    for (int i = 1; i <= n; ++i) {
        if (reachable.count(i)) pool.push_back(i);
    }

    int pair_id = n + 1, join_id = n + 2, write_id = n + 3;
    nodes.push_back({pair_id, NodeKind::Pair, "", "t", "pair"});
    nodes.push_back({join_id, NodeKind::Join, "", "pair", "set"});
    nodes.push_back({write_id, NodeKind::Write, "out", "set", ""});
    edges.push_back({pair_id, join_id, FlowKind::Data});
    edges.push_back({join_id, write_id, FlowKind::Data});

    if (pool.empty()) {
        edges.push_back({0, pair_id, FlowKind::Data});
    } else {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::uniform_int_distribution<int> anchor_count(1, 3);
        int anchors = std::min<int>(anchor_count(rng), static_cast<int>(pool.size()));
        for (int a = 0; a < anchors; ++a) {
            edges.push_back({pool[static_cast<std::size_t>(a)], pair_id, FlowKind::Data});
        }
    }
    return IrGraph("rand", std::move(nodes), std::move(edges));
}

// Backtracking anchored isomorphism: bijection respecting kind, label,
// out_type, edge set with flow kinds, root -> root and leaf -> leaf.
inline bool oracle_isomorphic(const TwoTerminalDag& a, const TwoTerminalDag& b) {
    if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) return false;

    auto node_of = [](const TwoTerminalDag& d, int id) -> const IrNode* {
        for (const IrNode& n : d.nodes) {
            if (n.id == id) return &n;
        }
        return nullptr;
    };
    auto compatible = [&](int ida, int idb) {
        const IrNode* na = node_of(a, ida);
        const IrNode* nb = node_of(b, idb);
        return na && nb && na->kind == nb->kind && na->label == nb->label &&
               na->out_type == nb->out_type;
    };
    auto edge_set = [](const TwoTerminalDag& d) {
        std::set<std::tuple<int, int, int>> out;
        for (const IrEdge& e : d.edges) {
            out.insert({e.src, e.dst, e.flow == FlowKind::Control ? 1 : 0});
        }
        return out;
    };
    std::set<std::tuple<int, int, int>> edges_b = edge_set(b);

    std::map<int, int> mapping{{a.root, b.root}, {a.leaf, b.leaf}};
    std::set<int> used{b.root, b.leaf};
    if (!compatible(a.root, b.root) || !compatible(a.leaf, b.leaf)) return false;
    if (a.root == a.leaf && b.root != b.leaf) return false;

    std::vector<int> free_a;
    for (const IrNode& n : a.nodes) {
        if (n.id != a.root && n.id != a.leaf) free_a.push_back(n.id);
    }
    std::vector<int> free_b;
    for (const IrNode& n : b.nodes) {
        if (n.id != b.root && n.id != b.leaf) free_b.push_back(n.id);
    }
    if (free_a.size() != free_b.size()) return false;

    auto edges_match = [&]() {
        for (const IrEdge& e : a.edges) {
            auto s = mapping.find(e.src);
            auto t = mapping.find(e.dst);
            if (s == mapping.end() || t == mapping.end()) continue;
            if (!edges_b.count({s->second, t->second, e.flow == FlowKind::Control ? 1 : 0})) {
                return false;
            }
        }
        return true;
    };

    std::function<bool(std::size_t)> place = [&](std::size_t idx) {
        if (idx == free_a.size()) return edges_match();
        int ida = free_a[idx];
        for (int idb : free_b) {
            if (used.count(idb) || !compatible(ida, idb)) continue;
            mapping[ida] = idb;
            used.insert(idb);
            if (edges_match() && place(idx + 1)) return true;
            mapping.erase(ida);
            used.erase(idb);
        }
        return false;
    };
    return place(0);
}

// Brute-force longest path (node count) over all root -> leaf paths.
inline int oracle_longest_path(const TwoTerminalDag& dag) {
    int best = 0;
    for (const std::vector<int>& path : oracle_paths(dag.edges, dag.root, dag.leaf)) {
        best = std::max(best, static_cast<int>(path.size()));
    }
    return best;
}

// Two-pass covariance Pearson, written independently of the library's.
inline double oracle_pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(ys.size());
    double cov = 0.0, vx = 0.0, vy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cov += (xs[i] - mx) * (ys[i] - my);
        vx += (xs[i] - mx) * (xs[i] - mx);
        vy += (ys[i] - my) * (ys[i] - my);
    }
    return cov / std::sqrt(vx * vy);
}

}  // namespace support
