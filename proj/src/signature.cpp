#include "lachesis/signature.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lachesis {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex16(std::uint64_t value) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string path_signature(const IrGraph& graph, const std::vector<int>& path) {
    std::ostringstream out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) {
            auto flow = graph.edge_flow(path[i - 1], path[i]);
            if (!flow) {
                throw domain_error("path nodes " + std::to_string(path[i - 1]) + " and " +
                                   std::to_string(path[i]) + " are not connected");
            }
            out << (*flow == FlowKind::Data ? "-d>" : "-c>");
        }
        const IrNode& n = graph.node(path[i]);
        out << kind_name(n.kind) << ':' << n.label << ':' << n.out_type;
    }
    return out.str();
}

std::vector<std::string> signature_set(const TwoTerminalDag& dag) {
    IrGraph g = dag.as_graph();
    std::set<std::string> sigs;
    for (const auto& path : g.find_all_paths(dag.root, dag.leaf)) {
        sigs.insert(path_signature(g, path));
    }
    return {sigs.begin(), sigs.end()};
}

std::string candidate_signature(const TwoTerminalDag& dag) {
    std::vector<std::string> sigs = signature_set(dag);
    std::ostringstream out;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        if (i > 0) out << '|';
        out << sigs[i];
    }
    return out.str();
}

std::vector<std::string> split_signature_set(const std::string& joined) {
    std::vector<std::string> out;
    if (joined.empty()) return out;
    std::size_t start = 0;
    while (true) {
        std::size_t bar = joined.find('|', start);
        if (bar == std::string::npos) {
            out.push_back(joined.substr(start));
            break;
        }
        out.push_back(joined.substr(start, bar - start));
        start = bar + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t workload_signature(const IrGraph& graph) {
    std::set<std::string> sigs;
    for (int s : graph.scans()) {
        for (int w : graph.writes()) {
            for (const auto& path : graph.find_all_paths(s, w)) {
                sigs.insert(path_signature(graph, path));
            }
        }
    }
    std::ostringstream joined;
    bool first = true;
    for (const std::string& sig : sigs) {
        if (!first) joined << '|';
        joined << sig;
        first = false;
    }
    return fnv1a64(joined.str());
}

TwoTerminalDag induced_subgraph(const IrGraph& graph, int root, int leaf) {
    TwoTerminalDag dag;
    dag.root = root;
    dag.leaf = leaf;
    std::set<int> node_ids;
    std::set<std::pair<int, int>> edge_keys;
    for (const auto& path : graph.find_all_paths(root, leaf)) {
        for (std::size_t i = 0; i < path.size(); ++i) {
            node_ids.insert(path[i]);
            if (i > 0) edge_keys.insert({path[i - 1], path[i]});
        }
    }
    for (int id : node_ids) dag.nodes.push_back(graph.node(id));
    for (const auto& [src, dst] : edge_keys) {
        dag.edges.push_back({src, dst, *graph.edge_flow(src, dst)});
    }
    return dag;
}

std::vector<AnchorMatch> partitioning_match(const PartitionerCandidate& applied,
                                            const std::vector<std::string>& applied_sigs,
                                            const IrGraph& graph,
                                            const std::vector<int>& anchors) {
    std::optional<int> scan = graph.find_scanner(applied.dataset);
    if (!scan) throw absent_scan_error(applied.dataset);

    std::vector<std::string> wanted = applied_sigs;
    std::sort(wanted.begin(), wanted.end());

    std::vector<AnchorMatch> matches;
    for (int anchor : anchors) {
        // candidates are built from anchor-free paths, so the match must
        // compare against the same construction: paths crossing another
        // join anchor belong to that anchor's candidate, not this one
        std::set<std::string> sigs;
        std::set<int> node_ids;
        std::set<std::pair<int, int>> edge_keys;
        for (const auto& path : graph.find_all_paths(*scan, anchor)) {
            bool anchor_free = true;
            for (std::size_t i = 1; i + 1 < path.size(); ++i) {
                if (graph.is_join_anchor(path[i])) {
                    anchor_free = false;
                    break;
                }
            }
            if (!anchor_free) continue;
            sigs.insert(path_signature(graph, path));
            for (std::size_t i = 0; i < path.size(); ++i) {
                node_ids.insert(path[i]);
                if (i > 0) edge_keys.insert({path[i - 1], path[i]});
            }
        }
        if (sigs.empty()) continue;  // anchor unreachable from the scan
        std::vector<std::string> sorted(sigs.begin(), sigs.end());
        if (sorted != wanted) continue;
        if (strategy_for_anchor(graph, anchor) != applied.strategy) continue;
        TwoTerminalDag dag;
        dag.root = *scan;
        dag.leaf = anchor;
        for (int id : node_ids) dag.nodes.push_back(graph.node(id));
        for (const auto& [src, dst] : edge_keys) {
            dag.edges.push_back({src, dst, *graph.edge_flow(src, dst)});
        }
        matches.push_back({anchor, std::move(dag)});
    }
    std::sort(matches.begin(), matches.end(),
              [](const AnchorMatch& a, const AnchorMatch& b) { return a.anchor < b.anchor; });
    return matches;
}

}  // namespace lachesis
