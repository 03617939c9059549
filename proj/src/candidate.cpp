#include "lachesis/candidate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <json.hpp>

#include "lachesis/signature.hpp"

namespace lachesis {

const std::string& strategy_name(Strategy s) {
    static const std::string hash = "hash";
    static const std::string range = "range";
    return s == Strategy::Hash ? hash : range;
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
    if (name == "hash") return Strategy::Hash;
    if (name == "range") return Strategy::Range;
    return std::nullopt;
}

IrGraph TwoTerminalDag::as_graph() const { return IrGraph("", nodes, edges); }

std::vector<Violation> TwoTerminalDag::validate() const {
    std::vector<Violation> out;
    auto add = [&out](std::string msg) { out.push_back({std::move(msg)}); };
    IrGraph g = as_graph();

    if (!g.has_node(root) || !g.has_node(leaf)) {
        add("root or leaf missing from node set");
        return out;
    }
    if (g.topological_order().empty() && !nodes.empty()) {
        add("cycle: no topological order exists");
        return out;
    }
    for (const IrNode& n : nodes) {
        bool is_source = g.parents(n.id).empty();
        bool is_sink = g.children(n.id).empty();
        if (is_source && n.id != root) add("extra source node " + std::to_string(n.id));
        if (is_sink && n.id != leaf) add("extra sink node " + std::to_string(n.id));
    }
    if (!g.parents(root).empty()) add("root has parents");
    if (!g.children(leaf).empty()) add("leaf has children");
    if (g.node(root).kind != NodeKind::Scan) add("root is not a Scan node");

    // every node on some root->leaf path
    std::set<int> fwd, bwd;
    std::function<void(int)> down = [&](int id) {
        if (!fwd.insert(id).second) return;
        for (int c : g.children(id)) down(c);
    };
    std::function<void(int)> up = [&](int id) {
        if (!bwd.insert(id).second) return;
        for (int p : g.parents(id)) up(p);
    };
    down(root);
    up(leaf);
    for (const IrNode& n : nodes) {
        if (!fwd.count(n.id) || !bwd.count(n.id)) {
            add("node " + std::to_string(n.id) + " off every root-to-leaf path");
        }
    }
    return out;
}

std::vector<TwoTerminalDag> search(const IrGraph& graph, int scan) {
    std::vector<TwoTerminalDag> partials;

    // a scan feeding a join directly anchors the identity projection
    if (graph.is_join_anchor(scan)) {
        TwoTerminalDag trivial;
        trivial.root = scan;
        trivial.leaf = scan;
        trivial.nodes.push_back(graph.node(scan));
        partials.push_back(std::move(trivial));
    }

    std::vector<int> path{scan};
    std::set<int> on_path{scan};
    std::size_t emitted = 0;

    std::function<void(int)> dfs = [&](int v) {
        for (int child : graph.children(v)) {
            if (on_path.count(child)) continue;
            if (graph.is_join_anchor(child)) {
                // recursion stops at the first anchor on a path
                if (++emitted > IrGraph::kDefaultPathCap) {
                    throw path_explosion_error(IrGraph::kDefaultPathCap);
                }
                TwoTerminalDag partial;
                partial.root = scan;
                partial.leaf = child;
                for (int id : path) partial.nodes.push_back(graph.node(id));
                partial.nodes.push_back(graph.node(child));
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    partial.edges.push_back(
                        {path[i], path[i + 1], *graph.edge_flow(path[i], path[i + 1])});
                }
                partial.edges.push_back({v, child, *graph.edge_flow(v, child)});
                partials.push_back(std::move(partial));
            } else {
                path.push_back(child);
                on_path.insert(child);
                dfs(child);
                on_path.erase(child);
                path.pop_back();
            }
        }
    };
    dfs(scan);
    return partials;
}

std::vector<TwoTerminalDag> merge(const std::vector<TwoTerminalDag>& partials) {
    std::map<std::pair<int, int>, TwoTerminalDag> grouped;
    for (const TwoTerminalDag& p : partials) {
        auto key = std::make_pair(p.root, p.leaf);
        auto it = grouped.find(key);
        if (it == grouped.end()) {
            grouped.emplace(key, p);
            continue;
        }
        TwoTerminalDag& acc = it->second;
        for (const IrNode& n : p.nodes) {
            bool present = std::any_of(acc.nodes.begin(), acc.nodes.end(),
                                       [&](const IrNode& m) { return m.id == n.id; });
            if (!present) acc.nodes.push_back(n);
        }
        for (const IrEdge& e : p.edges) {
            bool present = std::any_of(acc.edges.begin(), acc.edges.end(), [&](const IrEdge& f) {
                return f.src == e.src && f.dst == e.dst;
            });
            if (!present) acc.edges.push_back(e);
        }
    }
    std::vector<TwoTerminalDag> out;
    out.reserve(grouped.size());
    for (auto& [_, dag] : grouped) {
        std::sort(dag.nodes.begin(), dag.nodes.end(),
                  [](const IrNode& a, const IrNode& b) { return a.id < b.id; });
        std::sort(dag.edges.begin(), dag.edges.end(), [](const IrEdge& a, const IrEdge& b) {
            return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
        });
        out.push_back(std::move(dag));
    }
    return out;
}

Strategy strategy_for_anchor(const IrGraph& graph, int anchor) {
    for (int c : graph.children(anchor)) {
        if (graph.node(c).kind == NodeKind::Sort) return Strategy::Range;
    }
    return Strategy::Hash;
}

std::vector<PartitionerCandidate> enumerate_candidates(const std::vector<IrGraph>& consumers,
                                                       const std::string& dataset) {
    std::vector<PartitionerCandidate> out;
    std::set<std::pair<std::string, Strategy>> seen;
    for (const IrGraph& consumer : consumers) {
        std::optional<int> scan = consumer.find_scanner(dataset);
        if (!scan) continue;
        for (TwoTerminalDag& dag : merge(search(consumer, *scan))) {
            PartitionerCandidate c;
            c.dataset = dataset;
            c.origin_ir = consumer.ir_id();
            c.origin_root = dag.root;
            c.origin_leaf = dag.leaf;
            c.strategy = strategy_for_anchor(consumer, dag.leaf);
            c.signature = candidate_signature(dag);
            c.subgraph = std::move(dag);
            if (seen.insert({c.signature, c.strategy}).second) {
                out.push_back(std::move(c));
            }
        }
    }
    return out;
}

namespace {

nlohmann::ordered_json candidate_json(const PartitionerCandidate& c) {
    nlohmann::ordered_json j;
    j["dataset"] = c.dataset;
    j["origin_ir"] = c.origin_ir;
    j["origin_root"] = c.origin_root;
    j["origin_leaf"] = c.origin_leaf;
    j["strategy"] = strategy_name(c.strategy);
    j["nodes"] = nlohmann::ordered_json::array();
    for (const IrNode& n : c.subgraph.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"kind", kind_name(n.kind)},
                              {"label", n.label},
                              {"in_type", n.in_type},
                              {"out_type", n.out_type}});
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const IrEdge& e : c.subgraph.edges) {
        j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"flow", flow_name(e.flow)}});
    }
    j["signature"] = c.signature;
    return j;
}

}  // namespace

std::string candidate_to_json(const PartitionerCandidate& c) {
    return candidate_json(c).dump(2);
}

std::string candidates_to_json(const std::vector<PartitionerCandidate>& cs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const PartitionerCandidate& c : cs) arr.push_back(candidate_json(c));
    return arr.dump(2);
}

PartitionerCandidate candidate_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("bad candidate JSON: ") + e.what());
    }
    PartitionerCandidate c;
    c.dataset = j.at("dataset").get<std::string>();
    c.origin_ir = j.value("origin_ir", "");
    c.origin_root = j.value("origin_root", 0);
    c.origin_leaf = j.value("origin_leaf", 0);
    auto strategy = strategy_from_name(j.at("strategy").get<std::string>());
    if (!strategy) throw format_error("unknown strategy '" + j.at("strategy").get<std::string>() + "'");
    c.strategy = *strategy;
    for (const auto& jn : j.at("nodes")) {
        IrNode n;
        n.id = jn.at("id").get<int>();
        auto kind = kind_from_name(jn.at("kind").get<std::string>());
        if (!kind) throw format_error("unknown node kind in candidate");
        n.kind = *kind;
        n.label = jn.value("label", "");
        n.in_type = jn.value("in_type", "");
        n.out_type = jn.value("out_type", "");
        c.subgraph.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
        auto flow = flow_from_name(je.value("flow", "data"));
        if (!flow) throw format_error("unknown edge flow in candidate");
        c.subgraph.edges.push_back({je.at("src").get<int>(), je.at("dst").get<int>(), *flow});
    }
    c.subgraph.root = c.origin_root;
    c.subgraph.leaf = c.origin_leaf;
    c.signature = j.contains("signature") ? j.at("signature").get<std::string>()
                                          : candidate_signature(c.subgraph);
    return c;
}

}  // namespace lachesis
