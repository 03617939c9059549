#include "lachesis/ir.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lachesis {

namespace {

const std::array<std::pair<NodeKind, std::string>, 29> kKindNames = {{
    {NodeKind::Member, "Member"},
    {NodeKind::Method, "Method"},
    {NodeKind::Literal, "Literal"},
    {NodeKind::SelfId, "SelfId"},
    {NodeKind::OpaqueFunc, "OpaqueFunc"},
    {NodeKind::Equal, "Equal"},
    {NodeKind::NotEqual, "NotEqual"},
    {NodeKind::LessThan, "LessThan"},
    {NodeKind::GreaterThan, "GreaterThan"},
    {NodeKind::And, "And"},
    {NodeKind::Or, "Or"},
    {NodeKind::Not, "Not"},
    {NodeKind::Add, "Add"},
    {NodeKind::Subtract, "Subtract"},
    {NodeKind::Multiply, "Multiply"},
    {NodeKind::Construct, "Construct"},
    {NodeKind::Conditional, "Conditional"},
    {NodeKind::Index, "Index"},
    {NodeKind::Scan, "Scan"},
    {NodeKind::Write, "Write"},
    {NodeKind::Apply, "Apply"},
    {NodeKind::Hash, "Hash"},
    {NodeKind::Filter, "Filter"},
    {NodeKind::Flatten, "Flatten"},
    {NodeKind::Join, "Join"},
    {NodeKind::Aggregate, "Aggregate"},
    {NodeKind::Partition, "Partition"},
    {NodeKind::Pair, "Pair"},
    {NodeKind::Sort, "Sort"},
}};

bool needs_label(NodeKind kind) {
    switch (kind) {
        case NodeKind::Member:
        case NodeKind::Method:
        case NodeKind::OpaqueFunc:
        case NodeKind::Literal:
        case NodeKind::Scan:
        case NodeKind::Write:
            return true;
        default:
            return false;
    }
}

}  // namespace

const std::string& kind_name(NodeKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) return name;
    }
    throw format_error("invalid node kind tag");
}

std::optional<NodeKind> kind_from_name(const std::string& name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) return k;
    }
    return std::nullopt;
}

const std::string& flow_name(FlowKind flow) {
    static const std::string data = "data";
    static const std::string control = "control";
    return flow == FlowKind::Data ? data : control;
}

std::optional<FlowKind> flow_from_name(const std::string& name) {
    if (name == "data") return FlowKind::Data;
    if (name == "control") return FlowKind::Control;
    return std::nullopt;
}

IrGraph::IrGraph(std::string ir_id, std::vector<IrNode> nodes, std::vector<IrEdge> edges)
    : ir_id_(std::move(ir_id)), nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const IrNode& a, const IrNode& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        node_index_[nodes_[i].id] = i;
        if (nodes_[i].kind == NodeKind::Scan) scans_.push_back(nodes_[i].id);
        if (nodes_[i].kind == NodeKind::Write) writes_.push_back(nodes_[i].id);
    }
    for (const IrEdge& e : edges_) {
        children_[e.src].push_back(e.dst);
        parents_[e.dst].push_back(e.src);
        flow_[{e.src, e.dst}] = e.flow;
    }
    for (auto& [_, v] : children_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    for (auto& [_, v] : parents_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
}

bool IrGraph::has_node(int id) const { return node_index_.count(id) != 0; }

const IrNode& IrGraph::node(int id) const {
    auto it = node_index_.find(id);
    if (it == node_index_.end()) {
        throw domain_error("unknown node id " + std::to_string(id));
    }
    return nodes_[it->second];
}

const std::vector<int>& IrGraph::children(int id) const {
    static const std::vector<int> empty;
    auto it = children_.find(id);
    return it == children_.end() ? empty : it->second;
}

const std::vector<int>& IrGraph::parents(int id) const {
    static const std::vector<int> empty;
    auto it = parents_.find(id);
    return it == parents_.end() ? empty : it->second;
}

std::optional<FlowKind> IrGraph::edge_flow(int src, int dst) const {
    auto it = flow_.find({src, dst});
    if (it == flow_.end()) return std::nullopt;
    return it->second;
}

std::vector<int> IrGraph::topological_order() const {
    std::map<int, int> indegree;
    for (const IrNode& n : nodes_) indegree[n.id] = 0;
    for (const auto& [pair, _] : flow_) indegree[pair.second]++;
    std::set<int> ready;
    for (const auto& [id, deg] : indegree) {
        if (deg == 0) ready.insert(id);
    }
    std::vector<int> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        int id = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(id);
        for (int c : children(id)) {
            if (--indegree[c] == 0) ready.insert(c);
        }
    }
    if (order.size() != nodes_.size()) return {};
    return order;
}

std::vector<Violation> IrGraph::validate() const {
    std::vector<Violation> out;
    auto add = [&out](std::string msg) { out.push_back({std::move(msg)}); };

    if (scans_.empty()) add("S empty: graph has no Scan node");
    if (writes_.empty()) add("O empty: graph has no Write node");

    for (const IrEdge& e : edges_) {
        if (e.src == e.dst) {
            add("self-loop at node " + std::to_string(e.src));
        }
        if (!has_node(e.src) || !has_node(e.dst)) {
            add("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                ") references a missing node");
        }
    }

    for (const IrNode& n : nodes_) {
        if (needs_label(n.kind) && n.label.empty()) {
            add(kind_name(n.kind) + " node " + std::to_string(n.id) + " has empty label");
        }
    }

    bool structure_ok = true;
    for (const IrEdge& e : edges_) {
        if (!has_node(e.src) || !has_node(e.dst) || e.src == e.dst) structure_ok = false;
    }
    if (!structure_ok) return out;

    if (topological_order().empty() && !nodes_.empty()) {
        add("cycle: no topological order exists");
        return out;
    }

    for (int s : scans_) {
        if (!parents(s).empty()) {
            add("Scan node " + std::to_string(s) + " has in-degree > 0");
        }
    }
    for (int w : writes_) {
        if (!children(w).empty()) {
            add("Write node " + std::to_string(w) + " has out-degree > 0");
        }
    }

    // Duplicate scans of one dataset break the unique-scanner assumption.
    std::map<std::string, int> seen;
    for (int s : scans_) {
        const std::string& dataset = node(s).label;
        auto [it, inserted] = seen.emplace(dataset, s);
        if (!inserted) {
            add("duplicate Scan nodes " + std::to_string(it->second) + " and " +
                std::to_string(s) + " for dataset '" + dataset + "'");
        }
    }

    // Every node must sit on some scan -> write path.
    std::set<int> from_scan;
    std::function<void(int)> fwd = [&](int id) {
        if (!from_scan.insert(id).second) return;
        for (int c : children(id)) fwd(c);
    };
    for (int s : scans_) fwd(s);
    std::set<int> to_write;
    std::function<void(int)> bwd = [&](int id) {
        if (!to_write.insert(id).second) return;
        for (int p : parents(id)) bwd(p);
    };
    for (int w : writes_) bwd(w);
    for (const IrNode& n : nodes_) {
        if (!from_scan.count(n.id) || !to_write.count(n.id)) {
            add("node " + std::to_string(n.id) + " lies on no scan-to-write path");
        }
    }
    return out;
}

std::optional<int> IrGraph::find_scanner(const std::string& dataset) const {
    std::optional<int> found;
    for (int s : scans_) {
        if (node(s).label == dataset) {
            if (found) throw duplicate_scan_error(dataset);
            found = s;
        }
    }
    return found;
}

std::vector<std::vector<int>> IrGraph::find_all_paths(int src, int dst, std::size_t cap) const {
    std::vector<std::vector<int>> out;
    std::vector<int> path;
    std::set<int> on_path;
    std::function<void(int)> dfs = [&](int v) {
        path.push_back(v);
        on_path.insert(v);
        if (v == dst) {
            if (out.size() >= cap) throw path_explosion_error(cap);
            out.push_back(path);
        } else {
            for (int c : children(v)) {
                if (!on_path.count(c)) dfs(c);
            }
        }
        on_path.erase(v);
        path.pop_back();
    };
    if (has_node(src) && has_node(dst)) dfs(src);
    // children() iterates ascending ids, so DFS emission is already
    // lexicographic by node-id sequence.
    return out;
}

bool IrGraph::is_join_anchor(int v) const {
    for (int c : children(v)) {
        if (node(c).kind != NodeKind::Pair) continue;
        for (int g : children(c)) {
            if (node(g).kind == NodeKind::Join) return true;
        }
    }
    return false;
}

std::vector<int> IrGraph::join_anchors_from(int src) const {
    std::set<int> reachable;
    std::function<void(int)> dfs = [&](int id) {
        if (!reachable.insert(id).second) return;
        for (int c : children(id)) dfs(c);
    };
    dfs(src);
    std::vector<int> anchors;
    for (int id : reachable) {
        if (is_join_anchor(id)) anchors.push_back(id);
    }
    return anchors;
}

std::string ir_to_json(const IrGraph& graph) {
    nlohmann::ordered_json j;
    j["ir_id"] = graph.ir_id();
    j["nodes"] = nlohmann::ordered_json::array();
    for (const IrNode& n : graph.nodes()) {
        nlohmann::ordered_json jn;
        jn["id"] = n.id;
        jn["kind"] = kind_name(n.kind);
        jn["label"] = n.label;
        jn["in_type"] = n.in_type;
        jn["out_type"] = n.out_type;
        j["nodes"].push_back(std::move(jn));
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const IrEdge& e : graph.edges()) {
        nlohmann::ordered_json je;
        je["src"] = e.src;
        je["dst"] = e.dst;
        je["flow"] = flow_name(e.flow);
        j["edges"].push_back(std::move(je));
    }
    return j.dump(2);
}

IrGraph ir_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("bad IR JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("ir_id") || !j.contains("nodes") || !j.contains("edges")) {
        throw format_error("IR JSON must contain ir_id, nodes, edges");
    }
    std::vector<IrNode> nodes;
    for (const auto& jn : j.at("nodes")) {
        IrNode n;
        n.id = jn.at("id").get<int>();
        auto kind = kind_from_name(jn.at("kind").get<std::string>());
        if (!kind) {
            throw format_error("unknown node kind '" + jn.at("kind").get<std::string>() + "'");
        }
        n.kind = *kind;
        n.label = jn.value("label", "");
        n.in_type = jn.value("in_type", "");
        n.out_type = jn.value("out_type", "");
        nodes.push_back(std::move(n));
    }
    std::vector<IrEdge> edges;
    for (const auto& je : j.at("edges")) {
        IrEdge e;
        e.src = je.at("src").get<int>();
        e.dst = je.at("dst").get<int>();
        auto flow = flow_from_name(je.value("flow", "data"));
        if (!flow) {
            throw format_error("unknown edge flow '" + je.value("flow", "") + "'");
        }
        e.flow = *flow;
        edges.push_back(e);
    }
    return IrGraph(j.at("ir_id").get<std::string>(), std::move(nodes), std::move(edges));
}

IrGraph ir_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open IR file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return ir_from_json(buf.str());
}

}  // namespace lachesis
