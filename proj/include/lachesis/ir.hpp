#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lachesis/errors.hpp"

namespace lachesis {

// Atomic computation vocabulary. Three categories: lambda abstractions,
// higher-order composers, collection operators. The taxonomy is closed;
// serialization rejects unknown tags.
enum class NodeKind {
    // lambda abstractions
    Member,
    Method,
    Literal,
    SelfId,
    OpaqueFunc,
    // higher-order composers
    Equal,
    NotEqual,
    LessThan,
    GreaterThan,
    And,
    Or,
    Not,
    Add,
    Subtract,
    Multiply,
    Construct,
    Conditional,
    Index,
    // collection operators
    Scan,
    Write,
    Apply,
    Hash,
    Filter,
    Flatten,
    Join,
    Aggregate,
    Partition,
    Pair,
    Sort,
};

enum class FlowKind { Data, Control };

const std::string& kind_name(NodeKind kind);
std::optional<NodeKind> kind_from_name(const std::string& name);
const std::string& flow_name(FlowKind flow);
std::optional<FlowKind> flow_from_name(const std::string& name);

struct IrNode {
    int id = 0;
    NodeKind kind = NodeKind::Scan;
    std::string label;    // attribute/method/literal/function/dataset name
    std::string in_type;
    std::string out_type;
};

struct IrEdge {
    int src = 0;
    int dst = 0;
    FlowKind flow = FlowKind::Data;
};

struct Violation {
    std::string message;
};

// Directed acyclic graph of atomic computations. Node ids are graph-local
// and non-semantic; cross-graph identity goes through signatures.
// Immutable after construction; all member functions are const and pure.
class IrGraph {
public:
    IrGraph() = default;
    IrGraph(std::string ir_id, std::vector<IrNode> nodes, std::vector<IrEdge> edges);

    const std::string& ir_id() const { return ir_id_; }
    const std::vector<IrNode>& nodes() const { return nodes_; }
    const std::vector<IrEdge>& edges() const { return edges_; }
    const std::vector<int>& scans() const { return scans_; }
    const std::vector<int>& writes() const { return writes_; }

    bool has_node(int id) const;
    const IrNode& node(int id) const;
    // Children / parents in ascending id order; edges of both flow kinds.
    const std::vector<int>& children(int id) const;
    const std::vector<int>& parents(int id) const;
    std::optional<FlowKind> edge_flow(int src, int dst) const;

    std::vector<Violation> validate() const;

    // Unique Scan node labelled with the dataset, or nullopt.
    // Throws duplicate_scan_error when two scans share the label.
    std::optional<int> find_scanner(const std::string& dataset) const;

    // All distinct simple directed paths src -> dst, lexicographic by
    // node-id sequence. Throws path_explosion_error past the cap.
    std::vector<std::vector<int>> find_all_paths(int src, int dst,
                                                 std::size_t cap = kDefaultPathCap) const;

    // True iff v has a Pair child that itself has a Join child.
    bool is_join_anchor(int v) const;

    // All join anchors reachable from the given node, ascending id order.
    std::vector<int> join_anchors_from(int src) const;

    // Topological order; empty when the graph is cyclic.
    std::vector<int> topological_order() const;

    static constexpr std::size_t kDefaultPathCap = 10000;

private:
    std::string ir_id_;
    std::vector<IrNode> nodes_;
    std::vector<IrEdge> edges_;
    std::vector<int> scans_;
    std::vector<int> writes_;
    std::map<int, std::size_t> node_index_;
    std::map<int, std::vector<int>> children_;
    std::map<int, std::vector<int>> parents_;
    std::map<std::pair<int, int>, FlowKind> flow_;
};

// JSON round-trip: {ir_id, nodes:[{id,kind,label,in_type,out_type}],
// edges:[{src,dst,flow}]}. Scans/writes derived on load.
std::string ir_to_json(const IrGraph& graph);
IrGraph ir_from_json(const std::string& text);
IrGraph ir_from_file(const std::string& path);

}  // namespace lachesis
