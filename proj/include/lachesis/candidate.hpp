#pragma once

#include <string>
#include <vector>

#include "lachesis/ir.hpp"

namespace lachesis {

enum class Strategy { Hash, Range };

const std::string& strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

// DAG with a unique source (the Scan root) and a unique sink (the leaf),
// where every node lies on a root->leaf path.
struct TwoTerminalDag {
    std::vector<IrNode> nodes;   // ascending id
    std::vector<IrEdge> edges;
    int root = 0;
    int leaf = 0;

    IrGraph as_graph() const;    // wraps nodes/edges for traversal
    std::vector<Violation> validate() const;
};

struct PartitionerCandidate {
    TwoTerminalDag subgraph;
    std::string dataset;
    std::string origin_ir;
    int origin_root = 0;
    int origin_leaf = 0;
    Strategy strategy = Strategy::Hash;
    std::string signature;   // candidate_signature of subgraph
};

// One partial candidate per anchor-free simple path from the scan to a
// join anchor. Each partial is a single-path TwoTerminalDag.
std::vector<TwoTerminalDag> search(const IrGraph& graph, int scan);

// Group partials by (root, leaf) and union node/edge sets; output sorted
// by (root, leaf).
std::vector<TwoTerminalDag> merge(const std::vector<TwoTerminalDag>& partials);

// Union over consumers of merge(search(...)) at the dataset's scanner,
// deduplicated by candidate signature keeping the earliest origin.
std::vector<PartitionerCandidate> enumerate_candidates(const std::vector<IrGraph>& consumers,
                                                       const std::string& dataset);

// Hash for anchors feeding a join/aggregate, Range for anchors feeding a
// sort. Pair->Join anchors therefore default to Hash.
Strategy strategy_for_anchor(const IrGraph& graph, int anchor);

std::string candidate_to_json(const PartitionerCandidate& c);
std::string candidates_to_json(const std::vector<PartitionerCandidate>& cs);
PartitionerCandidate candidate_from_json(const std::string& text);

}  // namespace lachesis
