#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lachesis/candidate.hpp"
#include "lachesis/ir.hpp"

namespace lachesis {

std::uint64_t fnv1a64(const std::string& text);
std::string hex16(std::uint64_t value);

// One root->leaf path as a canonical string: per-node tokens
// "kind:label:out_type" joined by "-d>" (data) / "-c>" (control) markers.
// Independent of node ids.
std::string path_signature(const IrGraph& graph, const std::vector<int>& path);

// All distinct root->leaf path signatures of the two-terminal DAG, sorted
// lexicographically and joined by "|". Invariant under node renumbering
// and insertion order.
std::string candidate_signature(const TwoTerminalDag& dag);

// 64-bit FNV-1a over the sorted concatenation of all scan->write path
// signatures. Serialized as lowercase hex-16.
std::uint64_t workload_signature(const IrGraph& graph);

// Sorted path-signature set of a candidate (split of candidate_signature).
std::vector<std::string> signature_set(const TwoTerminalDag& dag);
std::vector<std::string> split_signature_set(const std::string& joined);

struct AnchorMatch {
    int anchor = 0;
    TwoTerminalDag subgraph;
};

// For each join anchor reachable from the dataset's scan, compare the
// sorted path-signature set of the induced two-terminal subgraph against
// applied_sigs; equal sets with equal strategy are matches. Throws
// absent_scan_error when the graph never scans the dataset.
std::vector<AnchorMatch> partitioning_match(const PartitionerCandidate& applied,
                                            const std::vector<std::string>& applied_sigs,
                                            const IrGraph& graph,
                                            const std::vector<int>& anchors);

// Two-terminal subgraph induced by all simple scan->anchor paths.
TwoTerminalDag induced_subgraph(const IrGraph& graph, int root, int leaf);

}  // namespace lachesis
