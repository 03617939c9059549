#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "lachesis/candidate.hpp"
#include "lachesis/ir.hpp"

namespace lachesis {

inline constexpr double kDefaultWindow = 30.0 * 24.0 * 3600.0;  // 30 days

struct DatasetIo {
    std::string dataset;
    double bytes = 0.0;
};

struct ExecutionRecord {
    std::string app_id;
    double timestamp = 0.0;  // seconds since epoch; out-of-order ingest allowed
    std::string ir_id;
    std::vector<DatasetIo> inputs;
    std::vector<DatasetIo> outputs;
    double latency = 0.0;
    // optional per-run partition-key statistics
    double selectivity = -1.0;        // <0 means absent
    double key_distribution = -1.0;   // <0 means absent
};

struct CandidateStats {
    double frequency = 0.0;
    double distance = 0.0;
    double recency = 0.0;
    // per-run key statistics when any run logged them; <0 means absent
    double selectivity = -1.0;
    double key_distribution = -1.0;
};

struct ConsumerPrediction {
    std::string ir_id;                        // group representative
    std::vector<ExecutionRecord> executions;  // the group's history
};

// Execution history plus its skeleton condensation: executions group by
// workload signature, and a group edge exists when some member's output
// dataset was consumed by a member of the destination group.
//
// Single writer, many readers: ingest is serialized; queries read an
// immutable snapshot swapped after each ingest.
class HistoryStore {
public:
    explicit HistoryStore(double history_window_seconds = kDefaultWindow);

    void register_ir(const IrGraph& graph);
    bool has_ir(const std::string& ir_id) const;
    const IrGraph& ir(const std::string& ir_id) const;

    // Throws unknown_ir_error when the record's IR is unregistered.
    void ingest(const ExecutionRecord& record);

    // Append-only JSON-lines log.
    void ingest_log_file(const std::string& path);
    void append_to_log(const ExecutionRecord& record, const std::string& path) const;

    std::vector<ConsumerPrediction> predict_consumers(const IrGraph& producer) const;
    CandidateStats candidate_stats(const PartitionerCandidate& candidate, double now) const;

    std::size_t record_count() const;
    double history_window() const { return window_; }

    // Deterministic serialization: group keys sorted by signature, members
    // and edge payloads sorted.
    std::string skeleton_to_json() const;

private:
    struct Group {
        std::string representative_ir;  // lexicographically smallest member ir_id
        std::set<std::pair<std::string, double>> members;       // (app_id, timestamp)
        std::vector<ExecutionRecord> executions;
        std::set<std::string> output_datasets;
        std::set<std::string> input_datasets;
    };

    struct Snapshot {
        std::map<std::uint64_t, Group> groups;
        // (producer sig, consumer sig) -> (app_id, timestamp, input, output)
        std::map<std::pair<std::uint64_t, std::uint64_t>,
                 std::set<std::tuple<std::string, double, std::string, std::string>>>
            edges;
        std::map<std::string, std::set<std::uint64_t>> dataset_producers;
        std::map<std::string, std::set<std::uint64_t>> dataset_consumers;
        std::size_t record_count = 0;
    };

    std::shared_ptr<const Snapshot> snapshot() const;

    double window_;
    std::map<std::string, IrGraph> irs_;
    std::map<std::string, std::uint64_t> ir_signatures_;
    std::shared_ptr<const Snapshot> snap_;
    mutable std::mutex write_mutex_;
};

std::string record_to_json(const ExecutionRecord& record);
ExecutionRecord record_from_json(const std::string& line);

}  // namespace lachesis
