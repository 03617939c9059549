#include "lachesis/history.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "lachesis/signature.hpp"

namespace lachesis {

HistoryStore::HistoryStore(double history_window_seconds)
    : window_(history_window_seconds), snap_(std::make_shared<Snapshot>()) {}

void HistoryStore::register_ir(const IrGraph& graph) {
    std::lock_guard lock(write_mutex_);
    irs_.insert_or_assign(graph.ir_id(), graph);
    ir_signatures_.insert_or_assign(graph.ir_id(), workload_signature(graph));
}

bool HistoryStore::has_ir(const std::string& ir_id) const { return irs_.count(ir_id) != 0; }

const IrGraph& HistoryStore::ir(const std::string& ir_id) const {
    auto it = irs_.find(ir_id);
    if (it == irs_.end()) throw unknown_ir_error(ir_id);
    return it->second;
}

std::shared_ptr<const HistoryStore::Snapshot> HistoryStore::snapshot() const {
    return std::atomic_load(&snap_);
}

void HistoryStore::ingest(const ExecutionRecord& record) {
    std::lock_guard lock(write_mutex_);
    auto sig_it = ir_signatures_.find(record.ir_id);
    if (sig_it == ir_signatures_.end()) throw unknown_ir_error(record.ir_id);
    std::uint64_t sig = sig_it->second;

    auto next = std::make_shared<Snapshot>(*snap_);
    Group& group = next->groups[sig];
    if (group.representative_ir.empty() || record.ir_id < group.representative_ir) {
        group.representative_ir = record.ir_id;
    }
    group.members.insert({record.app_id, record.timestamp});
    group.executions.push_back(record);
    std::sort(group.executions.begin(), group.executions.end(),
              [](const ExecutionRecord& a, const ExecutionRecord& b) {
                  return std::tie(a.timestamp, a.app_id) < std::tie(b.timestamp, b.app_id);
              });
    next->record_count++;

    for (const DatasetIo& in : record.inputs) {
        group.input_datasets.insert(in.dataset);
        next->dataset_consumers[in.dataset].insert(sig);
        for (std::uint64_t producer : next->dataset_producers[in.dataset]) {
            next->edges[{producer, sig}].insert(
                {record.app_id, record.timestamp, in.dataset, in.dataset});
        }
    }
    for (const DatasetIo& out : record.outputs) {
        group.output_datasets.insert(out.dataset);
        next->dataset_producers[out.dataset].insert(sig);
        for (std::uint64_t consumer : next->dataset_consumers[out.dataset]) {
            // connect to consumers already ingested (out-of-order logs)
            const Group& cg = next->groups[consumer];
            for (const ExecutionRecord& run : cg.executions) {
                for (const DatasetIo& cin : run.inputs) {
                    if (cin.dataset == out.dataset) {
                        next->edges[{sig, consumer}].insert(
                            {run.app_id, run.timestamp, cin.dataset, cin.dataset});
                    }
                }
            }
        }
    }
    std::atomic_store(&snap_, std::shared_ptr<const Snapshot>(next));
}

void HistoryStore::ingest_log_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open log file '" + path + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ingest(record_from_json(line));
    }
}

void HistoryStore::append_to_log(const ExecutionRecord& record, const std::string& path) const {
    std::ofstream out(path, std::ios::app);
    if (!out) throw format_error("cannot open log file '" + path + "' for append");
    out << record_to_json(record) << '\n';
}

std::vector<ConsumerPrediction> HistoryStore::predict_consumers(const IrGraph& producer) const {
    auto snap = snapshot();
    std::uint64_t sig = workload_signature(producer);
    auto group_it = snap->groups.find(sig);
    if (group_it == snap->groups.end()) return {};

    std::vector<ConsumerPrediction> out;
    for (const auto& [key, _] : snap->edges) {
        if (key.first != sig) continue;
        const Group& consumer = snap->groups.at(key.second);
        out.push_back({consumer.representative_ir, consumer.executions});
    }
    std::sort(out.begin(), out.end(), [](const ConsumerPrediction& a, const ConsumerPrediction& b) {
        return a.ir_id < b.ir_id;
    });
    return out;
}

CandidateStats HistoryStore::candidate_stats(const PartitionerCandidate& candidate,
                                             double now) const {
    auto snap = snapshot();
    auto sig_it = ir_signatures_.find(candidate.origin_ir);
    if (sig_it == ir_signatures_.end()) return {0.0, 0.0, window_, -1.0, -1.0};
    auto group_it = snap->groups.find(sig_it->second);
    if (group_it == snap->groups.end() || group_it->second.members.empty()) {
        return {0.0, 0.0, window_, -1.0, -1.0};
    }
    const Group& group = group_it->second;
    std::vector<double> times;
    times.reserve(group.members.size());
    for (const auto& [_, t] : group.members) times.push_back(t);
    std::sort(times.begin(), times.end());

    CandidateStats stats;
    stats.frequency = static_cast<double>(times.size());
    stats.distance = times.size() >= 2 ? times[times.size() - 1] - times[times.size() - 2] : 0.0;
    stats.recency = now - times.back();
    for (const ExecutionRecord& run : group.executions) {
        if (run.selectivity >= 0.0) stats.selectivity = std::max(stats.selectivity, run.selectivity);
        if (run.key_distribution >= 0.0) {
            stats.key_distribution = stats.key_distribution < 0.0
                                         ? run.key_distribution
                                         : std::min(stats.key_distribution, run.key_distribution);
        }
    }
    return stats;
}

std::size_t HistoryStore::record_count() const { return snapshot()->record_count; }

std::string HistoryStore::skeleton_to_json() const {
    auto snap = snapshot();
    nlohmann::ordered_json j;
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& [sig, group] : snap->groups) {
        nlohmann::ordered_json jg;
        jg["signature"] = hex16(sig);
        jg["representative_ir"] = group.representative_ir;
        jg["members"] = nlohmann::ordered_json::array();
        for (const auto& [app, t] : group.members) {
            jg["members"].push_back({{"app_id", app}, {"timestamp", t}});
        }
        j["groups"].push_back(std::move(jg));
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& [key, runs] : snap->edges) {
        nlohmann::ordered_json je;
        je["producer"] = hex16(key.first);
        je["consumer"] = hex16(key.second);
        je["runs"] = nlohmann::ordered_json::array();
        for (const auto& [app, t, in, out] : runs) {
            je["runs"].push_back({{"app_id", app},
                                  {"timestamp", t},
                                  {"input_data_id", in},
                                  {"output_data_id", out}});
        }
        j["edges"].push_back(std::move(je));
    }
    return j.dump(2);
}

std::string record_to_json(const ExecutionRecord& record) {
    nlohmann::ordered_json j;
    j["app_id"] = record.app_id;
    j["timestamp"] = record.timestamp;
    j["ir_id"] = record.ir_id;
    j["inputs"] = nlohmann::ordered_json::array();
    for (const DatasetIo& io : record.inputs) {
        j["inputs"].push_back({{"dataset", io.dataset}, {"bytes", io.bytes}});
    }
    j["outputs"] = nlohmann::ordered_json::array();
    for (const DatasetIo& io : record.outputs) {
        j["outputs"].push_back({{"dataset", io.dataset}, {"bytes", io.bytes}});
    }
    j["latency"] = record.latency;
    if (record.selectivity >= 0.0) j["selectivity"] = record.selectivity;
    if (record.key_distribution >= 0.0) j["key_distribution"] = record.key_distribution;
    return j.dump();
}

ExecutionRecord record_from_json(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("bad record JSON: ") + e.what());
    }
    ExecutionRecord r;
    r.app_id = j.at("app_id").get<std::string>();
    r.timestamp = j.at("timestamp").get<double>();
    r.ir_id = j.at("ir_id").get<std::string>();
    for (const auto& io : j.value("inputs", nlohmann::json::array())) {
        r.inputs.push_back({io.at("dataset").get<std::string>(), io.at("bytes").get<double>()});
    }
    for (const auto& io : j.value("outputs", nlohmann::json::array())) {
        r.outputs.push_back({io.at("dataset").get<std::string>(), io.at("bytes").get<double>()});
    }
    r.latency = j.at("latency").get<double>();
    r.selectivity = j.value("selectivity", -1.0);
    r.key_distribution = j.value("key_distribution", -1.0);
    if (r.latency <= 0.0) throw format_error("record latency must be positive");
    for (const DatasetIo& io : r.inputs) {
        if (io.bytes < 0.0) throw format_error("record bytes must be non-negative");
    }
    for (const DatasetIo& io : r.outputs) {
        if (io.bytes < 0.0) throw format_error("record bytes must be non-negative");
    }
    return r;
}

}  // namespace lachesis
