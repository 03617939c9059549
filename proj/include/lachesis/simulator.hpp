#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lachesis/candidate.hpp"
#include "lachesis/features.hpp"
#include "lachesis/policy.hpp"

namespace lachesis {

struct ClusterConfig {
    int m = 1;                      // worker count
    int cores = 1;                  // per worker
    double memory = 0.0;            // bytes per worker
    double disk = 0.0;              // bytes per worker
    double bandwidth = 1.0;         // aggregate bytes/second
    double base_cpu_rate = 1.0;     // processing throughput, bytes/second
};

struct PartitionScheme {
    enum class Variant { Hash, Range, RoundRobin, Random };
    Variant variant = Variant::RoundRobin;
    std::string signature;          // candidate signature for Hash/Range
    std::uint64_t seed = 0;         // Random only

    static PartitionScheme hash(std::string signature);
    static PartitionScheme range(std::string signature);
    static PartitionScheme round_robin();
    static PartitionScheme random(std::uint64_t seed);

    // Canonical latency-table token: "roundrobin", "random",
    // "hash:<hex16 of signature>", "range:<hex16 of signature>".
    std::string token() const;
    bool operator==(const PartitionScheme& other) const {
        return variant == other.variant && signature == other.signature;
    }
};

struct KeyModel {
    std::vector<std::int64_t> explicit_keys;  // used when non-empty
    std::int64_t distinct = 1;
    double zipf = 0.0;                        // 0 = uniform
};

struct SimDataset {
    std::string id;
    std::int64_t n = 0;             // object count
    double object_bytes = 0.0;      // average size
    KeyModel key_model;
    PartitionScheme applied;

    double total_bytes() const { return static_cast<double>(n) * object_bytes; }
    // Deterministic per-object key, derived from (dataset id, key model).
    std::vector<std::int64_t> keys() const;
};

struct DesiredPartitioning {
    std::string signature;
    Strategy strategy = Strategy::Hash;
};

struct WorkloadSpec {
    std::string query_id;
    std::string ir_id;
    std::vector<std::string> inputs;
    std::map<std::string, DesiredPartitioning> desired;   // dataset -> candidate
    std::map<std::string, double> latency_table;          // canonical key -> seconds
    double frequency = 1.0;
    // per-candidate stats for training states
    std::map<std::string, CandidateFeatures> candidate_features;  // signature -> features
};

struct EnvironmentSpec {
    ClusterConfig cluster;
    std::vector<SimDataset> datasets;
    std::vector<WorkloadSpec> workloads;
};

// Eq.-2 key-to-node fold. Deterministic given inputs and seed.
std::vector<int> assign(const SimDataset& dataset, const PartitionScheme& scheme,
                        const ClusterConfig& cluster);

// Per-input shuffle volume: zero when the applied scheme equals the
// workload's desired candidate (signature + strategy), else
// total_bytes * (1 - 1/m).
std::map<std::string, double> shuffle_bytes(const WorkloadSpec& workload,
                                            const std::map<std::string, PartitionScheme>& schemes,
                                            const std::map<std::string, SimDataset>& datasets,
                                            const ClusterConfig& cluster);

// (sum bytes / cpu rate + sum shuffle / bandwidth) * skew factor, where
// skew = max node load / mean node load over the chosen assignments.
double simulate_latency(const WorkloadSpec& workload,
                        const std::map<std::string, PartitionScheme>& schemes,
                        const std::map<std::string, SimDataset>& datasets,
                        const ClusterConfig& cluster);

struct MixtureEntry {
    const WorkloadSpec* spec = nullptr;
    double frequency = 1.0;
};

// Seeded random subset with random frequency weights; never empty.
std::vector<MixtureEntry> sample_workload(const std::vector<WorkloadSpec>& specs,
                                          std::mt19937_64& rng,
                                          double inclusion_prob = 0.5);

// Frequency-weighted reward ratio using the latency tables; baseline is
// all-round-robin. Throws missing_table_entry_error.
double replay_reward(const std::vector<MixtureEntry>& mixture,
                     const std::map<std::string, PartitionScheme>& chosen,
                     const std::map<std::string, SimDataset>& datasets);

std::string latency_table_key(const WorkloadSpec& workload,
                              const std::map<std::string, PartitionScheme>& schemes);

EnvironmentSpec env_spec_from_json(const std::string& text);
EnvironmentSpec env_spec_from_file(const std::string& path);
std::string env_spec_to_json(const EnvironmentSpec& spec);

// Training environment backed by latency-table replay: each decision
// samples a workload mixture, picks a target dataset, builds the top-k
// state, and scores the chosen scheme against the round-robin baseline.
class SimEnv : public Environment {
public:
    SimEnv(EnvironmentSpec spec, int k = kDefaultTopK);

    int state_dim() const override;
    int action_count() const override;
    Sample sample(std::mt19937_64& rng) const override;
    double reward(const Sample& sample, int action) const override;

    const EnvironmentSpec& spec() const { return spec_; }
    // Scheme a trained action decodes to for the sampled decision.
    PartitionScheme decode(const Sample& sample, int action) const;
    std::string target_dataset(const Sample& sample) const;

private:
    struct Decision;
    EnvironmentSpec spec_;
    int k_;
    std::map<std::string, SimDataset> datasets_;
    FeatureWindow window_;
};

}  // namespace lachesis
