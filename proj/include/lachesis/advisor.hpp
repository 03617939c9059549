#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lachesis/candidate.hpp"
#include "lachesis/features.hpp"
#include "lachesis/history.hpp"
#include "lachesis/policy.hpp"
#include "lachesis/simulator.hpp"

namespace lachesis {

enum class DecisionMode { Sample, Argmax };

struct SlateEntry {
    PartitionerCandidate candidate;
    CandidateFeatures features;
};

struct Recommendation {
    std::string dataset;
    PartitionScheme chosen;
    std::vector<double> distribution;   // over slate actions + round-robin
    std::vector<SlateEntry> slate;
};

struct JoinVerdict {
    int anchor = 0;
    bool local = false;   // local join possible, shuffle avoided
};

struct AdvisorConfig {
    int k = kDefaultTopK;
    double now = 0.0;  // stats reference timestamp
    // applied partitionings of existing datasets, for co-partitioning counts
    std::map<std::string, PartitionScheme> applied;
    std::map<std::string, double> dataset_bytes;
    // fallback distinct-key counts when no run logged key statistics
    std::map<std::string, double> dataset_objects;
};

struct AdvisorState {
    StateVector state;
    std::vector<ScoredCandidate> scored;
};

// Feature extraction + top-k state assembly shared by recommend/reorganize
// and by replay-trained environments serving the same slate.
AdvisorState build_advisor_state(const std::vector<PartitionerCandidate>& candidates,
                                 const HistoryStore& history, const EnvFeatures& env,
                                 const AdvisorConfig& config);

// Alg.-3 flow: predict consumers from history, enumerate candidates, build
// the top-k state, and decode the policy's action into a scheme. Falls back
// to round-robin when no candidate exists.
Recommendation recommend(const IrGraph& producer, const std::string& dataset,
                         const HistoryStore& history, const EnvFeatures& env,
                         const PolicyModel& model, DecisionMode mode, std::mt19937_64& rng,
                         const AdvisorConfig& config = {});

// Same flow seeded from an explicit consumer list (reactive reorganization).
Recommendation reorganize(const std::string& dataset, const std::vector<IrGraph>& consumers,
                          const HistoryStore& history, const EnvFeatures& env,
                          const PolicyModel& model, DecisionMode mode, std::mt19937_64& rng,
                          const AdvisorConfig& config = {});

// Per-join-anchor verdict for a consumer reading the dataset under the
// applied scheme. Round-robin/random schemes always shuffle.
std::vector<JoinVerdict> consult(const std::string& dataset, const PartitionScheme& applied,
                                 const IrGraph& consumer);

std::string recommendation_to_json(const Recommendation& rec);
std::string verdicts_to_json(const std::string& dataset, const std::vector<JoinVerdict>& verdicts);

}  // namespace lachesis
