#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "lachesis/candidate.hpp"

namespace lachesis {

inline constexpr int kCandidateFeatureCount = 8;
inline constexpr int kEnvFeatureCount = 5;
inline constexpr int kDefaultTopK = 3;

struct CandidateFeatures {
    double frequency = 0.0;
    double distance = 0.0;
    double recency = 0.0;
    double complexity = 0.0;
    double selectivity = 1.0;        // clamped into (0,1]
    double key_distribution = 0.0;   // distinct-key count
    double num_copartitioned = 0.0;
    double size_copartitioned = 0.0;

    std::array<double, kCandidateFeatureCount> as_array() const;
};

struct EnvFeatures {
    double dataset_bytes = 0.0;
    double workers = 0.0;
    double cores = 0.0;
    double memory_bytes = 0.0;
    double disk_bytes = 0.0;

    std::array<double, kEnvFeatureCount> as_array() const;
};

struct ScoredCandidate {
    std::string signature;
    Strategy strategy = Strategy::Hash;
    CandidateFeatures features;
};

// Min-max bounds per feature column, accumulated over the history window.
// Degenerate columns (min == max) normalize to 0.5.
class FeatureWindow {
public:
    void observe(const CandidateFeatures& f);
    void observe_env(const EnvFeatures& e);
    double normalize_candidate(int column, double value) const;
    double normalize_env(int column, double value) const;

private:
    struct Bounds {
        double lo = 0.0;
        double hi = 0.0;
        bool seen = false;
        void update(double v);
        double normalize(double v) const;
    };
    std::array<Bounds, kCandidateFeatureCount> candidate_{};
    std::array<Bounds, kEnvFeatureCount> env_{};
};

struct StateVector {
    std::vector<double> values;           // k*8 candidate block + 5 env block
    std::vector<std::string> slot_signatures;  // candidate -> slot mapping
    std::vector<Strategy> slot_strategies;
    int k = kDefaultTopK;
};

// Node count of the longest root->leaf path.
int complexity(const TwoTerminalDag& dag);

// Shared-candidate rule: mean of frequency/distance/recency across the
// contributing queries, max selectivity, min distinct keys. Complexity and
// co-partitioning fields come from the first entry (they are per candidate
// and per workload, not per query).
CandidateFeatures combine_shared(std::span<const CandidateFeatures> per_query);

// Top-k by (frequency desc, num_copartitioned desc, recency asc,
// signature lex), normalized via the window; missing slots zero-filled.
StateVector build_state(std::vector<ScoredCandidate> candidates, const EnvFeatures& env, int k,
                        const FeatureWindow& window);

// Sample Pearson correlation coefficient. Throws degenerate_variance_error.
double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace lachesis
