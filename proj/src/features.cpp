#include "lachesis/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace lachesis {

std::array<double, kCandidateFeatureCount> CandidateFeatures::as_array() const {
    return {frequency,   distance,         recency,           complexity,
            selectivity, key_distribution, num_copartitioned, size_copartitioned};
}

std::array<double, kEnvFeatureCount> EnvFeatures::as_array() const {
    return {dataset_bytes, workers, cores, memory_bytes, disk_bytes};
}

void FeatureWindow::Bounds::update(double v) {
    if (!seen) {
        lo = hi = v;
        seen = true;
    } else {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
}

double FeatureWindow::Bounds::normalize(double v) const {
    if (!seen || hi == lo) return 0.5;
    double t = (v - lo) / (hi - lo);
    return std::clamp(t, 0.0, 1.0);
}

void FeatureWindow::observe(const CandidateFeatures& f) {
    auto values = f.as_array();
    for (int i = 0; i < kCandidateFeatureCount; ++i) candidate_[i].update(values[i]);
}

void FeatureWindow::observe_env(const EnvFeatures& e) {
    auto values = e.as_array();
    for (int i = 0; i < kEnvFeatureCount; ++i) env_[i].update(values[i]);
}

double FeatureWindow::normalize_candidate(int column, double value) const {
    return candidate_[column].normalize(value);
}

double FeatureWindow::normalize_env(int column, double value) const {
    return env_[column].normalize(value);
}

int complexity(const TwoTerminalDag& dag) {
    IrGraph g = dag.as_graph();
    std::vector<int> order = g.topological_order();
    std::map<int, int> longest;  // node count of longest dag.root -> id path
    longest[dag.root] = 1;
    int best = 0;
    for (int id : order) {
        auto it = longest.find(id);
        if (it == longest.end()) continue;  // unreachable from root
        if (id == dag.leaf) best = std::max(best, it->second);
        for (int c : g.children(id)) {
            int via = it->second + 1;
            auto [cit, inserted] = longest.emplace(c, via);
            if (!inserted) cit->second = std::max(cit->second, via);
        }
    }
    return best;
}

CandidateFeatures combine_shared(std::span<const CandidateFeatures> per_query) {
    if (per_query.empty()) throw domain_error("combine_shared requires at least one query");
    CandidateFeatures out = per_query.front();
    double n = static_cast<double>(per_query.size());
    double freq = 0.0, dist = 0.0, rec = 0.0;
    double sel = per_query.front().selectivity;
    double keys = per_query.front().key_distribution;
    for (const CandidateFeatures& f : per_query) {
        freq += f.frequency;
        dist += f.distance;
        rec += f.recency;
        sel = std::max(sel, f.selectivity);
        keys = std::min(keys, f.key_distribution);
    }
    out.frequency = freq / n;
    out.distance = dist / n;
    out.recency = rec / n;
    out.selectivity = std::clamp(sel, 0.0, 1.0);
    out.key_distribution = keys;
    return out;
}

StateVector build_state(std::vector<ScoredCandidate> candidates, const EnvFeatures& env, int k,
                        const FeatureWindow& window) {
    std::sort(candidates.begin(), candidates.end(),
              [](const ScoredCandidate& a, const ScoredCandidate& b) {
                  if (a.features.frequency != b.features.frequency)
                      return a.features.frequency > b.features.frequency;
                  if (a.features.num_copartitioned != b.features.num_copartitioned)
                      return a.features.num_copartitioned > b.features.num_copartitioned;
                  if (a.features.recency != b.features.recency)
                      return a.features.recency < b.features.recency;
                  return a.signature < b.signature;
              });
    StateVector state;
    state.k = k;
    state.values.assign(static_cast<std::size_t>(k) * kCandidateFeatureCount + kEnvFeatureCount,
                        0.0);
    for (int slot = 0; slot < k && slot < static_cast<int>(candidates.size()); ++slot) {
        const ScoredCandidate& c = candidates[slot];
        state.slot_signatures.push_back(c.signature);
        state.slot_strategies.push_back(c.strategy);
        auto raw = c.features.as_array();
        for (int col = 0; col < kCandidateFeatureCount; ++col) {
            state.values[slot * kCandidateFeatureCount + col] =
                window.normalize_candidate(col, raw[col]);
        }
    }
    auto env_raw = env.as_array();
    for (int col = 0; col < kEnvFeatureCount; ++col) {
        state.values[static_cast<std::size_t>(k) * kCandidateFeatureCount + col] =
            window.normalize_env(col, env_raw[col]);
    }
    return state;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) {
        throw domain_error("pearson requires equal-length series of at least 2");
    }
    double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw degenerate_variance_error();
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace lachesis
