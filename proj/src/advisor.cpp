#include "lachesis/advisor.hpp"

#include <algorithm>

#include <json.hpp>

#include "lachesis/signature.hpp"

namespace lachesis {

AdvisorState build_advisor_state(const std::vector<PartitionerCandidate>& candidates,
                                 const HistoryStore& history, const EnvFeatures& env,
                                 const AdvisorConfig& config) {
    FeatureWindow window;
    AdvisorState out;
    for (const PartitionerCandidate& c : candidates) {
        CandidateStats stats = history.candidate_stats(c, config.now);
        CandidateFeatures f;
        f.frequency = stats.frequency;
        f.distance = stats.distance;
        f.recency = stats.recency;
        f.complexity = static_cast<double>(complexity(c.subgraph));
        if (stats.selectivity >= 0.0) f.selectivity = std::min(stats.selectivity, 1.0);
        if (stats.key_distribution >= 0.0) {
            f.key_distribution = stats.key_distribution;
        } else {
            auto objects = config.dataset_objects.find(c.dataset);
            if (objects != config.dataset_objects.end()) f.key_distribution = objects->second;
        }
        for (const auto& [ds, scheme] : config.applied) {
            if (ds == c.dataset) continue;
            if ((scheme.variant == PartitionScheme::Variant::Hash ||
                 scheme.variant == PartitionScheme::Variant::Range) &&
                scheme.signature == c.signature) {
                f.num_copartitioned += 1.0;
                auto bytes = config.dataset_bytes.find(ds);
                if (bytes != config.dataset_bytes.end()) f.size_copartitioned += bytes->second;
            }
        }
        window.observe(f);
        out.scored.push_back({c.signature, c.strategy, f});
    }
    window.observe_env(env);
    out.state = build_state(out.scored, env, config.k, window);
    return out;
}

namespace {

Recommendation decide(const std::string& dataset, const std::vector<IrGraph>& consumers,
                      const HistoryStore& history, const EnvFeatures& env,
                      const PolicyModel& model, DecisionMode mode, std::mt19937_64& rng,
                      const AdvisorConfig& config) {
    Recommendation rec;
    rec.dataset = dataset;

    std::vector<PartitionerCandidate> candidates = enumerate_candidates(consumers, dataset);
    if (candidates.empty()) {
        rec.chosen = PartitionScheme::round_robin();
        return rec;
    }

    std::map<std::string, const PartitionerCandidate*> by_signature;
    for (const PartitionerCandidate& c : candidates) by_signature[c.signature] = &c;

    AdvisorState advisor_state = build_advisor_state(candidates, history, env, config);
    const StateVector& state = advisor_state.state;
    const std::vector<ScoredCandidate>& scored = advisor_state.scored;
    Eigen::VectorXd probs = model.policy(state.values);
    rec.distribution.assign(probs.data(), probs.data() + probs.size());

    int action;
    if (mode == DecisionMode::Argmax) {
        Eigen::Index best;
        probs.maxCoeff(&best);
        action = static_cast<int>(best);
    } else {
        action = act(model, state.values, rng).action;
    }

    for (std::size_t slot = 0; slot < state.slot_signatures.size(); ++slot) {
        const PartitionerCandidate& c = *by_signature.at(state.slot_signatures[slot]);
        SlateEntry entry;
        entry.candidate = c;
        for (const ScoredCandidate& s : scored) {
            if (s.signature == c.signature) entry.features = s.features;
        }
        rec.slate.push_back(std::move(entry));
    }

    if (action >= 0 && action < static_cast<int>(state.slot_signatures.size())) {
        const std::string& sig = state.slot_signatures[static_cast<std::size_t>(action)];
        rec.chosen = state.slot_strategies[static_cast<std::size_t>(action)] == Strategy::Hash
                         ? PartitionScheme::hash(sig)
                         : PartitionScheme::range(sig);
    } else {
        rec.chosen = PartitionScheme::round_robin();
    }
    return rec;
}

}  // namespace

Recommendation recommend(const IrGraph& producer, const std::string& dataset,
                         const HistoryStore& history, const EnvFeatures& env,
                         const PolicyModel& model, DecisionMode mode, std::mt19937_64& rng,
                         const AdvisorConfig& config) {
    std::vector<IrGraph> consumers;
    for (const ConsumerPrediction& pred : history.predict_consumers(producer)) {
        if (history.has_ir(pred.ir_id)) consumers.push_back(history.ir(pred.ir_id));
    }
    return decide(dataset, consumers, history, env, model, mode, rng, config);
}

Recommendation reorganize(const std::string& dataset, const std::vector<IrGraph>& consumers,
                          const HistoryStore& history, const EnvFeatures& env,
                          const PolicyModel& model, DecisionMode mode, std::mt19937_64& rng,
                          const AdvisorConfig& config) {
    if (consumers.empty()) throw domain_error("reorganize requires at least one consumer");
    return decide(dataset, consumers, history, env, model, mode, rng, config);
}

std::vector<JoinVerdict> consult(const std::string& dataset, const PartitionScheme& applied,
                                 const IrGraph& consumer) {
    std::optional<int> scan = consumer.find_scanner(dataset);
    if (!scan) throw absent_scan_error(dataset);
    std::vector<int> anchors = consumer.join_anchors_from(*scan);

    std::vector<JoinVerdict> verdicts;
    if (applied.variant != PartitionScheme::Variant::Hash &&
        applied.variant != PartitionScheme::Variant::Range) {
        for (int anchor : anchors) verdicts.push_back({anchor, false});
        return verdicts;
    }

    PartitionerCandidate probe;
    probe.dataset = dataset;
    probe.strategy =
        applied.variant == PartitionScheme::Variant::Hash ? Strategy::Hash : Strategy::Range;
    probe.signature = applied.signature;
    std::vector<std::string> sigs = split_signature_set(applied.signature);

    std::vector<AnchorMatch> matches = partitioning_match(probe, sigs, consumer, anchors);
    for (int anchor : anchors) {
        bool local = std::any_of(matches.begin(), matches.end(),
                                 [anchor](const AnchorMatch& m) { return m.anchor == anchor; });
        verdicts.push_back({anchor, local});
    }
    return verdicts;
}

std::string recommendation_to_json(const Recommendation& rec) {
    nlohmann::ordered_json j;
    j["dataset"] = rec.dataset;
    switch (rec.chosen.variant) {
        case PartitionScheme::Variant::Hash:
            j["chosen"] = {{"variant", "hash"}, {"signature", rec.chosen.signature}};
            break;
        case PartitionScheme::Variant::Range:
            j["chosen"] = {{"variant", "range"}, {"signature", rec.chosen.signature}};
            break;
        case PartitionScheme::Variant::RoundRobin:
            j["chosen"] = {{"variant", "roundrobin"}};
            break;
        case PartitionScheme::Variant::Random:
            j["chosen"] = {{"variant", "random"}, {"seed", rec.chosen.seed}};
            break;
    }
    j["distribution"] = rec.distribution;
    j["slate"] = nlohmann::ordered_json::array();
    for (const SlateEntry& entry : rec.slate) {
        nlohmann::ordered_json je;
        je["signature"] = entry.candidate.signature;
        je["strategy"] = strategy_name(entry.candidate.strategy);
        je["origin_ir"] = entry.candidate.origin_ir;
        je["features"] = {{"frequency", entry.features.frequency},
                          {"distance", entry.features.distance},
                          {"recency", entry.features.recency},
                          {"complexity", entry.features.complexity},
                          {"selectivity", entry.features.selectivity},
                          {"key_distribution", entry.features.key_distribution},
                          {"num_copartitioned", entry.features.num_copartitioned},
                          {"size_copartitioned", entry.features.size_copartitioned}};
        j["slate"].push_back(std::move(je));
    }
    return j.dump(2);
}

std::string verdicts_to_json(const std::string& dataset,
                             const std::vector<JoinVerdict>& verdicts) {
    nlohmann::ordered_json j;
    j["dataset"] = dataset;
    j["joins"] = nlohmann::ordered_json::array();
    for (const JoinVerdict& v : verdicts) {
        j["joins"].push_back({{"anchor", v.anchor}, {"verdict", v.local ? "local" : "shuffle"}});
    }
    return j.dump(2);
}

}  // namespace lachesis
