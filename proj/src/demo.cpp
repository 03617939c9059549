#include "lachesis/demo.hpp"

#include <json.hpp>

#include "lachesis/signature.hpp"

namespace lachesis::demo {

IrGraph reddit_consumer() {
    std::vector<IrNode> nodes = {
        {1, NodeKind::Scan, "comments", "", "set<comment>"},
        {2, NodeKind::OpaqueFunc, "parse", "string", "json"},
        {3, NodeKind::Member, "author", "json", "string"},
        {4, NodeKind::Member, "subreddit_id", "json", "string"},
        {5, NodeKind::OpaqueFunc, "classify", "json", "bool"},
        {6, NodeKind::Conditional, "", "string", "string"},
        {7, NodeKind::Scan, "authors", "", "set<author>"},
        {8, NodeKind::OpaqueFunc, "csv_parse", "string", "row"},
        {9, NodeKind::Index, "1", "row", "string"},
        {10, NodeKind::Scan, "subreddits", "", "set<subreddit>"},
        {11, NodeKind::OpaqueFunc, "json_parse", "string", "json"},
        {12, NodeKind::Member, "id", "json", "string"},
        {13, NodeKind::Pair, "", "string", "pair"},
        {14, NodeKind::Pair, "", "string", "pair"},
        {15, NodeKind::Join, "", "pair", "set<tuple>"},
        {16, NodeKind::Write, "features", "set<tuple>", ""},
    };
    std::vector<IrEdge> edges = {
        {1, 2, FlowKind::Data},   {2, 3, FlowKind::Data},   {2, 4, FlowKind::Data},
        {2, 5, FlowKind::Data},   {3, 6, FlowKind::Data},   {4, 6, FlowKind::Data},
        {5, 6, FlowKind::Control}, {6, 13, FlowKind::Data},  {6, 14, FlowKind::Data},
        {7, 8, FlowKind::Data},   {8, 9, FlowKind::Data},   {9, 13, FlowKind::Data},
        {10, 11, FlowKind::Data}, {11, 12, FlowKind::Data}, {12, 14, FlowKind::Data},
        {13, 15, FlowKind::Data}, {14, 15, FlowKind::Data}, {15, 16, FlowKind::Data},
    };
    return IrGraph("reddit-feature-extractor", std::move(nodes), std::move(edges));
}

IrGraph comments_producer() {
    std::vector<IrNode> nodes = {
        {1, NodeKind::Scan, "comments_raw", "", "set<string>"},
        {2, NodeKind::Apply, "", "string", "comment"},
        {3, NodeKind::Write, "comments", "set<comment>", ""},
    };
    std::vector<IrEdge> edges = {{1, 2, FlowKind::Data}, {2, 3, FlowKind::Data}};
    return IrGraph("comments-loader", std::move(nodes), std::move(edges));
}

namespace {

// Fixed-slate environment replaying the demo latency table; its state is
// exactly the serving-time advisor state so the trained argmax transfers.
class DemoEnv : public Environment {
public:
    DemoEnv(StateVector state, std::vector<MixtureEntry> mixture, std::string target,
            std::map<std::string, SimDataset> datasets)
        : state_(std::move(state)),
          mixture_(std::move(mixture)),
          target_(std::move(target)),
          datasets_(std::move(datasets)) {}

    int state_dim() const override { return static_cast<int>(state_.values.size()); }
    int action_count() const override { return state_.k + 1; }

    Sample sample(std::mt19937_64&) const override { return {state_.values, nullptr}; }

    PartitionScheme decode(int action) const {
        if (action >= 0 && action < static_cast<int>(state_.slot_signatures.size())) {
            const std::string& sig = state_.slot_signatures[static_cast<std::size_t>(action)];
            return state_.slot_strategies[static_cast<std::size_t>(action)] == Strategy::Hash
                       ? PartitionScheme::hash(sig)
                       : PartitionScheme::range(sig);
        }
        return PartitionScheme::round_robin();
    }

    double reward(const Sample&, int action) const override {
        std::map<std::string, PartitionScheme> chosen;
        chosen[target_] = decode(action);
        return replay_reward(mixture_, chosen, datasets_);
    }

private:
    StateVector state_;
    std::vector<MixtureEntry> mixture_;
    std::string target_;
    std::map<std::string, SimDataset> datasets_;
};

}  // namespace

DemoResult run_demo(int epochs, std::uint64_t seed, int k) {
    IrGraph consumer = reddit_consumer();
    IrGraph producer = comments_producer();

    HistoryStore history;
    history.register_ir(producer);
    history.register_ir(consumer);
    history.ingest({"loader-1", 1000.0, producer.ir_id(), {{"comments_raw", 4.0e9}},
                    {{"comments", 4.0e9}}, 120.0});
    history.ingest({"extractor-1", 2000.0, consumer.ir_id(),
                    {{"comments", 4.0e9}, {"authors", 1.0e9}, {"subreddits", 5.0e8}},
                    {{"features", 2.0e9}}, 300.0});
    history.ingest({"extractor-2", 4000.0, consumer.ir_id(),
                    {{"comments", 4.0e9}, {"authors", 1.0e9}, {"subreddits", 5.0e8}},
                    {{"features", 2.0e9}}, 310.0});
    history.ingest({"extractor-3", 6000.0, consumer.ir_id(),
                    {{"comments", 4.0e9}, {"authors", 1.0e9}, {"subreddits", 5.0e8}},
                    {{"features", 2.0e9}}, 290.0});

    std::vector<PartitionerCandidate> candidates = enumerate_candidates({consumer}, "comments");
    if (candidates.size() != 1) throw domain_error("demo fixture expected one comments candidate");
    const std::string sig = candidates.front().signature;

    ClusterConfig cluster{4, 8, 32.0e9, 500.0e9, 1.0e9, 2.0e8};
    EnvFeatures env{4.0e9, static_cast<double>(cluster.m), static_cast<double>(cluster.cores),
                    cluster.memory, cluster.disk};
    AdvisorConfig config;
    config.k = k;
    config.now = 7000.0;

    // latency table: co-partitioning comments halves the join latency
    std::map<std::string, SimDataset> datasets;
    datasets["comments"] = {"comments", 1000, 4.0e6, {{}, 500, 0.0}, PartitionScheme::round_robin()};
    datasets["authors"] = {"authors", 500, 2.0e6, {{}, 500, 0.0}, PartitionScheme::round_robin()};
    datasets["subreddits"] = {"subreddits", 100, 5.0e6, {{}, 100, 0.0},
                              PartitionScheme::round_robin()};

    WorkloadSpec workload;
    workload.query_id = "reddit-join";
    workload.ir_id = consumer.ir_id();
    workload.inputs = {"comments", "authors", "subreddits"};
    workload.desired["comments"] = {sig, Strategy::Hash};
    workload.frequency = 1.0;
    std::map<std::string, PartitionScheme> matched{{"comments", PartitionScheme::hash(sig)}};
    workload.latency_table[latency_table_key(workload, {})] = 300.0;
    workload.latency_table[latency_table_key(workload, matched)] = 150.0;

    AdvisorState serving = build_advisor_state(candidates, history, env, config);
    std::vector<MixtureEntry> mixture{{&workload, 1.0}};
    DemoEnv demo_env(serving.state, mixture, "comments", datasets);

    PolicyModel model = PolicyModel::init(demo_env.state_dim(), demo_env.action_count(), seed);
    TrainOptions opts;
    opts.epochs = epochs;
    opts.seed = seed;
    DemoResult result;
    result.reward_curve = train(model, demo_env, opts);

    std::mt19937_64 rng(seed);
    result.recommendation = recommend(producer, "comments", history, env, model,
                                      DecisionMode::Argmax, rng, config);
    result.verdicts = consult("comments", result.recommendation.chosen, consumer);
    result.candidate_signature = sig;
    return result;
}

std::string demo_to_json(const DemoResult& result) {
    nlohmann::ordered_json j;
    j["recommendation"] = nlohmann::ordered_json::parse(
        recommendation_to_json(result.recommendation));
    j["consult"] = nlohmann::ordered_json::parse(
        verdicts_to_json("comments", result.verdicts));
    j["epochs"] = result.reward_curve.size();
    j["final_mean_reward"] =
        result.reward_curve.empty() ? 0.0 : result.reward_curve.back();
    return j.dump(2);
}

}  // namespace lachesis::demo
