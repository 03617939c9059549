#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lachesis/advisor.hpp"
#include "lachesis/demo.hpp"
#include "lachesis/signature.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct CliConfig {
    std::string history_path;
    std::string model_path;
    std::string env_path;
    int k = lachesis::kDefaultTopK;
    lachesis::Hyperparameters hp;
    int batch = 16;
    int epochs = 1;
    int agents = 1;
    std::uint64_t seed = 0;
    double window = lachesis::kDefaultWindow;
};

CliConfig load_config() {
    CliConfig cfg;
    const char* path = std::getenv("LACHESIS_CONFIG");
    if (!path || !*path) return cfg;
    std::ifstream in(path);
    if (!in) throw lachesis::format_error(std::string("cannot open config '") + path + "'");
    json j = json::parse(in);
    cfg.history_path = j.value("history", "");
    cfg.model_path = j.value("model", "");
    cfg.env_path = j.value("env", "");
    cfg.k = j.value("k", cfg.k);
    cfg.hp.alpha = j.value("alpha", cfg.hp.alpha);
    cfg.hp.beta = j.value("beta", cfg.hp.beta);
    cfg.hp.gamma = j.value("gamma", cfg.hp.gamma);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.agents = j.value("agents", cfg.agents);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.window = j.value("window", cfg.window);
    return cfg;
}

void open_history(lachesis::HistoryStore& history, const std::vector<std::string>& ir_paths,
                  const std::string& log_path) {
    for (const std::string& path : ir_paths) {
        history.register_ir(lachesis::ir_from_file(path));
    }
    if (!log_path.empty()) history.ingest_log_file(log_path);
}

lachesis::EnvFeatures env_features(const lachesis::EnvironmentSpec& spec,
                                   const std::string& dataset) {
    lachesis::EnvFeatures env;
    env.workers = static_cast<double>(spec.cluster.m);
    env.cores = static_cast<double>(spec.cluster.cores);
    env.memory_bytes = spec.cluster.memory;
    env.disk_bytes = spec.cluster.disk;
    for (const lachesis::SimDataset& d : spec.datasets) {
        if (d.id == dataset) env.dataset_bytes = d.total_bytes();
    }
    return env;
}

int run(int argc, char** argv) {
    CliConfig cfg = load_config();

    CLI::App app{"partitioning advisor for UDF-centric analytics workloads"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "load execution records, print the skeleton");
    std::string ingest_log = cfg.history_path;
    std::vector<std::string> ingest_irs;
    ingest->add_option("--log", ingest_log, "JSON-lines execution log")->required(cfg.history_path.empty());
    ingest->add_option("--ir", ingest_irs, "IR graph JSON, repeatable")->required();

    // enumerate
    auto* enumerate = app.add_subcommand("enumerate", "list partitioner candidates for a dataset");
    std::vector<std::string> enum_irs;
    std::string enum_dataset;
    enumerate->add_option("--ir", enum_irs, "consumer IR JSON, repeatable")->required();
    enumerate->add_option("--dataset", enum_dataset, "dataset id")->required();

    // stats
    auto* stats = app.add_subcommand("stats", "per-candidate history statistics as CSV");
    std::vector<std::string> stats_irs;
    std::string stats_dataset;
    std::string stats_log = cfg.history_path;
    double stats_now = 0.0;
    stats->add_option("--ir", stats_irs, "consumer IR JSON, repeatable")->required();
    stats->add_option("--dataset", stats_dataset, "dataset id")->required();
    stats->add_option("--log", stats_log, "JSON-lines execution log")->required(cfg.history_path.empty());
    stats->add_option("--now", stats_now, "reference timestamp")->required();

    // pcc
    auto* pcc = app.add_subcommand("pcc", "feature/reward Pearson correlation as CSV");
    std::string pcc_log;
    std::string pcc_feature;
    pcc->add_option("--log", pcc_log, "JSON-lines diagnostics with feature fields and reward")
        ->required();
    pcc->add_option("--feature", pcc_feature, "restrict to one feature column");

    // train
    auto* train_cmd = app.add_subcommand("train", "train the selector against an environment spec");
    std::string train_env = cfg.env_path;
    std::string train_out = cfg.model_path;
    int train_epochs = cfg.epochs, train_batch = cfg.batch, train_agents = cfg.agents;
    int train_k = cfg.k;
    std::uint64_t train_seed = cfg.seed;
    lachesis::Hyperparameters train_hp = cfg.hp;
    train_cmd->add_option("--env", train_env, "environment spec JSON")->required(cfg.env_path.empty());
    train_cmd->add_option("--out", train_out, "checkpoint path")->required(cfg.model_path.empty());
    train_cmd->add_option("--epochs", train_epochs);
    train_cmd->add_option("--batch", train_batch);
    train_cmd->add_option("--agents", train_agents);
    train_cmd->add_option("--seed", train_seed);
    train_cmd->add_option("--k", train_k);
    train_cmd->add_option("--alpha", train_hp.alpha);
    train_cmd->add_option("--beta", train_hp.beta);
    train_cmd->add_option("--gamma", train_hp.gamma);

    // recommend
    auto* recommend_cmd = app.add_subcommand("recommend", "recommend a scheme for a dataset");
    std::string rec_producer, rec_dataset;
    std::string rec_model = cfg.model_path;
    std::string rec_env = cfg.env_path;
    std::string rec_log = cfg.history_path;
    std::vector<std::string> rec_irs;
    bool rec_argmax = false;
    double rec_now = 0.0;
    std::uint64_t rec_seed = cfg.seed;
    int rec_k = cfg.k;
    recommend_cmd->add_option("--producer", rec_producer, "producer IR JSON")->required();
    recommend_cmd->add_option("--dataset", rec_dataset, "dataset id")->required();
    recommend_cmd->add_option("--model", rec_model, "checkpoint path")->required(cfg.model_path.empty());
    recommend_cmd->add_option("--env", rec_env, "environment spec JSON")->required(cfg.env_path.empty());
    recommend_cmd->add_option("--log", rec_log, "JSON-lines execution log")->required(cfg.history_path.empty());
    recommend_cmd->add_option("--ir", rec_irs, "known IR JSON, repeatable");
    recommend_cmd->add_flag("--argmax", rec_argmax, "deterministic argmax decision");
    recommend_cmd->add_option("--now", rec_now, "reference timestamp");
    recommend_cmd->add_option("--seed", rec_seed);
    recommend_cmd->add_option("--k", rec_k);

    // match
    auto* match_cmd = app.add_subcommand("match", "check an applied scheme against a consumer");
    std::string match_scheme, match_consumer;
    match_cmd->add_option("--dataset-scheme", match_scheme,
                          "JSON {dataset, variant, signature}")->required();
    match_cmd->add_option("--consumer", match_consumer, "consumer IR JSON")->required();

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "replay workloads through the simulator");
    std::string sim_env = cfg.env_path;
    simulate_cmd->add_option("--env", sim_env, "environment spec JSON")->required(cfg.env_path.empty());

    // demo
    auto* demo_cmd = app.add_subcommand("demo", "end-to-end pipeline on the built-in fixture");
    int demo_epochs = 50, demo_k = cfg.k;
    std::uint64_t demo_seed = 7;
    demo_cmd->add_option("--epochs", demo_epochs);
    demo_cmd->add_option("--seed", demo_seed);
    demo_cmd->add_option("--k", demo_k);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (ingest->parsed()) {
        lachesis::HistoryStore history(cfg.window);
        open_history(history, ingest_irs, ingest_log);
        std::cout << history.skeleton_to_json() << '\n';
        std::cerr << "ingested " << history.record_count() << " records\n";
        return 0;
    }

    if (enumerate->parsed()) {
        std::vector<lachesis::IrGraph> consumers;
        for (const std::string& path : enum_irs) consumers.push_back(lachesis::ir_from_file(path));
        std::cout << lachesis::candidates_to_json(
                         lachesis::enumerate_candidates(consumers, enum_dataset))
                  << '\n';
        return 0;
    }

    if (stats->parsed()) {
        lachesis::HistoryStore history(cfg.window);
        open_history(history, stats_irs, stats_log);
        std::vector<lachesis::IrGraph> consumers;
        for (const std::string& path : stats_irs) consumers.push_back(lachesis::ir_from_file(path));
        std::cout << "signature,strategy,frequency,distance,recency,complexity\n";
        for (const lachesis::PartitionerCandidate& c :
             lachesis::enumerate_candidates(consumers, stats_dataset)) {
            lachesis::CandidateStats s = history.candidate_stats(c, stats_now);
            std::cout << lachesis::hex16(lachesis::fnv1a64(c.signature)) << ','
                      << lachesis::strategy_name(c.strategy) << ',' << s.frequency << ','
                      << s.distance << ',' << s.recency << ',' << complexity(c.subgraph) << '\n';
        }
        return 0;
    }

    if (pcc->parsed()) {
        std::ifstream in(pcc_log);
        if (!in) throw lachesis::format_error("cannot open log file '" + pcc_log + "'");
        std::map<std::string, std::vector<double>> columns;
        std::vector<double> rewards;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line);
            rewards.push_back(j.at("reward").get<double>());
            for (const auto& [key, value] : j.items()) {
                if (key == "reward" || !value.is_number()) continue;
                columns[key].push_back(value.get<double>());
            }
        }
        std::cout << "feature,reward,pcc\n";
        for (const auto& [name, xs] : columns) {
            if (!pcc_feature.empty() && name != pcc_feature) continue;
            if (xs.size() != rewards.size()) {
                throw lachesis::format_error("feature '" + name + "' missing in some records");
            }
            std::cout << name << ",reward," << lachesis::pearson(xs, rewards) << '\n';
        }
        return 0;
    }

    if (train_cmd->parsed()) {
        lachesis::EnvironmentSpec spec = lachesis::env_spec_from_file(train_env);
        lachesis::SimEnv env(std::move(spec), train_k);
        lachesis::PolicyModel model = lachesis::PolicyModel::init(
            env.state_dim(), env.action_count(), train_seed, train_hp);
        lachesis::TrainOptions opts;
        opts.epochs = train_epochs;
        opts.batch_size = train_batch;
        opts.agents = train_agents;
        opts.seed = train_seed;
        std::vector<double> curve = lachesis::train(model, env, opts);
        lachesis::save_model(model, train_out);
        ordered_json out;
        out["checkpoint"] = train_out;
        out["epoch_mean_reward"] = curve;
        std::cout << out.dump(2) << '\n';
        std::cerr << "trained " << train_epochs << " epochs, saved " << train_out << '\n';
        return 0;
    }

    if (recommend_cmd->parsed()) {
        lachesis::HistoryStore history(cfg.window);
        lachesis::IrGraph producer = lachesis::ir_from_file(rec_producer);
        history.register_ir(producer);
        open_history(history, rec_irs, rec_log);
        lachesis::EnvironmentSpec spec = lachesis::env_spec_from_file(rec_env);
        lachesis::PolicyModel model = lachesis::load_model(rec_model);
        lachesis::AdvisorConfig advisor_cfg;
        advisor_cfg.k = rec_k;
        advisor_cfg.now = rec_now;
        for (const lachesis::SimDataset& d : spec.datasets) {
            advisor_cfg.applied[d.id] = d.applied;
            advisor_cfg.dataset_bytes[d.id] = d.total_bytes();
            advisor_cfg.dataset_objects[d.id] = static_cast<double>(d.n);
        }
        std::mt19937_64 rng(rec_seed);
        lachesis::Recommendation rec = lachesis::recommend(
            producer, rec_dataset, history, env_features(spec, rec_dataset), model,
            rec_argmax ? lachesis::DecisionMode::Argmax : lachesis::DecisionMode::Sample, rng,
            advisor_cfg);
        std::cout << lachesis::recommendation_to_json(rec) << '\n';
        return 0;
    }

    if (match_cmd->parsed()) {
        std::ifstream in(match_scheme);
        if (!in) throw lachesis::format_error("cannot open '" + match_scheme + "'");
        json j = json::parse(in);
        std::string dataset = j.at("dataset").get<std::string>();
        std::string variant = j.at("variant").get<std::string>();
        lachesis::PartitionScheme scheme;
        if (variant == "hash") {
            scheme = lachesis::PartitionScheme::hash(j.at("signature").get<std::string>());
        } else if (variant == "range") {
            scheme = lachesis::PartitionScheme::range(j.at("signature").get<std::string>());
        } else if (variant == "roundrobin") {
            scheme = lachesis::PartitionScheme::round_robin();
        } else if (variant == "random") {
            scheme = lachesis::PartitionScheme::random(j.value("seed", 0));
        } else {
            throw lachesis::format_error("unknown scheme variant '" + variant + "'");
        }
        lachesis::IrGraph consumer = lachesis::ir_from_file(match_consumer);
        std::cout << lachesis::verdicts_to_json(dataset,
                                                lachesis::consult(dataset, scheme, consumer))
                  << '\n';
        return 0;
    }

    if (simulate_cmd->parsed()) {
        lachesis::EnvironmentSpec spec = lachesis::env_spec_from_file(sim_env);
        std::map<std::string, lachesis::SimDataset> datasets;
        std::map<std::string, lachesis::PartitionScheme> schemes;
        for (const lachesis::SimDataset& d : spec.datasets) {
            datasets[d.id] = d;
            schemes[d.id] = d.applied;
        }
        ordered_json out = ordered_json::array();
        for (const lachesis::WorkloadSpec& w : spec.workloads) {
            double latency = lachesis::simulate_latency(w, schemes, datasets, spec.cluster);
            double shuffle = 0.0;
            for (const auto& [_, bytes] :
                 lachesis::shuffle_bytes(w, schemes, datasets, spec.cluster)) {
                shuffle += bytes;
            }
            out.push_back({{"query_id", w.query_id},
                           {"latency_seconds", latency},
                           {"shuffle_bytes", shuffle}});
        }
        std::cout << out.dump(2) << '\n';
        return 0;
    }

    if (demo_cmd->parsed()) {
        lachesis::demo::DemoResult result = lachesis::demo::run_demo(demo_epochs, demo_seed, demo_k);
        std::cout << lachesis::demo::demo_to_json(result) << '\n';
        std::cerr << "demo candidate " << lachesis::hex16(lachesis::fnv1a64(result.candidate_signature))
                  << '\n';
        return 0;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const lachesis::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
