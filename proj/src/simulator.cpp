#include "lachesis/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lachesis/signature.hpp"

namespace lachesis {

PartitionScheme PartitionScheme::hash(std::string signature) {
    return {Variant::Hash, std::move(signature), 0};
}
PartitionScheme PartitionScheme::range(std::string signature) {
    return {Variant::Range, std::move(signature), 0};
}
PartitionScheme PartitionScheme::round_robin() { return {Variant::RoundRobin, "", 0}; }
PartitionScheme PartitionScheme::random(std::uint64_t seed) {
    return {Variant::Random, "", seed};
}

std::string PartitionScheme::token() const {
    switch (variant) {
        case Variant::RoundRobin:
            return "roundrobin";
        case Variant::Random:
            return "random";
        case Variant::Hash:
            return "hash:" + hex16(fnv1a64(signature));
        case Variant::Range:
            return "range:" + hex16(fnv1a64(signature));
    }
    return "roundrobin";
}

std::vector<std::int64_t> SimDataset::keys() const {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(n));
    if (!key_model.explicit_keys.empty()) {
        for (std::int64_t i = 0; i < n; ++i) {
            out.push_back(key_model.explicit_keys[static_cast<std::size_t>(
                i % static_cast<std::int64_t>(key_model.explicit_keys.size()))]);
        }
        return out;
    }
    std::int64_t distinct = std::max<std::int64_t>(1, std::min(key_model.distinct, n > 0 ? n : 1));
    std::mt19937_64 rng(fnv1a64(id));
    if (key_model.zipf <= 0.0) {
        std::uniform_int_distribution<std::int64_t> dist(0, distinct - 1);
        for (std::int64_t i = 0; i < n; ++i) out.push_back(dist(rng));
        return out;
    }
    // inverse-CDF Zipf over ranks 1..distinct, p(r) proportional to r^-s
    std::vector<double> cdf(static_cast<std::size_t>(distinct));
    double acc = 0.0;
    for (std::int64_t r = 1; r <= distinct; ++r) {
        acc += std::pow(static_cast<double>(r), -key_model.zipf);
        cdf[static_cast<std::size_t>(r - 1)] = acc;
    }
    std::uniform_real_distribution<double> uni(0.0, acc);
    for (std::int64_t i = 0; i < n; ++i) {
        double u = uni(rng);
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        out.push_back(static_cast<std::int64_t>(it - cdf.begin()));
    }
    return out;
}

std::vector<int> assign(const SimDataset& dataset, const PartitionScheme& scheme,
                        const ClusterConfig& cluster) {
    if (cluster.m < 1) throw domain_error("cluster must have at least one node");
    std::int64_t m = cluster.m;
    std::vector<int> nodes(static_cast<std::size_t>(dataset.n), 0);

    switch (scheme.variant) {
        case PartitionScheme::Variant::RoundRobin:
            for (std::int64_t i = 0; i < dataset.n; ++i) {
                nodes[static_cast<std::size_t>(i)] = static_cast<int>(i % m);
            }
            return nodes;
        case PartitionScheme::Variant::Random: {
            std::mt19937_64 rng(scheme.seed);
            std::uniform_int_distribution<std::int64_t> dist(0, m - 1);
            for (std::int64_t i = 0; i < dataset.n; ++i) {
                nodes[static_cast<std::size_t>(i)] = static_cast<int>(dist(rng));
            }
            return nodes;
        }
        case PartitionScheme::Variant::Hash: {
            std::vector<std::int64_t> keys = dataset.keys();
            for (std::int64_t i = 0; i < dataset.n; ++i) {
                std::uint64_t h = fnv1a64(std::to_string(keys[static_cast<std::size_t>(i)]));
                nodes[static_cast<std::size_t>(i)] = static_cast<int>(h % static_cast<std::uint64_t>(m));
            }
            return nodes;
        }
        case PartitionScheme::Variant::Range: {
            std::vector<std::int64_t> keys = dataset.keys();
            // equi-depth boundaries on a sample of at most 10000 keys
            std::vector<std::int64_t> sample;
            if (keys.size() <= 10000) {
                sample = keys;
            } else {
                std::size_t stride = keys.size() / 10000;
                for (std::size_t i = 0; i < keys.size(); i += stride) sample.push_back(keys[i]);
            }
            std::sort(sample.begin(), sample.end());
            std::vector<std::int64_t> boundaries;  // upper bound of each bucket but the last
            for (std::int64_t b = 1; b < m; ++b) {
                std::size_t idx = static_cast<std::size_t>(b) * sample.size() / static_cast<std::size_t>(m);
                if (idx >= sample.size()) idx = sample.size() - 1;
                boundaries.push_back(sample.empty() ? 0 : sample[idx]);
            }
            for (std::int64_t i = 0; i < dataset.n; ++i) {
                std::int64_t key = keys[static_cast<std::size_t>(i)];
                auto it = std::lower_bound(boundaries.begin(), boundaries.end(), key,
                                           [](std::int64_t bound, std::int64_t k) { return bound < k; });
                std::int64_t bucket = it - boundaries.begin();  // left-closed buckets
                nodes[static_cast<std::size_t>(i)] = static_cast<int>(bucket % m);
            }
            return nodes;
        }
    }
    return nodes;
}

namespace {

bool scheme_matches_desired(const PartitionScheme& scheme, const DesiredPartitioning& desired) {
    if (scheme.variant == PartitionScheme::Variant::Hash) {
        return desired.strategy == Strategy::Hash && scheme.signature == desired.signature;
    }
    if (scheme.variant == PartitionScheme::Variant::Range) {
        return desired.strategy == Strategy::Range && scheme.signature == desired.signature;
    }
    return false;
}

const PartitionScheme& scheme_for(const std::map<std::string, PartitionScheme>& schemes,
                                  const std::string& dataset) {
    static const PartitionScheme rr = PartitionScheme::round_robin();
    auto it = schemes.find(dataset);
    return it == schemes.end() ? rr : it->second;
}

}  // namespace

std::map<std::string, double> shuffle_bytes(const WorkloadSpec& workload,
                                            const std::map<std::string, PartitionScheme>& schemes,
                                            const std::map<std::string, SimDataset>& datasets,
                                            const ClusterConfig& cluster) {
    std::map<std::string, double> out;
    double spread = 1.0 - 1.0 / static_cast<double>(cluster.m);
    for (const std::string& input : workload.inputs) {
        auto ds_it = datasets.find(input);
        if (ds_it == datasets.end()) throw domain_error("unknown dataset '" + input + "'");
        auto desired_it = workload.desired.find(input);
        if (desired_it == workload.desired.end()) {
            out[input] = 0.0;  // no partition-requiring operator on this input
            continue;
        }
        const PartitionScheme& scheme = scheme_for(schemes, input);
        out[input] = scheme_matches_desired(scheme, desired_it->second)
                         ? 0.0
                         : ds_it->second.total_bytes() * spread;
    }
    return out;
}

double simulate_latency(const WorkloadSpec& workload,
                        const std::map<std::string, PartitionScheme>& schemes,
                        const std::map<std::string, SimDataset>& datasets,
                        const ClusterConfig& cluster) {
    double cpu_bytes = 0.0;
    std::vector<double> node_load(static_cast<std::size_t>(cluster.m), 0.0);
    for (const std::string& input : workload.inputs) {
        const SimDataset& ds = datasets.at(input);
        cpu_bytes += ds.total_bytes();
        std::vector<int> nodes = assign(ds, scheme_for(schemes, input), cluster);
        for (int node : nodes) node_load[static_cast<std::size_t>(node)] += ds.object_bytes;
    }
    double shuffled = 0.0;
    for (const auto& [_, bytes] : shuffle_bytes(workload, schemes, datasets, cluster)) {
        shuffled += bytes;
    }
    double total = 0.0, peak = 0.0;
    for (double load : node_load) {
        total += load;
        peak = std::max(peak, load);
    }
    double skew = total > 0.0 ? peak / (total / static_cast<double>(cluster.m)) : 1.0;
    return (cpu_bytes / cluster.base_cpu_rate + shuffled / cluster.bandwidth) * skew;
}

std::vector<MixtureEntry> sample_workload(const std::vector<WorkloadSpec>& specs,
                                          std::mt19937_64& rng, double inclusion_prob) {
    if (specs.empty()) throw domain_error("sample_workload requires at least one spec");
    if (specs.size() == 1) return {{&specs.front(), 1.0}};

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> weight(1, 4);
    std::vector<MixtureEntry> mixture;
    for (const WorkloadSpec& spec : specs) {
        if (uni(rng) < inclusion_prob) {
            mixture.push_back({&spec, static_cast<double>(weight(rng))});
        }
    }
    if (mixture.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, specs.size() - 1);
        mixture.push_back({&specs[pick(rng)], static_cast<double>(weight(rng))});
    }
    return mixture;
}

std::string latency_table_key(const WorkloadSpec& workload,
                              const std::map<std::string, PartitionScheme>& schemes) {
    std::vector<std::string> inputs = workload.inputs;
    std::sort(inputs.begin(), inputs.end());
    std::ostringstream key;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (i > 0) key << ';';
        key << inputs[i] << '=' << scheme_for(schemes, inputs[i]).token();
    }
    return key.str();
}

double replay_reward(const std::vector<MixtureEntry>& mixture,
                     const std::map<std::string, PartitionScheme>& chosen,
                     const std::map<std::string, SimDataset>& datasets) {
    if (mixture.empty()) throw empty_window_error();
    const std::map<std::string, PartitionScheme> baseline;  // all round-robin

    auto lookup = [](const WorkloadSpec& w, const std::map<std::string, PartitionScheme>& s) {
        std::string key = latency_table_key(w, s);
        auto it = w.latency_table.find(key);
        if (it == w.latency_table.end()) throw missing_table_entry_error(key);
        return it->second;
    };

    double bytes = 0.0, lat_chosen = 0.0, lat_base = 0.0;
    for (const MixtureEntry& entry : mixture) {
        const WorkloadSpec& w = *entry.spec;
        double input_bytes = 0.0;
        for (const std::string& input : w.inputs) input_bytes += datasets.at(input).total_bytes();
        bytes += entry.frequency * input_bytes;
        lat_chosen += entry.frequency * lookup(w, chosen);
        lat_base += entry.frequency * lookup(w, baseline);
    }
    return (bytes / lat_chosen) / (bytes / lat_base);
}

namespace {

nlohmann::ordered_json scheme_to_json(const PartitionScheme& s) {
    nlohmann::ordered_json j;
    switch (s.variant) {
        case PartitionScheme::Variant::Hash:
            j["variant"] = "hash";
            j["signature"] = s.signature;
            break;
        case PartitionScheme::Variant::Range:
            j["variant"] = "range";
            j["signature"] = s.signature;
            break;
        case PartitionScheme::Variant::RoundRobin:
            j["variant"] = "roundrobin";
            break;
        case PartitionScheme::Variant::Random:
            j["variant"] = "random";
            j["seed"] = s.seed;
            break;
    }
    return j;
}

PartitionScheme scheme_from_json(const nlohmann::json& j) {
    std::string variant = j.at("variant").get<std::string>();
    if (variant == "hash") return PartitionScheme::hash(j.at("signature").get<std::string>());
    if (variant == "range") return PartitionScheme::range(j.at("signature").get<std::string>());
    if (variant == "roundrobin") return PartitionScheme::round_robin();
    if (variant == "random") return PartitionScheme::random(j.value("seed", 0ULL));
    throw format_error("unknown partition scheme variant '" + variant + "'");
}

CandidateFeatures features_from_json(const nlohmann::json& j) {
    CandidateFeatures f;
    f.frequency = j.value("frequency", 0.0);
    f.distance = j.value("distance", 0.0);
    f.recency = j.value("recency", 0.0);
    f.complexity = j.value("complexity", 0.0);
    f.selectivity = j.value("selectivity", 1.0);
    f.key_distribution = j.value("key_distribution", 0.0);
    f.num_copartitioned = j.value("num_copartitioned", 0.0);
    f.size_copartitioned = j.value("size_copartitioned", 0.0);
    return f;
}

nlohmann::ordered_json features_to_json(const CandidateFeatures& f) {
    return {{"frequency", f.frequency},
            {"distance", f.distance},
            {"recency", f.recency},
            {"complexity", f.complexity},
            {"selectivity", f.selectivity},
            {"key_distribution", f.key_distribution},
            {"num_copartitioned", f.num_copartitioned},
            {"size_copartitioned", f.size_copartitioned}};
}

}  // namespace

EnvironmentSpec env_spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("bad environment spec JSON: ") + e.what());
    }
    EnvironmentSpec spec;
    const auto& jc = j.at("cluster");
    spec.cluster.m = jc.at("m").get<int>();
    spec.cluster.cores = jc.value("cores", 1);
    spec.cluster.memory = jc.value("memory", 0.0);
    spec.cluster.disk = jc.value("disk", 0.0);
    spec.cluster.bandwidth = jc.value("bandwidth", 1.0);
    spec.cluster.base_cpu_rate = jc.value("base_cpu_rate", 1.0);
    if (spec.cluster.m < 1 || spec.cluster.bandwidth <= 0.0 || spec.cluster.base_cpu_rate <= 0.0) {
        throw format_error("cluster parameters must be positive");
    }
    for (const auto& jd : j.value("datasets", nlohmann::json::array())) {
        SimDataset d;
        d.id = jd.at("id").get<std::string>();
        d.n = jd.at("n").get<std::int64_t>();
        d.object_bytes = jd.at("object_bytes").get<double>();
        if (jd.contains("key_model")) {
            const auto& jk = jd.at("key_model");
            d.key_model.distinct = jk.value("distinct", 1LL);
            d.key_model.zipf = jk.value("zipf", 0.0);
            for (const auto& k : jk.value("explicit_keys", nlohmann::json::array())) {
                d.key_model.explicit_keys.push_back(k.get<std::int64_t>());
            }
        }
        if (jd.contains("applied")) d.applied = scheme_from_json(jd.at("applied"));
        spec.datasets.push_back(std::move(d));
    }
    for (const auto& jw : j.value("workloads", nlohmann::json::array())) {
        WorkloadSpec w;
        w.query_id = jw.at("query_id").get<std::string>();
        w.ir_id = jw.value("ir_id", "");
        for (const auto& in : jw.at("inputs")) w.inputs.push_back(in.get<std::string>());
        const nlohmann::json jdesired = jw.value("desired", nlohmann::json::object());
        for (const auto& [dataset, jdes] : jdesired.items()) {
            DesiredPartitioning des;
            des.signature = jdes.at("signature").get<std::string>();
            auto strategy = strategy_from_name(jdes.value("strategy", "hash"));
            if (!strategy) throw format_error("unknown strategy in desired partitioning");
            des.strategy = *strategy;
            w.desired[dataset] = std::move(des);
        }
        const nlohmann::json jtable = jw.value("latency_table", nlohmann::json::object());
        for (const auto& [key, sec] : jtable.items()) {
            w.latency_table[key] = sec.get<double>();
        }
        w.frequency = jw.value("frequency", 1.0);
        const nlohmann::json jfeatures = jw.value("candidate_features", nlohmann::json::object());
        for (const auto& [sig, jf] : jfeatures.items()) {
            w.candidate_features[sig] = features_from_json(jf);
        }
        spec.workloads.push_back(std::move(w));
    }
    return spec;
}

EnvironmentSpec env_spec_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open environment spec '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return env_spec_from_json(buf.str());
}

std::string env_spec_to_json(const EnvironmentSpec& spec) {
    nlohmann::ordered_json j;
    j["cluster"] = {{"m", spec.cluster.m},
                    {"cores", spec.cluster.cores},
                    {"memory", spec.cluster.memory},
                    {"disk", spec.cluster.disk},
                    {"bandwidth", spec.cluster.bandwidth},
                    {"base_cpu_rate", spec.cluster.base_cpu_rate}};
    j["datasets"] = nlohmann::ordered_json::array();
    for (const SimDataset& d : spec.datasets) {
        nlohmann::ordered_json jd;
        jd["id"] = d.id;
        jd["n"] = d.n;
        jd["object_bytes"] = d.object_bytes;
        jd["key_model"] = {{"distinct", d.key_model.distinct}, {"zipf", d.key_model.zipf}};
        if (!d.key_model.explicit_keys.empty()) {
            jd["key_model"]["explicit_keys"] = d.key_model.explicit_keys;
        }
        jd["applied"] = scheme_to_json(d.applied);
        j["datasets"].push_back(std::move(jd));
    }
    j["workloads"] = nlohmann::ordered_json::array();
    for (const WorkloadSpec& w : spec.workloads) {
        nlohmann::ordered_json jw;
        jw["query_id"] = w.query_id;
        jw["ir_id"] = w.ir_id;
        jw["inputs"] = w.inputs;
        jw["desired"] = nlohmann::ordered_json::object();
        for (const auto& [dataset, des] : w.desired) {
            jw["desired"][dataset] = {{"signature", des.signature},
                                      {"strategy", strategy_name(des.strategy)}};
        }
        jw["latency_table"] = nlohmann::ordered_json::object();
        for (const auto& [key, sec] : w.latency_table) jw["latency_table"][key] = sec;
        jw["frequency"] = w.frequency;
        jw["candidate_features"] = nlohmann::ordered_json::object();
        for (const auto& [sig, f] : w.candidate_features) {
            jw["candidate_features"][sig] = features_to_json(f);
        }
        j["workloads"].push_back(std::move(jw));
    }
    return j.dump(2);
}

struct SimEnv::Decision {
    std::vector<MixtureEntry> mixture;
    std::string target;
    StateVector state;
};

SimEnv::SimEnv(EnvironmentSpec spec, int k) : spec_(std::move(spec)), k_(k) {
    for (const SimDataset& d : spec_.datasets) datasets_[d.id] = d;
    for (const WorkloadSpec& w : spec_.workloads) {
        for (const auto& [_, f] : w.candidate_features) window_.observe(f);
    }
    for (const SimDataset& d : spec_.datasets) {
        window_.observe_env({d.total_bytes(), static_cast<double>(spec_.cluster.m),
                             static_cast<double>(spec_.cluster.cores), spec_.cluster.memory,
                             spec_.cluster.disk});
    }
}

int SimEnv::state_dim() const { return k_ * kCandidateFeatureCount + kEnvFeatureCount; }
int SimEnv::action_count() const { return k_ + 1; }

Environment::Sample SimEnv::sample(std::mt19937_64& rng) const {
    auto decision = std::make_shared<Decision>();
    decision->mixture = sample_workload(spec_.workloads, rng);

    std::set<std::string> targets;
    for (const MixtureEntry& entry : decision->mixture) {
        for (const auto& [dataset, _] : entry.spec->desired) targets.insert(dataset);
    }
    std::vector<ScoredCandidate> slate;
    EnvFeatures env{0.0, static_cast<double>(spec_.cluster.m),
                    static_cast<double>(spec_.cluster.cores), spec_.cluster.memory,
                    spec_.cluster.disk};
    if (!targets.empty()) {
        std::vector<std::string> ordered(targets.begin(), targets.end());
        std::uniform_int_distribution<std::size_t> pick(0, ordered.size() - 1);
        decision->target = ordered[pick(rng)];
        env.dataset_bytes = datasets_.at(decision->target).total_bytes();

        // group per-query stats by (signature, strategy) and combine
        std::map<std::pair<std::string, Strategy>, std::vector<CandidateFeatures>> per_candidate;
        for (const MixtureEntry& entry : decision->mixture) {
            auto it = entry.spec->desired.find(decision->target);
            if (it == entry.spec->desired.end()) continue;
            CandidateFeatures f;
            auto fit = entry.spec->candidate_features.find(it->second.signature);
            if (fit != entry.spec->candidate_features.end()) f = fit->second;
            f.frequency = entry.spec->frequency * entry.frequency;
            per_candidate[{it->second.signature, it->second.strategy}].push_back(f);
        }
        for (const auto& [key, stats] : per_candidate) {
            CandidateFeatures combined = combine_shared(stats);
            double copart = 0.0, copart_bytes = 0.0;
            for (const SimDataset& d : spec_.datasets) {
                if (d.id == decision->target) continue;
                if ((d.applied.variant == PartitionScheme::Variant::Hash ||
                     d.applied.variant == PartitionScheme::Variant::Range) &&
                    d.applied.signature == key.first) {
                    copart += 1.0;
                    copart_bytes += d.total_bytes();
                }
            }
            combined.num_copartitioned = copart;
            combined.size_copartitioned = copart_bytes;
            slate.push_back({key.first, key.second, combined});
        }
    }
    decision->state = build_state(std::move(slate), env, k_, window_);

    Sample s;
    s.state = decision->state.values;
    s.ctx = decision;
    return s;
}

PartitionScheme SimEnv::decode(const Sample& sample, int action) const {
    const auto& decision = *static_cast<const Decision*>(sample.ctx.get());
    if (action >= 0 && action < static_cast<int>(decision.state.slot_signatures.size())) {
        const std::string& sig = decision.state.slot_signatures[static_cast<std::size_t>(action)];
        return decision.state.slot_strategies[static_cast<std::size_t>(action)] == Strategy::Hash
                   ? PartitionScheme::hash(sig)
                   : PartitionScheme::range(sig);
    }
    return PartitionScheme::round_robin();
}

std::string SimEnv::target_dataset(const Sample& sample) const {
    return static_cast<const Decision*>(sample.ctx.get())->target;
}

double SimEnv::reward(const Sample& sample, int action) const {
    const auto& decision = *static_cast<const Decision*>(sample.ctx.get());
    std::map<std::string, PartitionScheme> chosen;
    if (!decision.target.empty()) chosen[decision.target] = decode(sample, action);
    return replay_reward(decision.mixture, chosen, datasets_);
}

}  // namespace lachesis
