#include "lachesis/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

namespace lachesis {

namespace {

Eigen::VectorXd leaky(const Eigen::VectorXd& z, double slope) {
    return z.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

Eigen::VectorXd leaky_grad(const Eigen::VectorXd& z, double slope) {
    return z.unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
    Eigen::VectorXd exps = shifted.array().exp();
    return exps / exps.sum();
}

double entropy(const Eigen::VectorXd& probs) {
    double h = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) h -= probs[i] * std::log(probs[i]);
    }
    return h;
}

Eigen::VectorXd to_vector(std::span<const double> state) {
    return Eigen::Map<const Eigen::VectorXd>(state.data(), static_cast<Eigen::Index>(state.size()));
}

constexpr char kMagic[4] = {'L', 'C', 'H', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& m) {
    std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
    std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
    out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            double v = m(r, c);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
    }
}

Eigen::MatrixXd read_matrix(std::ifstream& in) {
    std::uint32_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof(rows));
    in.read(reinterpret_cast<char*>(&cols), sizeof(cols));
    if (!in) throw checkpoint_error("truncated checkpoint");
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < cols; ++c) {
            double v = 0.0;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw checkpoint_error("truncated checkpoint");
            m(r, c) = v;
        }
    }
    return m;
}

void write_mlp(std::ofstream& out, const Mlp& mlp) {
    write_matrix(out, mlp.w1);
    write_matrix(out, mlp.b1);
    write_matrix(out, mlp.w2);
    write_matrix(out, mlp.b2);
    write_matrix(out, mlp.w3);
    write_matrix(out, mlp.b3);
}

Mlp read_mlp(std::ifstream& in) {
    Mlp mlp;
    mlp.w1 = read_matrix(in);
    mlp.b1 = read_matrix(in);
    mlp.w2 = read_matrix(in);
    mlp.b2 = read_matrix(in);
    mlp.w3 = read_matrix(in);
    mlp.b3 = read_matrix(in);
    return mlp;
}

}  // namespace

Mlp Mlp::init(int in, int h1, int h2, int out, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    auto fill = [&rng, &dist](Eigen::MatrixXd& m) {
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
        }
    };
    Mlp mlp;
    mlp.w1.resize(h1, in);
    mlp.w2.resize(h2, h1);
    mlp.w3.resize(out, h2);
    mlp.b1 = Eigen::VectorXd::Zero(h1);
    mlp.b2 = Eigen::VectorXd::Zero(h2);
    mlp.b3 = Eigen::VectorXd::Zero(out);
    fill(mlp.w1);
    fill(mlp.w2);
    fill(mlp.w3);
    return mlp;
}

Mlp Mlp::zeros_like(const Mlp& shape) {
    Mlp mlp;
    mlp.w1 = Eigen::MatrixXd::Zero(shape.w1.rows(), shape.w1.cols());
    mlp.w2 = Eigen::MatrixXd::Zero(shape.w2.rows(), shape.w2.cols());
    mlp.w3 = Eigen::MatrixXd::Zero(shape.w3.rows(), shape.w3.cols());
    mlp.b1 = Eigen::VectorXd::Zero(shape.b1.size());
    mlp.b2 = Eigen::VectorXd::Zero(shape.b2.size());
    mlp.b3 = Eigen::VectorXd::Zero(shape.b3.size());
    return mlp;
}

Mlp::Trace Mlp::forward(const Eigen::VectorXd& x, double slope) const {
    if (x.size() != w1.cols()) {
        throw dimension_mismatch_error("state length " + std::to_string(x.size()) +
                                       " does not match model input " + std::to_string(w1.cols()));
    }
    Trace t;
    t.x = x;
    t.z1 = w1 * x + b1;
    t.h1 = leaky(t.z1, slope);
    t.z2 = w2 * t.h1 + b2;
    t.h2 = leaky(t.z2, slope);
    t.out = w3 * t.h2 + b3;
    return t;
}

void Mlp::backward(const Trace& t, const Eigen::VectorXd& dout, double slope, Mlp& grads) const {
    grads.w3 += dout * t.h2.transpose();
    grads.b3 += dout;
    Eigen::VectorXd dh2 = w3.transpose() * dout;
    Eigen::VectorXd dz2 = dh2.cwiseProduct(leaky_grad(t.z2, slope));
    grads.w2 += dz2 * t.h1.transpose();
    grads.b2 += dz2;
    Eigen::VectorXd dh1 = w2.transpose() * dz2;
    Eigen::VectorXd dz1 = dh1.cwiseProduct(leaky_grad(t.z1, slope));
    grads.w1 += dz1 * t.x.transpose();
    grads.b1 += dz1;
}

bool Mlp::finite() const {
    return w1.allFinite() && w2.allFinite() && w3.allFinite() && b1.allFinite() &&
           b2.allFinite() && b3.allFinite();
}

void Mlp::axpy(double scale, const Mlp& other) {
    w1 += scale * other.w1;
    w2 += scale * other.w2;
    w3 += scale * other.w3;
    b1 += scale * other.b1;
    b2 += scale * other.b2;
    b3 += scale * other.b3;
}

PolicyModel PolicyModel::init(int input_dim, int action_count, std::uint64_t seed,
                              Hyperparameters hp, int hidden1, int hidden2) {
    std::mt19937_64 rng(seed);
    PolicyModel model;
    model.input_dim = input_dim;
    model.action_count = action_count;
    model.hp = hp;
    model.actor = Mlp::init(input_dim, hidden1, hidden2, action_count, rng);
    model.critic = Mlp::init(input_dim, hidden1, hidden2, 1, rng);
    return model;
}

Eigen::VectorXd PolicyModel::policy(std::span<const double> state) const {
    return softmax(actor.forward(to_vector(state), hp.leaky_slope).out);
}

double PolicyModel::value(std::span<const double> state) const {
    return critic.forward(to_vector(state), hp.leaky_slope).out[0];
}

ActResult act(const PolicyModel& model, std::span<const double> state, std::mt19937_64& rng) {
    Eigen::VectorXd probs = model.policy(state);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    double u = dist(rng);
    double acc = 0.0;
    int action = static_cast<int>(probs.size()) - 1;
    for (int i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            action = i;
            break;
        }
    }
    return {action, std::move(probs)};
}

double reward_ratio(std::span<const ThroughputItem> window,
                    std::span<const ThroughputItem> baseline) {
    if (window.empty() || baseline.empty()) throw empty_window_error();
    auto throughput = [](std::span<const ThroughputItem> items) {
        double bytes = 0.0, latency = 0.0;
        for (const ThroughputItem& it : items) {
            if (it.latency <= 0.0) throw domain_error("latency must be positive");
            bytes += it.bytes;
            latency += it.latency;
        }
        return bytes / latency;
    };
    return throughput(window) / throughput(baseline);
}

FixedTargets compute_targets(const PolicyModel& model, std::span<const Transition> batch) {
    FixedTargets t;
    t.advantages.reserve(batch.size());
    t.critic_targets.reserve(batch.size());
    for (const Transition& tr : batch) {
        double v = model.value(tr.state);
        double v_next = model.value(tr.next_state);
        double target = tr.reward + model.hp.gamma * v_next;
        t.critic_targets.push_back(target);
        t.advantages.push_back(target - v);
    }
    return t;
}

double batch_loss(const PolicyModel& model, std::span<const Transition> batch,
                  const FixedTargets& targets) {
    double loss = 0.0;
    double n = static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& tr = batch[i];
        Eigen::VectorXd probs = model.policy(tr.state);
        double v = model.value(tr.state);
        double td = targets.critic_targets[i] - v;
        loss += -std::log(std::max(probs[tr.action], 1e-300)) * targets.advantages[i];
        loss += -model.hp.beta * entropy(probs);
        loss += td * td;
    }
    return loss / n;
}

Gradients batch_gradients(const PolicyModel& model, std::span<const Transition> batch,
                          const FixedTargets& targets, UpdateDiagnostics* diag) {
    Gradients g{Mlp::zeros_like(model.actor), Mlp::zeros_like(model.critic)};
    double n = static_cast<double>(batch.size());
    double total_loss = 0.0, total_entropy = 0.0, total_adv = 0.0;

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Transition& tr = batch[i];
        Eigen::VectorXd x = to_vector(tr.state);

        Mlp::Trace at = model.actor.forward(x, model.hp.leaky_slope);
        Eigen::VectorXd probs = softmax(at.out);
        double h = entropy(probs);
        double adv = targets.advantages[i];

        // d/dlogits of [-logpi(a)*A - beta*H]
        Eigen::VectorXd dlogits = probs * adv;
        dlogits[tr.action] -= adv;
        Eigen::VectorXd logp = probs.array().max(1e-300).log().matrix();
        dlogits += model.hp.beta * probs.cwiseProduct((logp.array() + h).matrix());
        dlogits /= n;
        model.actor.backward(at, dlogits, model.hp.leaky_slope, g.actor);

        Mlp::Trace ct = model.critic.forward(x, model.hp.leaky_slope);
        double td = targets.critic_targets[i] - ct.out[0];
        Eigen::VectorXd dvalue(1);
        dvalue[0] = -2.0 * td / n;
        model.critic.backward(ct, dvalue, model.hp.leaky_slope, g.critic);

        total_loss += (-std::log(std::max(probs[tr.action], 1e-300)) * adv -
                       model.hp.beta * h + td * td);
        total_entropy += h;
        total_adv += adv;
    }
    if (diag) {
        diag->loss = total_loss / n;
        diag->entropy = total_entropy / n;
        diag->mean_advantage = total_adv / n;
    }
    return g;
}

UpdateDiagnostics update(PolicyModel& model, std::span<const Transition> batch) {
    if (batch.empty()) throw domain_error("update requires a non-empty batch");
    FixedTargets targets = compute_targets(model, batch);
    UpdateDiagnostics diag;
    Gradients g = batch_gradients(model, batch, targets, &diag);
    if (!g.actor.finite() || !g.critic.finite()) throw non_finite_gradient_error();
    model.actor.axpy(-model.hp.alpha, g.actor);
    model.critic.axpy(-model.hp.alpha, g.critic);
    if (!model.actor.finite() || !model.critic.finite()) throw non_finite_gradient_error();
    return diag;
}

void save_model(const PolicyModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw checkpoint_error("cannot open '" + path + "' for write");
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kFormatVersion), sizeof(kFormatVersion));
    std::uint32_t input = static_cast<std::uint32_t>(model.input_dim);
    std::uint32_t actions = static_cast<std::uint32_t>(model.action_count);
    out.write(reinterpret_cast<const char*>(&input), sizeof(input));
    out.write(reinterpret_cast<const char*>(&actions), sizeof(actions));
    out.write(reinterpret_cast<const char*>(&model.hp.alpha), sizeof(double));
    out.write(reinterpret_cast<const char*>(&model.hp.beta), sizeof(double));
    out.write(reinterpret_cast<const char*>(&model.hp.gamma), sizeof(double));
    out.write(reinterpret_cast<const char*>(&model.hp.leaky_slope), sizeof(double));
    write_mlp(out, model.actor);
    write_mlp(out, model.critic);
    if (!out) throw checkpoint_error("write failed for '" + path + "'");
}

PolicyModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw checkpoint_error("cannot open '" + path + "'");
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw checkpoint_error("bad checkpoint magic");
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in) throw checkpoint_error("truncated checkpoint");
    if (version > kFormatVersion) {
        throw checkpoint_error("checkpoint format version " + std::to_string(version) +
                               " is newer than supported " + std::to_string(kFormatVersion));
    }
    PolicyModel model;
    std::uint32_t input = 0, actions = 0;
    in.read(reinterpret_cast<char*>(&input), sizeof(input));
    in.read(reinterpret_cast<char*>(&actions), sizeof(actions));
    in.read(reinterpret_cast<char*>(&model.hp.alpha), sizeof(double));
    in.read(reinterpret_cast<char*>(&model.hp.beta), sizeof(double));
    in.read(reinterpret_cast<char*>(&model.hp.gamma), sizeof(double));
    in.read(reinterpret_cast<char*>(&model.hp.leaky_slope), sizeof(double));
    if (!in) throw checkpoint_error("truncated checkpoint");
    model.input_dim = static_cast<int>(input);
    model.action_count = static_cast<int>(actions);
    model.actor = read_mlp(in);
    model.critic = read_mlp(in);
    return model;
}

std::vector<double> train(PolicyModel& model, const Environment& env, const TrainOptions& opts) {
    if (model.input_dim != env.state_dim() || model.action_count != env.action_count()) {
        throw dimension_mismatch_error("model dimensions do not match environment");
    }
    std::vector<double> curve(static_cast<std::size_t>(std::max(opts.epochs, 0)), 0.0);
    if (opts.epochs <= 0) return curve;

    std::mutex model_mutex;
    std::vector<double> epoch_reward(curve.size(), 0.0);
    std::vector<long> epoch_count(curve.size(), 0);
    std::mutex curve_mutex;

    auto agent_loop = [&](int agent_id) {
        std::mt19937_64 rng(opts.seed * 0x9e3779b97f4a7c15ULL + 0x100000001b3ULL *
                            static_cast<std::uint64_t>(agent_id + 1));
        std::vector<Transition> batch;
        batch.reserve(static_cast<std::size_t>(opts.batch_size));
        Environment::Sample current = env.sample(rng);
        for (int epoch = 0; epoch < opts.epochs; ++epoch) {
            double reward_sum = 0.0;
            for (int iter = 0; iter < opts.iterations_per_epoch; ++iter) {
                ActResult chosen;
                {
                    std::lock_guard lock(model_mutex);
                    chosen = act(model, current.state, rng);
                }
                double r = env.reward(current, chosen.action);
                reward_sum += r;
                Environment::Sample next = env.sample(rng);
                batch.push_back({current.state, chosen.action, r, next.state});
                current = std::move(next);
                if (static_cast<int>(batch.size()) >= opts.batch_size) {
                    std::lock_guard lock(model_mutex);
                    update(model, batch);
                    batch.clear();
                }
            }
            std::lock_guard lock(curve_mutex);
            epoch_reward[epoch] += reward_sum;
            epoch_count[epoch] += opts.iterations_per_epoch;
        }
    };

    if (opts.agents <= 1) {
        agent_loop(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(opts.agents));
        for (int a = 0; a < opts.agents; ++a) threads.emplace_back(agent_loop, a);
        for (std::thread& t : threads) t.join();
    }
    for (std::size_t e = 0; e < curve.size(); ++e) {
        curve[e] = epoch_count[e] > 0 ? epoch_reward[e] / epoch_count[e] : 0.0;
    }
    return curve;
}

}  // namespace lachesis
