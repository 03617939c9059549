#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lachesis/errors.hpp"

namespace lachesis {

struct Hyperparameters {
    double alpha = 1e-3;        // learning rate
    double beta = 0.01;         // entropy weight
    double gamma = 0.9;         // discount
    double leaky_slope = 0.01;
};

// Three fully connected layers; hidden activations are leaky relu.
struct Mlp {
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    static Mlp init(int in, int h1, int h2, int out, std::mt19937_64& rng);
    static Mlp zeros_like(const Mlp& shape);

    struct Trace {
        Eigen::VectorXd x, z1, h1, z2, h2, out;
    };
    Trace forward(const Eigen::VectorXd& x, double slope) const;
    // Accumulates parameter gradients for d(loss)/d(out) into grads.
    void backward(const Trace& t, const Eigen::VectorXd& dout, double slope, Mlp& grads) const;

    bool finite() const;
    void axpy(double scale, const Mlp& other);  // this += scale * other
};

struct PolicyModel {
    Mlp actor;    // input -> 128 -> 64 -> actions, softmax output
    Mlp critic;   // input -> 128 -> 64 -> 1, linear output
    Hyperparameters hp;
    int input_dim = 0;
    int action_count = 0;

    static PolicyModel init(int input_dim, int action_count, std::uint64_t seed,
                            Hyperparameters hp = {}, int hidden1 = 128, int hidden2 = 64);

    Eigen::VectorXd policy(std::span<const double> state) const;  // softmax probabilities
    double value(std::span<const double> state) const;
};

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;   // throughput speedup ratio, > 0
    std::vector<double> next_state;
};

struct ActResult {
    int action = 0;
    Eigen::VectorXd probs;
};

ActResult act(const PolicyModel& model, std::span<const double> state, std::mt19937_64& rng);

struct ThroughputItem {
    double bytes = 0.0;
    double latency = 0.0;
};

// (sum bytes / sum latency over window) / (same over baseline).
double reward_ratio(std::span<const ThroughputItem> window,
                    std::span<const ThroughputItem> baseline);

struct UpdateDiagnostics {
    double loss = 0.0;
    double entropy = 0.0;
    double mean_advantage = 0.0;
};

// Advantage = r + gamma*V(s') - V(s), frozen per batch; actor ascends the
// policy gradient with entropy bonus, critic descends squared advantage.
// Aborts (weights preserved) on non-finite gradients.
UpdateDiagnostics update(PolicyModel& model, std::span<const Transition> batch);

// Exposed for finite-difference gradient checking: the scalar objective
// and its analytic gradients, with advantages/targets held fixed.
struct FixedTargets {
    std::vector<double> advantages;
    std::vector<double> critic_targets;
};
FixedTargets compute_targets(const PolicyModel& model, std::span<const Transition> batch);
double batch_loss(const PolicyModel& model, std::span<const Transition> batch,
                  const FixedTargets& targets);
struct Gradients {
    Mlp actor, critic;
};
Gradients batch_gradients(const PolicyModel& model, std::span<const Transition> batch,
                          const FixedTargets& targets, UpdateDiagnostics* diag = nullptr);

void save_model(const PolicyModel& model, const std::string& path);
PolicyModel load_model(const std::string& path);

// One partitioning decision per sample; reward looked up per action.
class Environment {
public:
    struct Sample {
        std::vector<double> state;
        std::shared_ptr<const void> ctx;
    };
    virtual ~Environment() = default;
    virtual int state_dim() const = 0;
    virtual int action_count() const = 0;
    virtual Sample sample(std::mt19937_64& rng) const = 0;
    virtual double reward(const Sample& sample, int action) const = 0;
};

struct TrainOptions {
    int epochs = 1;
    int batch_size = 16;
    int agents = 1;
    int iterations_per_epoch = 96;
    std::uint64_t seed = 0;
};

// Returns the per-epoch mean reward curve. Transition collection may run
// on several agent threads; weight updates are serialized.
std::vector<double> train(PolicyModel& model, const Environment& env, const TrainOptions& opts);

}  // namespace lachesis
