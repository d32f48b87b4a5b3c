#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace icq {

enum class Activation { identity, relu, softmax };

struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> w;  // [out][in] row-major
    std::vector<double> b;
    Activation act = Activation::identity;
};

// Minimal dense feed-forward network with hand-written reverse-mode
// gradients. Everything is value-semantic; a target network is a copy.
struct DenseNet {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    int output_dim() const { return layers.empty() ? 0 : layers.back().out; }
    std::size_t parameter_count() const;

    std::vector<double> forward(std::span<const double> x) const;
};

/// dims = {in, h1, ..., out}; acts has one entry per layer. Hidden layers get
/// uniform He-style init; output_scale scales the final layer (0 gives an
/// exactly-zero head).
DenseNet make_net(const std::vector<int>& dims, const std::vector<Activation>& acts,
                  std::uint64_t seed, double output_scale = 1.0);

struct ForwardTrace {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // per layer, before activation
    std::vector<std::vector<double>> post;  // per layer, after activation
    bool valid = false;
};

std::vector<double> forward_cached(const DenseNet& net, std::span<const double> x,
                                   ForwardTrace& trace);

struct NetGradients {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    static NetGradients zeros_like(const DenseNet& net);
    void zero();
    double squared_norm() const;
    void scale(double f);
};

/// Accumulates parameter gradients into grads and returns the input gradient.
/// Requires the trace of a previous forward_cached call.
std::vector<double> backward(const DenseNet& net, const ForwardTrace& trace,
                             std::span<const double> out_grad, NetGradients& grads);

struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;
    std::vector<std::vector<double>> mw, vw, mb, vb;

    static AdamState init(const DenseNet& net, double lr);
};

/// Bias-corrected Adam update in place. Throws on non-finite gradients.
void adam_step(AdamState& state, DenseNet& net, const NetGradients& grads);

/// Scales all gradient sets so their joint L2 norm is at most max_norm.
void clip_global_norm(std::span<NetGradients*> grads, double max_norm);

// Value-decomposition mixer: hypernetworks map the global state to n
// nonnegative weights (absolute value of the raw output) and a bias, and the
// joint value is sum_i w_i q_i + b.
struct Mixer {
    DenseNet hyper_w;
    DenseNet hyper_b;
    int num_agents = 0;
};

Mixer make_mixer(int state_dim, int num_agents, int hidden, std::uint64_t seed);

struct MixerEval {
    std::vector<double> w;      // nonnegative weights
    std::vector<double> raw_w;  // hypernet output before the absolute value
    double bias = 0.0;
    ForwardTrace trace_w, trace_b;
};

/// Joint value for one (state, per-agent values) pair; eval captures what
/// mixer_backward needs.
double mixer_combine(const Mixer& mix, std::span<const double> global_state,
                     std::span<const double> per_agent_q, MixerEval* eval = nullptr);

/// Backpropagates d(loss)/d(joint value); returns d(loss)/d(per-agent q) and
/// accumulates hypernet gradients.
std::vector<double> mixer_backward(const Mixer& mix, const MixerEval& eval,
                                   std::span<const double> per_agent_q, double out_grad,
                                   NetGradients& grads_w, NetGradients& grads_b);

std::string net_to_json(const DenseNet& net);
DenseNet net_from_json(const std::string& text);

}  // namespace icq
