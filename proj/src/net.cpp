#include "icq/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "icq/rng.hpp"

namespace icq {

using nlohmann::json;

namespace {

void apply_activation(Activation act, std::vector<double>& v) {
    switch (act) {
        case Activation::identity:
            break;
        case Activation::relu:
            for (double& x : v) x = std::max(0.0, x);
            break;
        case Activation::softmax: {
            double m = *std::max_element(v.begin(), v.end());
            double sum = 0.0;
            for (double& x : v) {
                x = std::exp(x - m);
                sum += x;
            }
            for (double& x : v) x /= sum;
            break;
        }
    }
}

}  // namespace

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

std::vector<double> DenseNet::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw std::invalid_argument("DenseNet::forward: input dimension mismatch");
    std::vector<double> cur(x.begin(), x.end());
    for (const auto& l : layers) {
        std::vector<double> next(l.out, 0.0);
        for (int o = 0; o < l.out; ++o) {
            double s = l.b[o];
            const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) s += wr[i] * cur[i];
            next[o] = s;
        }
        apply_activation(l.act, next);
        cur = std::move(next);
    }
    return cur;
}

DenseNet make_net(const std::vector<int>& dims, const std::vector<Activation>& acts,
                  std::uint64_t seed, double output_scale) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
        throw std::invalid_argument("make_net: need one activation per layer");
    DenseNet net;
    SplitMix64 rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.in = dims[l];
        layer.out = dims[l + 1];
        layer.act = acts[l];
        layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
        layer.b.assign(layer.out, 0.0);
        double scale = std::sqrt(2.0 / layer.in);
        bool is_output = l + 2 == dims.size();
        if (is_output) scale *= output_scale;
        for (double& w : layer.w) w = rng.uniform(-scale, scale);
        // small positive bias keeps relu units alive at the start
        if (!is_output)
            for (double& b : layer.b) b = rng.uniform(0.01, 0.1);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

std::vector<double> forward_cached(const DenseNet& net, std::span<const double> x,
                                   ForwardTrace& trace) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw std::invalid_argument("forward_cached: input dimension mismatch");
    trace.input.assign(x.begin(), x.end());
    trace.pre.clear();
    trace.post.clear();
    std::vector<double> cur(x.begin(), x.end());
    for (const auto& l : net.layers) {
        std::vector<double> z(l.out, 0.0);
        for (int o = 0; o < l.out; ++o) {
            double s = l.b[o];
            const double* wr = &l.w[static_cast<std::size_t>(o) * l.in];
            for (int i = 0; i < l.in; ++i) s += wr[i] * cur[i];
            z[o] = s;
        }
        trace.pre.push_back(z);
        apply_activation(l.act, z);
        trace.post.push_back(z);
        cur = std::move(z);
    }
    trace.valid = true;
    return cur;
}

NetGradients NetGradients::zeros_like(const DenseNet& net) {
    NetGradients g;
    for (const auto& l : net.layers) {
        g.w.emplace_back(l.w.size(), 0.0);
        g.b.emplace_back(l.b.size(), 0.0);
    }
    return g;
}

void NetGradients::zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

double NetGradients::squared_norm() const {
    double s = 0.0;
    for (const auto& v : w)
        for (double x : v) s += x * x;
    for (const auto& v : b)
        for (double x : v) s += x * x;
    return s;
}

void NetGradients::scale(double f) {
    for (auto& v : w)
        for (double& x : v) x *= f;
    for (auto& v : b)
        for (double& x : v) x *= f;
}

std::vector<double> backward(const DenseNet& net, const ForwardTrace& trace,
                             std::span<const double> out_grad, NetGradients& grads) {
    if (!trace.valid) throw std::runtime_error("backward: missing forward cache");
    if (static_cast<int>(out_grad.size()) != net.output_dim())
        throw std::invalid_argument("backward: output gradient dimension mismatch");
    std::vector<double> g(out_grad.begin(), out_grad.end());
    for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
        const Layer& layer = net.layers[l];
        // gradient through the activation
        switch (layer.act) {
            case Activation::identity:
                break;
            case Activation::relu:
                for (int o = 0; o < layer.out; ++o)
                    if (trace.pre[l][o] <= 0.0) g[o] = 0.0;
                break;
            case Activation::softmax: {
                const auto& y = trace.post[l];
                double dot = 0.0;
                for (int o = 0; o < layer.out; ++o) dot += g[o] * y[o];
                for (int o = 0; o < layer.out; ++o) g[o] = y[o] * (g[o] - dot);
                break;
            }
        }
        const std::vector<double>& in =
            (l == 0) ? trace.input : trace.post[static_cast<std::size_t>(l) - 1];
        std::vector<double> gin(layer.in, 0.0);
        for (int o = 0; o < layer.out; ++o) {
            double go = g[o];
            grads.b[l][o] += go;
            double* gw = &grads.w[l][static_cast<std::size_t>(o) * layer.in];
            const double* wr = &layer.w[static_cast<std::size_t>(o) * layer.in];
            for (int i = 0; i < layer.in; ++i) {
                gw[i] += go * in[i];
                gin[i] += go * wr[i];
            }
        }
        g = std::move(gin);
    }
    return g;
}

AdamState AdamState::init(const DenseNet& net, double lr) {
    AdamState st;
    st.lr = lr;
    for (const auto& l : net.layers) {
        st.mw.emplace_back(l.w.size(), 0.0);
        st.vw.emplace_back(l.w.size(), 0.0);
        st.mb.emplace_back(l.b.size(), 0.0);
        st.vb.emplace_back(l.b.size(), 0.0);
    }
    return st;
}

void adam_step(AdamState& state, DenseNet& net, const NetGradients& grads) {
    if (grads.w.size() != net.layers.size())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    state.step += 1;
    double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                      std::vector<double>& v) {
        if (p.size() != g.size()) throw std::invalid_argument("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!std::isfinite(g[i])) throw std::runtime_error("adam_step: non-finite gradient");
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        update(net.layers[l].w, grads.w[l], state.mw[l], state.vw[l]);
        update(net.layers[l].b, grads.b[l], state.mb[l], state.vb[l]);
    }
}

void clip_global_norm(std::span<NetGradients*> grads, double max_norm) {
    double sq = 0.0;
    for (NetGradients* g : grads) sq += g->squared_norm();
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double f = max_norm / norm;
        for (NetGradients* g : grads) g->scale(f);
    }
}

Mixer make_mixer(int state_dim, int num_agents, int hidden, std::uint64_t seed) {
    Mixer mix;
    mix.num_agents = num_agents;
    mix.hyper_w = make_net({state_dim, hidden, num_agents},
                           {Activation::relu, Activation::identity}, derive_seed(seed, 1), 0.0);
    mix.hyper_b = make_net({state_dim, hidden, 1}, {Activation::relu, Activation::identity},
                           derive_seed(seed, 2), 0.0);
    return mix;
}

double mixer_combine(const Mixer& mix, std::span<const double> global_state,
                     std::span<const double> per_agent_q, MixerEval* eval) {
    if (static_cast<int>(per_agent_q.size()) != mix.num_agents)
        throw std::invalid_argument("mixer_combine: per-agent value count mismatch");
    MixerEval local;
    MixerEval& ev = eval ? *eval : local;
    ev.raw_w = forward_cached(mix.hyper_w, global_state, ev.trace_w);
    ev.bias = forward_cached(mix.hyper_b, global_state, ev.trace_b)[0];
    ev.w.resize(mix.num_agents);
    double out = ev.bias;
    for (int i = 0; i < mix.num_agents; ++i) {
        ev.w[i] = std::abs(ev.raw_w[i]);
        out += ev.w[i] * per_agent_q[i];
    }
    return out;
}

std::vector<double> mixer_backward(const Mixer& mix, const MixerEval& eval,
                                   std::span<const double> per_agent_q, double out_grad,
                                   NetGradients& grads_w, NetGradients& grads_b) {
    std::vector<double> gq(mix.num_agents, 0.0);
    std::vector<double> graw(mix.num_agents, 0.0);
    for (int i = 0; i < mix.num_agents; ++i) {
        gq[i] = out_grad * eval.w[i];
        double sign = eval.raw_w[i] > 0.0 ? 1.0 : (eval.raw_w[i] < 0.0 ? -1.0 : 0.0);
        graw[i] = out_grad * sign * per_agent_q[i];
    }
    backward(mix.hyper_w, eval.trace_w, graw, grads_w);
    std::vector<double> gb{out_grad};
    backward(mix.hyper_b, eval.trace_b, gb, grads_b);
    return gq;
}

std::string net_to_json(const DenseNet& net) {
    json layers = json::array();
    for (const auto& l : net.layers) {
        const char* act = l.act == Activation::identity ? "identity"
                          : l.act == Activation::relu   ? "relu"
                                                        : "softmax";
        layers.push_back({{"in", l.in}, {"out", l.out}, {"act", act}, {"w", l.w}, {"b", l.b}});
    }
    return json{{"layers", layers}}.dump();
}

DenseNet net_from_json(const std::string& text) {
    json obj = json::parse(text);
    DenseNet net;
    for (const auto& jl : obj.at("layers")) {
        Layer l;
        l.in = jl.at("in").get<int>();
        l.out = jl.at("out").get<int>();
        std::string act = jl.at("act").get<std::string>();
        l.act = act == "identity" ? Activation::identity
                : act == "relu"   ? Activation::relu
                                  : Activation::softmax;
        l.w = jl.at("w").get<std::vector<double>>();
        l.b = jl.at("b").get<std::vector<double>>();
        if (l.w.size() != static_cast<std::size_t>(l.in) * l.out ||
            l.b.size() != static_cast<std::size_t>(l.out))
            throw std::runtime_error("net_from_json: layer shape mismatch");
        net.layers.push_back(std::move(l));
    }
    return net;
}

}  // namespace icq
