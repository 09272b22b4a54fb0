#include "fewb/networks.hpp"

#include <cmath>

namespace fewb::nets {

namespace {

std::vector<real> glorot_uniform(std::size_t in, std::size_t out, Rng& rng) {
    const real limit = std::sqrt(real(6) / static_cast<real>(in + out));
    std::vector<real> w(in * out);
    for (auto& v : w) v = rng.uniform(-limit, limit);
    return w;
}

Tensor as_batch(const Tensor& x) {
    if (x.shape().size() == 1) return reshape(x, {1, x.shape()[0]});
    return x;
}

}  // namespace

DenseLayer::DenseLayer(std::string label_in, std::size_t in, std::size_t out,
                       Activation act_in, Rng& rng, bool zero_init)
    : act(act_in), label(std::move(label_in)) {
    std::vector<real> wv =
        zero_init ? std::vector<real>(in * out, real(0)) : glorot_uniform(in, out, rng);
    w = Parameter(label + ".w", Tensor::variable({in, out}, std::move(wv)));
    b = Parameter(label + ".b", Tensor::variable({out}, std::vector<real>(out, real(0))));
}

Tensor DenseLayer::forward(const Tensor& x, ActivationSink* sink) const {
    Tensor y = activation(affine(x, w.value, b.value), act);
    if (sink) sink->record(label, y);
    return y;
}

Mlp::Mlp(const std::string& name, std::size_t input_dim,
         const std::vector<std::size_t>& hidden, Activation act, Rng& rng)
    : input_dim_(input_dim) {
    if (hidden.empty()) throw ConfigError("mlp " + name + ": needs at least one layer");
    std::size_t in = input_dim;
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        layers_.emplace_back(name + "_" + std::to_string(i + 1), in, hidden[i], act, rng);
        in = hidden[i];
    }
}

Tensor Mlp::forward(const Tensor& x, ActivationSink* sink) const {
    Tensor h = as_batch(x);
    if (h.cols() != input_dim_)
        throw ShapeError("mlp: input has " + std::to_string(h.cols()) +
                         " features, expected " + std::to_string(input_dim_));
    for (const auto& layer : layers_) h = layer.forward(h, sink);
    return h;
}

std::size_t Mlp::output_dim() const { return layers_.back().out_dim(); }

void Mlp::collect_parameters(std::vector<Parameter*>& out) {
    for (auto& layer : layers_) {
        out.push_back(&layer.w);
        out.push_back(&layer.b);
    }
}

Encoder::Encoder(std::size_t obs_dim, const std::vector<std::size_t>& hidden,
                 std::size_t latent_dim, Activation act, Rng& rng)
    : trunk_("Encoder", obs_dim, hidden, act, rng),
      mean_head_("Encoder_mean", trunk_.output_dim(), latent_dim, Activation::Identity, rng),
      logvar_head_("Encoder_variance", trunk_.output_dim(), latent_dim,
                   Activation::Identity, rng) {}

dist::DiagGaussian Encoder::operator()(const Tensor& obs, ActivationSink* sink) const {
    Tensor h = trunk_.forward(obs, sink);
    Tensor mean = mean_head_.forward(h, sink);
    Tensor log_var = clamp(logvar_head_.forward(h, sink), -dist::kLogVarClamp,
                           dist::kLogVarClamp);
    return dist::DiagGaussian(std::move(mean), std::move(log_var));
}

void Encoder::collect_parameters(std::vector<Parameter*>& out) {
    trunk_.collect_parameters(out);
    out.push_back(&mean_head_.w);
    out.push_back(&mean_head_.b);
    out.push_back(&logvar_head_.w);
    out.push_back(&logvar_head_.b);
}

Decoder::Decoder(std::size_t latent_dim, const std::vector<std::size_t>& hidden,
                 std::size_t pixels, Activation act, Rng& rng)
    : trunk_("Decoder", latent_dim, hidden, act, rng),
      out_head_("Decoder_out", trunk_.output_dim(), pixels, Activation::Sigmoid, rng) {}

dist::BernoulliFactors Decoder::operator()(const Tensor& latent, ActivationSink* sink) const {
    return dist::BernoulliFactors{out_head_.forward(trunk_.forward(latent, sink), sink)};
}

void Decoder::collect_parameters(std::vector<Parameter*>& out) {
    trunk_.collect_parameters(out);
    out.push_back(&out_head_.w);
    out.push_back(&out_head_.b);
}

Transition::Transition(std::size_t latent_dim, std::size_t num_actions,
                       const std::vector<std::size_t>& hidden, Activation act, Rng& rng)
    : trunk_("Transition", latent_dim + num_actions, hidden, act, rng),
      mean_head_("Transition_mean", trunk_.output_dim(), latent_dim,
                 Activation::Identity, rng),
      logvar_head_("Transition_variance", trunk_.output_dim(), latent_dim,
                   Activation::Identity, rng) {}

dist::DiagGaussian Transition::operator()(const Tensor& latent, const Tensor& action_onehot,
                                          ActivationSink* sink) const {
    Tensor joint = concat_lastdim(as_batch(latent), as_batch(action_onehot));
    Tensor h = trunk_.forward(joint, sink);
    Tensor mean = mean_head_.forward(h, sink);
    Tensor log_var = clamp(logvar_head_.forward(h, sink), -dist::kLogVarClamp,
                           dist::kLogVarClamp);
    return dist::DiagGaussian(std::move(mean), std::move(log_var));
}

void Transition::collect_parameters(std::vector<Parameter*>& out) {
    trunk_.collect_parameters(out);
    out.push_back(&mean_head_.w);
    out.push_back(&mean_head_.b);
    out.push_back(&logvar_head_.w);
    out.push_back(&logvar_head_.b);
}

ValueNet::ValueNet(const std::string& name, std::size_t input_dim,
                   const std::vector<std::size_t>& hidden, std::size_t num_actions,
                   Activation act, Rng& rng)
    : trunk_(name, input_dim, hidden, act, rng),
      out_head_(name + "_out", trunk_.output_dim(), num_actions, Activation::Identity,
                rng) {}

Tensor ValueNet::operator()(const Tensor& x, ActivationSink* sink) const {
    ++forward_calls_;
    return out_head_.forward(trunk_.forward(x, sink), sink);
}

void ValueNet::collect_parameters(std::vector<Parameter*>& out) {
    trunk_.collect_parameters(out);
    out.push_back(&out_head_.w);
    out.push_back(&out_head_.b);
}

Policy::Policy(std::size_t latent_dim, const std::vector<std::size_t>& hidden,
               std::size_t num_actions, Activation act, Rng& rng)
    : trunk_("Policy", latent_dim, hidden, act, rng),
      out_head_("Policy_out", trunk_.output_dim(), num_actions,
                Activation::SoftmaxLastDim, rng) {}

dist::CategoricalDist Policy::operator()(const Tensor& latent, ActivationSink* sink) const {
    return dist::CategoricalDist{out_head_.forward(trunk_.forward(latent, sink), sink)};
}

void Policy::collect_parameters(std::vector<Parameter*>& out) {
    trunk_.collect_parameters(out);
    out.push_back(&out_head_.w);
    out.push_back(&out_head_.b);
}

AgentKind agent_kind_from_string(const std::string& name) {
    if (name == "vae") return AgentKind::Vae;
    if (name == "hmm") return AgentKind::Hmm;
    if (name == "chmm") return AgentKind::Chmm;
    if (name == "dai") return AgentKind::Dai;
    if (name == "dqn") return AgentKind::Dqn;
    throw ConfigError("unknown agent kind: " + name);
}

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::Vae: return "vae";
        case AgentKind::Hmm: return "hmm";
        case AgentKind::Chmm: return "chmm";
        case AgentKind::Dai: return "dai";
        case AgentKind::Dqn: return "dqn";
    }
    return "?";
}

AgentNetworks make_networks(AgentKind kind, const NetworkConfig& config, Rng& rng) {
    if (config.obs_dim == 0) throw ConfigError("make_networks: obs_dim not set");
    AgentNetworks nets;
    nets.kind = kind;
    nets.config = config;
    const auto act = config.hidden_act;

    if (kind == AgentKind::Dqn) {
        nets.q_net.emplace("Value", config.obs_dim, config.q_hidden, config.num_actions,
                           act, rng);
        nets.target_q.emplace("TargetValue", config.obs_dim, config.q_hidden,
                              config.num_actions, act, rng);
        sync_target(*nets.q_net, *nets.target_q);
        return nets;
    }

    nets.encoder.emplace(config.obs_dim, config.encoder_hidden, config.latent_dim, act, rng);
    nets.decoder.emplace(config.latent_dim, config.decoder_hidden,
                         config.frame_pixels ? config.frame_pixels : config.obs_dim, act,
                         rng);
    if (kind == AgentKind::Vae) return nets;

    nets.transition.emplace(config.latent_dim, config.num_actions,
                            config.transition_hidden, act, rng);
    if (kind == AgentKind::Hmm) return nets;

    nets.critic.emplace("Critic", config.latent_dim, config.critic_hidden,
                        config.num_actions, act, rng);
    nets.target_critic.emplace("TargetCritic", config.latent_dim, config.critic_hidden,
                               config.num_actions, act, rng);
    sync_target(*nets.critic, *nets.target_critic);
    if (kind == AgentKind::Chmm) return nets;

    nets.policy.emplace(config.latent_dim, config.policy_hidden, config.num_actions, act,
                        rng);
    return nets;
}

std::vector<Parameter*> AgentNetworks::trainable_parameters() {
    std::vector<Parameter*> out;
    if (encoder) encoder->collect_parameters(out);
    if (decoder) decoder->collect_parameters(out);
    if (transition) transition->collect_parameters(out);
    if (critic) critic->collect_parameters(out);
    if (policy) policy->collect_parameters(out);
    if (q_net) q_net->collect_parameters(out);
    return out;
}

std::vector<Parameter*> AgentNetworks::all_parameters() {
    std::vector<Parameter*> out = trainable_parameters();
    if (target_critic) target_critic->collect_parameters(out);
    if (target_q) target_q->collect_parameters(out);
    return out;
}

void sync_target(const ValueNet& source, ValueNet& target) {
    std::vector<Parameter*> src, dst;
    const_cast<ValueNet&>(source).collect_parameters(src);
    target.collect_parameters(dst);
    if (src.size() != dst.size()) throw ShapeError("sync_target: layer count mismatch");
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i]->value.shape() != dst[i]->value.shape())
            throw ShapeError("sync_target: shape mismatch at " + src[i]->name);
        dst[i]->value.values() = src[i]->value.values();
    }
}

}  // namespace fewb::nets
