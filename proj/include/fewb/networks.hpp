#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fewb/distributions.hpp"
#include "fewb/optimizer.hpp"
#include "fewb/rng.hpp"

namespace fewb::nets {

/// Receives post-activation layer outputs during a forward pass.
struct ActivationSink {
    virtual ~ActivationSink() = default;
    virtual void record(const std::string& label, const Tensor& post) = 0;
};

struct DenseLayer {
    Parameter w;
    Parameter b;
    Activation act = Activation::Identity;
    std::string label;

    DenseLayer() = default;
    /// Glorot-uniform weights, zero bias. zero_init forces all-zero weights
    /// (symmetric start: a softmax head then yields the uniform distribution).
    DenseLayer(std::string label, std::size_t in, std::size_t out, Activation act,
               Rng& rng, bool zero_init = false);

    Tensor forward(const Tensor& x, ActivationSink* sink = nullptr) const;
    std::size_t in_dim() const { return w.value.shape()[0]; }
    std::size_t out_dim() const { return w.value.shape()[1]; }
};

class Mlp {
public:
    Mlp() = default;
    Mlp(const std::string& name, std::size_t input_dim,
        const std::vector<std::size_t>& hidden, Activation act, Rng& rng);

    Tensor forward(const Tensor& x, ActivationSink* sink = nullptr) const;
    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const;
    std::vector<DenseLayer>& layers() { return layers_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    void collect_parameters(std::vector<Parameter*>& out);

private:
    std::size_t input_dim_ = 0;
    std::vector<DenseLayer> layers_;
};

/// obs -> Q(s) = N(mean, exp(log_var)); log-variance head clamped to
/// +-dist::kLogVarClamp before use.
class Encoder {
public:
    Encoder() = default;
    Encoder(std::size_t obs_dim, const std::vector<std::size_t>& hidden,
            std::size_t latent_dim, Activation act, Rng& rng);
    dist::DiagGaussian operator()(const Tensor& obs, ActivationSink* sink = nullptr) const;
    std::size_t latent_dim() const { return mean_head_.out_dim(); }
    std::size_t obs_dim() const { return trunk_.input_dim(); }
    void collect_parameters(std::vector<Parameter*>& out);

private:
    Mlp trunk_;
    DenseLayer mean_head_;
    DenseLayer logvar_head_;
};

/// latent -> per-pixel Bernoulli probabilities of the most recent frame.
class Decoder {
public:
    Decoder() = default;
    Decoder(std::size_t latent_dim, const std::vector<std::size_t>& hidden,
            std::size_t pixels, Activation act, Rng& rng);
    dist::BernoulliFactors operator()(const Tensor& latent,
                                      ActivationSink* sink = nullptr) const;
    std::size_t pixels() const { return out_head_.out_dim(); }
    void collect_parameters(std::vector<Parameter*>& out);

private:
    Mlp trunk_;
    DenseLayer out_head_;
};

/// (latent, action one-hot) -> P(s'|s,a) = N(mean, exp(log_var)).
class Transition {
public:
    Transition() = default;
    Transition(std::size_t latent_dim, std::size_t num_actions,
               const std::vector<std::size_t>& hidden, Activation act, Rng& rng);
    dist::DiagGaussian operator()(const Tensor& latent, const Tensor& action_onehot,
                                  ActivationSink* sink = nullptr) const;
    std::size_t latent_dim() const { return mean_head_.out_dim(); }
    void collect_parameters(std::vector<Parameter*>& out);

private:
    Mlp trunk_;
    DenseLayer mean_head_;
    DenseLayer logvar_head_;
};

/// Plain value head over an input vector: the critic (G per action, lower is
/// better under the default polarity) and the DQN value network (Q per
/// action) share this structure.
class ValueNet {
public:
    ValueNet() = default;
    ValueNet(const std::string& name, std::size_t input_dim,
             const std::vector<std::size_t>& hidden, std::size_t num_actions,
             Activation act, Rng& rng);
    Tensor operator()(const Tensor& x, ActivationSink* sink = nullptr) const;
    std::size_t num_actions() const { return out_head_.out_dim(); }
    std::size_t input_dim() const { return trunk_.input_dim(); }
    std::size_t forward_calls() const { return forward_calls_; }
    void collect_parameters(std::vector<Parameter*>& out);

private:
    Mlp trunk_;
    DenseLayer out_head_;
    mutable std::size_t forward_calls_ = 0;
};

/// latent -> Cat(a; pi_hat) via a softmax head.
class Policy {
public:
    Policy() = default;
    Policy(std::size_t latent_dim, const std::vector<std::size_t>& hidden,
           std::size_t num_actions, Activation act, Rng& rng);
    dist::CategoricalDist operator()(const Tensor& latent,
                                     ActivationSink* sink = nullptr) const;
    std::size_t num_actions() const { return out_head_.out_dim(); }
    void collect_parameters(std::vector<Parameter*>& out);

private:
    Mlp trunk_;
    DenseLayer out_head_;
};

enum class AgentKind { Vae, Hmm, Chmm, Dai, Dqn };

AgentKind agent_kind_from_string(const std::string& name);
std::string to_string(AgentKind kind);

struct NetworkConfig {
    std::size_t latent_dim = 10;
    std::size_t num_actions = 4;
    std::size_t obs_dim = 0;       // resolution^2 * frame_stack
    std::size_t frame_pixels = 0;  // resolution^2, the decoder's target
    std::vector<std::size_t> encoder_hidden{256, 256};
    std::vector<std::size_t> decoder_hidden{256, 256};
    std::vector<std::size_t> transition_hidden{512, 512};
    std::vector<std::size_t> critic_hidden{128, 128};
    std::vector<std::size_t> policy_hidden{128, 128};
    std::vector<std::size_t> q_hidden{256, 256};
    Activation hidden_act = Activation::Relu;
};

/// The networks an agent owns; roles not used by the agent kind stay empty.
struct AgentNetworks {
    AgentKind kind = AgentKind::Vae;
    NetworkConfig config;
    std::optional<Encoder> encoder;
    std::optional<Decoder> decoder;
    std::optional<Transition> transition;
    std::optional<ValueNet> critic;
    std::optional<ValueNet> target_critic;
    std::optional<Policy> policy;
    std::optional<ValueNet> q_net;
    std::optional<ValueNet> target_q;

    /// Everything the optimizer updates (target copies excluded).
    std::vector<Parameter*> trainable_parameters();
    /// Everything, for checkpointing.
    std::vector<Parameter*> all_parameters();
};

AgentNetworks make_networks(AgentKind kind, const NetworkConfig& config, Rng& rng);

/// Hard copy of all weights from source into target.
void sync_target(const ValueNet& source, ValueNet& target);

}  // namespace fewb::nets
