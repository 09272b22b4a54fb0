#pragma once

#include <cstdint>
#include <vector>

#include "fewb/networks.hpp"

namespace fewb::obj {

enum class EfeTag { Principled, G1, G2, G3, G4, Blend };

EfeTag efe_tag_from_string(const std::string& name);
std::string to_string(EfeTag tag);

/// Which one-step expected-free-energy estimate the critic regresses on.
/// psi scales the reward inside the estimate; lambda is the information-gain
/// fraction and only meaningful for Blend.
struct EfeVariant {
    EfeTag tag = EfeTag::Principled;
    real psi = 1;
    real lambda = 0;
};

/// Bellman backup operator over the target network's values. G-values are
/// costs (lower is better), so the default is Min; Max matches the paper's
/// literal notation and the DQN.
enum class Backup { Min, Max };

Backup backup_from_string(const std::string& name);

struct VfeBreakdown {
    real total = 0;
    real complexity = 0;
    real accuracy = 0;    // negative log-likelihood term
    real action_kl = 0;   // DAI only
};

struct VfeResult {
    Tensor loss;  // scalar, on tape
    VfeBreakdown breakdown;
    /// Detached copy of the sampled current latent state, shared with the
    /// critic path so both sides see the same s_t.
    Tensor state_sample;
    /// The same sample still connected to the tape (reparameterized).
    Tensor state_sample_on_tape;
};

/// Mean VAE free energy over the batch:
/// KL(Q(s)||N(0,I)) - E_Q[ln P(o|s)] with one reparameterized sample.
VfeResult vfe_vae(const Tensor& obs_t, const nets::AgentNetworks& nets, Rng& rng);

/// Mean HMM free energy: the complexity term compares the encoder at o_t
/// with the transition applied to one sample of the encoder at o_{t-1}.
VfeResult vfe_hmm(const Tensor& obs_prev, const std::vector<int>& actions_prev,
                  const Tensor& obs_t, const nets::AgentNetworks& nets, Rng& rng);

/// HMM free energy plus the action term
/// KL(Q(a|s_t) || sigma[-zeta * G(s_t, .)]); the prior over actions is a
/// constant (no gradient reaches the critic through it).
VfeResult vfe_dai(const Tensor& obs_prev, const std::vector<int>& actions_prev,
                  const Tensor& obs_t, const nets::AgentNetworks& nets, real zeta,
                  Rng& rng);

/// One-step EFE estimates for the taken actions; plain detached values used
/// as regression targets. q_next must be the (detached) encoder output at
/// o_{t+1}. Must be called outside any tape.
std::vector<real> efe_one_step(const EfeVariant& variant, const nets::AgentNetworks& nets,
                               const Tensor& state_sample, const std::vector<int>& actions,
                               const dist::DiagGaussian& q_next,
                               const std::vector<real>& rewards_next);

/// y(a_t) = G_{t+1}(a_t) + gamma * backup_a' target(s_{t+1}, a'), with
/// s_{t+1} one reparameterized sample from q_next; the bootstrap term is
/// dropped for finished episodes (the target network is not consulted when
/// every row is done). Must be called outside any tape.
std::vector<real> critic_target(const std::vector<real>& g_next,
                                const dist::DiagGaussian& q_next,
                                const nets::ValueNet& target_critic, real gamma,
                                Backup backup, const std::vector<std::uint8_t>& done,
                                Rng& rng);

/// y = r + gamma * max_a' target_q(o_{t+1}, a'), bootstrap dropped when done.
std::vector<real> dqn_target(const Tensor& obs_next, const std::vector<real>& rewards,
                             const nets::ValueNet& target_q, real gamma,
                             const std::vector<std::uint8_t>& done);

/// Pointwise smooth L1 (Huber with threshold beta).
real smooth_l1(real pred, real target, real beta);

/// Row-wise smooth L1 between a predicted vector and constant targets,
/// differentiable in pred.
Tensor smooth_l1_loss(const Tensor& pred, const std::vector<real>& target, real beta);

/// Constant one-hot action rows.
Tensor one_hot(const std::vector<int>& actions, std::size_t num_actions);

/// Constant copy of the most recent frame of a stacked observation batch.
Tensor last_frame(const Tensor& obs, std::size_t frame_pixels);

}  // namespace fewb::obj
