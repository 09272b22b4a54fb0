#pragma once

#include <string>

#include "fewb/dsprites.hpp"
#include "fewb/networks.hpp"
#include "fewb/objectives.hpp"
#include "fewb/planner.hpp"
#include "fewb/replay.hpp"

namespace fewb::agent {

enum class StrategyKind { Random, Best, Softmax, EpsilonGreedy };

StrategyKind strategy_from_string(const std::string& name);
std::string to_string(StrategyKind kind);

struct SelectionStrategy {
    StrategyKind kind = StrategyKind::Random;
    real epsilon_start = 1;
    real epsilon_end = real(0.05);
    real epsilon_decay_steps = 5000;
    real zeta = 1;  // Softmax temperature over critic values

    /// epsilon(i) = end + (start - end) * exp(-i / decay)
    real epsilon(long iteration) const;
};

struct ObjectiveParams {
    obj::EfeVariant variant;
    real zeta = 1;
    real gamma = real(0.99);
    real sl1_beta = 1;
    obj::Backup backup = obj::Backup::Min;
    /// Best-action polarity for critic G-values: true picks the argmin
    /// (consistent with sigma[-zeta G]); DQN Q-values always take the argmax.
    bool argmin_selection = true;
};

struct TrainingParams {
    long iterations = 50000;
    std::size_t batch_size = 32;
    std::size_t buffer_capacity = 50000;
    std::size_t warmup = 1000;
    long target_sync_period = 100;  // K
    real learning_rate = real(1e-4);
    std::uint64_t seed = 1;
    long log_period = 100;
    long checkpoint_period = 10000;
};

struct MetricsRow {
    long iter = 0;
    real vfe = 0, complexity = 0, accuracy = 0, action_kl = 0, critic_loss = 0;
    real ep_reward = 0, cum_reward = 0, entropy_prior = 0, epsilon = 0;
    long a0 = 0, a1 = 0, a2 = 0, a3 = 0;  // cumulative action counts
    bool crashed = false;
};

struct EpisodeRecord {
    long end_iter = 0;
    real reward = 0;
    int length = 0;
};

struct RunMetrics {
    std::vector<MetricsRow> rows;
    std::vector<EpisodeRecord> episodes;
    bool crashed = false;
    long crash_iter = -1;

    /// Mean reward of episodes that finished within the final `window`
    /// iterations of `horizon`.
    real mean_episode_reward_tail(long horizon, long window) const;
};

struct LearnStats {
    bool learned = false;  // false while the buffer warms up
    obj::VfeBreakdown vfe;
    real critic_loss = 0;
};

/// Picks the next action from the current observation. Strategies needing a
/// network the agent does not have raise ConfigError (VAE/HMM act randomly).
int select_action(const SelectionStrategy& strategy, const nets::AgentNetworks& nets,
                  const env::Observation& obs, long iteration,
                  const ObjectiveParams& objective, Rng& rng);

/// One gradient step on a replay batch; agent-kind dispatch per the ladder
/// (VAE/HMM: free energy; CHMM/DAI: free energy + critic smooth-L1 on
/// detached one-step EFE targets; DQN: MSE on the Q-target).
LearnStats learn_step(nets::AgentNetworks& nets,
                      const std::vector<const Experience*>& batch,
                      const ObjectiveParams& objective, const AdamConfig& adam, Rng& rng);

/// Entropy (nats) of the action prior sigma[-zeta G(s_t, .)] at the current
/// observation; NaN for agents without a critic.
real prior_action_entropy(const nets::AgentNetworks& nets, const env::Observation& obs,
                          real zeta);

}  // namespace fewb::agent
