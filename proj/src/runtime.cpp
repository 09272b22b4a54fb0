#include "fewb/runtime.hpp"

#include <cmath>
#include <limits>

namespace fewb::agent {

namespace {

Tensor obs_to_tensor(const env::Observation& obs) {
    return Tensor::from({1, obs.data.size()}, obs.data);
}

Tensor batch_obs(const std::vector<const Experience*>& batch, bool next) {
    const std::size_t B = batch.size();
    const std::size_t P = next ? batch[0]->obs_next.size() : batch[0]->obs.size();
    std::vector<real> data(B * P);
    for (std::size_t b = 0; b < B; ++b) {
        const auto& src = next ? batch[b]->obs_next : batch[b]->obs;
        for (std::size_t i = 0; i < P; ++i) data[b * P + i] = static_cast<real>(src[i]);
    }
    return Tensor::from({B, P}, std::move(data));
}

int sample_categorical(const std::vector<real>& probs, Rng& rng) {
    const real u = rng.uniform();
    real acc = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

/// MAP latent estimate: the encoder mean at the observation.
std::vector<real> encode_map(const nets::AgentNetworks& nets, const env::Observation& obs) {
    NoGrad guard;
    dist::DiagGaussian q = (*nets.encoder)(obs_to_tensor(obs));
    return q.mean.values();
}

int best_action(const nets::AgentNetworks& nets, const env::Observation& obs,
                const ObjectiveParams& objective) {
    NoGrad guard;
    if (nets.kind == nets::AgentKind::Dqn) {
        Tensor q = (*nets.q_net)(obs_to_tensor(obs));
        int best = 0;
        for (std::size_t a = 1; a < q.size(); ++a)
            if (q.values()[a] > q.values()[best]) best = static_cast<int>(a);
        return best;
    }
    if (nets.kind == nets::AgentKind::Dai) {
        Tensor s = Tensor::from({1, nets.config.latent_dim}, encode_map(nets, obs));
        dist::CategoricalDist pi = (*nets.policy)(s);
        int best = 0;
        for (std::size_t a = 1; a < pi.probs.size(); ++a)
            if (pi.probs.values()[a] > pi.probs.values()[best]) best = static_cast<int>(a);
        return best;
    }
    if (!nets.critic)
        throw ConfigError("best-action selection requires a critic or policy network");
    Tensor s = Tensor::from({1, nets.config.latent_dim}, encode_map(nets, obs));
    Tensor g = (*nets.critic)(s);
    int best = 0;
    for (std::size_t a = 1; a < g.size(); ++a) {
        const bool better = objective.argmin_selection ? g.values()[a] < g.values()[best]
                                                       : g.values()[a] > g.values()[best];
        if (better) best = static_cast<int>(a);
    }
    return best;
}

int softmax_action(const SelectionStrategy& strategy, const nets::AgentNetworks& nets,
                   const env::Observation& obs, const ObjectiveParams& objective, Rng& rng) {
    NoGrad guard;
    if (nets.kind == nets::AgentKind::Dai) {
        Tensor s = Tensor::from({1, nets.config.latent_dim}, encode_map(nets, obs));
        dist::CategoricalDist pi = (*nets.policy)(s);
        return sample_categorical(pi.probs.values(), rng);
    }
    Tensor values;
    bool negate;
    if (nets.kind == nets::AgentKind::Dqn) {
        values = (*nets.q_net)(obs_to_tensor(obs));
        negate = false;  // Q-values: higher is better
    } else {
        if (!nets.critic)
            throw ConfigError("softmax selection requires a critic network");
        Tensor s = Tensor::from({1, nets.config.latent_dim}, encode_map(nets, obs));
        values = (*nets.critic)(s);
        negate = objective.argmin_selection;
    }
    dist::CategoricalDist d = dist::precision_softmax(values, strategy.zeta, negate);
    return sample_categorical(d.probs.values(), rng);
}

}  // namespace

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "random") return StrategyKind::Random;
    if (name == "best") return StrategyKind::Best;
    if (name == "softmax") return StrategyKind::Softmax;
    if (name == "epsilon_greedy") return StrategyKind::EpsilonGreedy;
    throw ConfigError("unknown selection strategy: " + name);
}

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Random: return "random";
        case StrategyKind::Best: return "best";
        case StrategyKind::Softmax: return "softmax";
        case StrategyKind::EpsilonGreedy: return "epsilon_greedy";
    }
    return "?";
}

real SelectionStrategy::epsilon(long iteration) const {
    return epsilon_end + (epsilon_start - epsilon_end) *
                             std::exp(-static_cast<real>(iteration) / epsilon_decay_steps);
}

real RunMetrics::mean_episode_reward_tail(long horizon, long window) const {
    real sum = 0;
    long count = 0;
    for (const auto& ep : episodes) {
        if (ep.end_iter > horizon - window && ep.end_iter <= horizon) {
            sum += ep.reward;
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<real>(count) : real(0);
}

int select_action(const SelectionStrategy& strategy, const nets::AgentNetworks& nets,
                  const env::Observation& obs, long iteration,
                  const ObjectiveParams& objective, Rng& rng) {
    const auto kind = nets.kind;
    const bool actless = kind == nets::AgentKind::Vae || kind == nets::AgentKind::Hmm;
    switch (strategy.kind) {
        case StrategyKind::Random:
            return static_cast<int>(rng.uniform_int(env::kNumActions));
        case StrategyKind::Best:
            if (actless) throw ConfigError("best-action selection needs a critic/policy");
            return best_action(nets, obs, objective);
        case StrategyKind::Softmax:
            if (actless) throw ConfigError("softmax selection needs a critic/policy");
            return softmax_action(strategy, nets, obs, objective, rng);
        case StrategyKind::EpsilonGreedy: {
            if (actless) throw ConfigError("epsilon-greedy selection needs a critic/policy");
            const real eps = strategy.epsilon(iteration);
            if (rng.uniform() < eps)
                return static_cast<int>(rng.uniform_int(env::kNumActions));
            return best_action(nets, obs, objective);
        }
    }
    throw ContractError("unreachable strategy kind");
}

real prior_action_entropy(const nets::AgentNetworks& nets, const env::Observation& obs,
                          real zeta) {
    if (!nets.critic) return std::numeric_limits<real>::quiet_NaN();
    NoGrad guard;
    Tensor s = Tensor::from({1, nets.config.latent_dim}, encode_map(nets, obs));
    Tensor g = (*nets.critic)(s);
    dist::CategoricalDist prior = dist::precision_softmax(g, zeta, /*negate=*/true);
    return dist::categorical_entropy(prior.probs.values());
}

LearnStats learn_step(nets::AgentNetworks& nets,
                      const std::vector<const Experience*>& batch,
                      const ObjectiveParams& objective, const AdamConfig& adam, Rng& rng) {
    LearnStats stats;
    if (batch.empty()) return stats;
    stats.learned = true;

    const std::size_t B = batch.size();
    std::vector<int> actions(B);
    std::vector<std::size_t> action_idx(B);
    std::vector<real> rewards(B);
    std::vector<std::uint8_t> done(B);
    for (std::size_t b = 0; b < B; ++b) {
        actions[b] = batch[b]->action;
        action_idx[b] = static_cast<std::size_t>(batch[b]->action);
        rewards[b] = batch[b]->reward_next;
        done[b] = batch[b]->done ? 1 : 0;
    }
    Tensor obs_t = batch_obs(batch, /*next=*/false);
    Tensor obs_next = batch_obs(batch, /*next=*/true);

    auto params = nets.trainable_parameters();
    const std::span<Parameter* const> params_span{params};

    switch (nets.kind) {
        case nets::AgentKind::Dqn: {
            std::vector<real> y = obj::dqn_target(obs_next, rewards, *nets.target_q,
                                                  objective.gamma, done);
            Tape tape;
            Tensor pred = gather_lastdim((*nets.q_net)(obs_t), action_idx);
            Tensor loss = mean_all(square(sub(pred, Tensor::from({B}, y))));
            stats.critic_loss = loss.item();
            tape.backward(loss);
            adam_step(params_span, adam);
            break;
        }
        case nets::AgentKind::Vae: {
            Tape tape;
            obj::VfeResult vfe = obj::vfe_vae(obs_t, nets, rng);
            stats.vfe = vfe.breakdown;
            tape.backward(vfe.loss);
            adam_step(params_span, adam);
            break;
        }
        case nets::AgentKind::Hmm: {
            Tape tape;
            obj::VfeResult vfe = obj::vfe_hmm(obs_t, actions, obs_next, nets, rng);
            stats.vfe = vfe.breakdown;
            tape.backward(vfe.loss);
            adam_step(params_span, adam);
            break;
        }
        case nets::AgentKind::Chmm:
        case nets::AgentKind::Dai: {
            Tape tape;
            obj::VfeResult vfe =
                nets.kind == nets::AgentKind::Chmm
                    ? obj::vfe_hmm(obs_t, actions, obs_next, nets, rng)
                    : obj::vfe_dai(obs_t, actions, obs_next, nets, objective.zeta, rng);
            stats.vfe = vfe.breakdown;

            // Regression targets are detached: the critic never trains the
            // world model and vice versa.
            std::vector<real> y;
            {
                NoGrad guard;
                dist::DiagGaussian q_next = (*nets.encoder)(obs_next);
                std::vector<real> g_next = obj::efe_one_step(
                    objective.variant, nets, vfe.state_sample, actions, q_next, rewards);
                y = obj::critic_target(g_next, q_next, *nets.target_critic,
                                       objective.gamma, objective.backup, done, rng);
            }
            Tensor pred = gather_lastdim((*nets.critic)(vfe.state_sample), action_idx);
            Tensor critic_loss = mean_all(obj::smooth_l1_loss(pred, y, objective.sl1_beta));
            stats.critic_loss = critic_loss.item();
            Tensor loss = add(vfe.loss, critic_loss);
            tape.backward(loss);
            adam_step(params_span, adam);
            break;
        }
    }
    return stats;
}

}  // namespace fewb::agent
