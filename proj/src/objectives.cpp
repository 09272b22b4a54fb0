#include "fewb/objectives.hpp"

#include <cmath>

namespace fewb::obj {

namespace {

using dist::DiagGaussian;

void require_no_tape(const char* what) {
    if (Tape::active())
        throw ContractError(std::string(what) + ": regression targets must be computed "
                                                "outside a tape");
}

Tensor detached_gaussian_sample(const DiagGaussian& g, Rng& rng) {
    DiagGaussian detached(g.mean.detached(), g.log_var.detached());
    return dist::reparameterize(detached, rng);
}

}  // namespace

EfeTag efe_tag_from_string(const std::string& name) {
    if (name == "principled" || name == "g") return EfeTag::Principled;
    if (name == "g1") return EfeTag::G1;
    if (name == "g2") return EfeTag::G2;
    if (name == "g3") return EfeTag::G3;
    if (name == "g4") return EfeTag::G4;
    if (name == "blend") return EfeTag::Blend;
    throw ConfigError("unknown EFE variant: " + name);
}

std::string to_string(EfeTag tag) {
    switch (tag) {
        case EfeTag::Principled: return "principled";
        case EfeTag::G1: return "g1";
        case EfeTag::G2: return "g2";
        case EfeTag::G3: return "g3";
        case EfeTag::G4: return "g4";
        case EfeTag::Blend: return "blend";
    }
    return "?";
}

Backup backup_from_string(const std::string& name) {
    if (name == "min") return Backup::Min;
    if (name == "max") return Backup::Max;
    throw ConfigError("backup must be min or max, got: " + name);
}

Tensor one_hot(const std::vector<int>& actions, std::size_t num_actions) {
    std::vector<real> data(actions.size() * num_actions, real(0));
    for (std::size_t b = 0; b < actions.size(); ++b) {
        if (actions[b] < 0 || static_cast<std::size_t>(actions[b]) >= num_actions)
            throw ContractError("one_hot: action id out of range");
        data[b * num_actions + actions[b]] = real(1);
    }
    return Tensor::from({actions.size(), num_actions}, std::move(data));
}

Tensor last_frame(const Tensor& obs, std::size_t frame_pixels) {
    const std::size_t B = obs.rows(), P = obs.cols();
    if (frame_pixels > P) throw ShapeError("last_frame: frame larger than observation");
    std::vector<real> data(B * frame_pixels);
    for (std::size_t b = 0; b < B; ++b)
        std::copy_n(obs.values().data() + b * P + (P - frame_pixels), frame_pixels,
                    data.data() + b * frame_pixels);
    return Tensor::from({B, frame_pixels}, std::move(data));
}

VfeResult vfe_vae(const Tensor& obs_t, const nets::AgentNetworks& nets, Rng& rng) {
    const auto& encoder = *nets.encoder;
    const auto& decoder = *nets.decoder;
    DiagGaussian q = encoder(obs_t);
    Tensor complexity = dist::kl_diag_gaussian(q, DiagGaussian::standard(q.batch(), q.dim()));
    Tensor s = dist::reparameterize(q, rng);
    dist::BernoulliFactors probs = decoder(s);
    Tensor target = last_frame(obs_t, decoder.pixels());
    Tensor accuracy = neg(dist::bernoulli_log_likelihood(target, probs));

    VfeResult result;
    Tensor c = mean_all(complexity);
    Tensor a = mean_all(accuracy);
    result.loss = add(c, a);
    result.breakdown.complexity = c.item();
    result.breakdown.accuracy = a.item();
    result.breakdown.total = result.loss.item();
    result.state_sample = s.detached();
    result.state_sample_on_tape = s;
    return result;
}

VfeResult vfe_hmm(const Tensor& obs_prev, const std::vector<int>& actions_prev,
                  const Tensor& obs_t, const nets::AgentNetworks& nets, Rng& rng) {
    const auto& encoder = *nets.encoder;
    const auto& decoder = *nets.decoder;
    const auto& transition = *nets.transition;

    DiagGaussian q_prev = encoder(obs_prev);
    Tensor s_prev = dist::reparameterize(q_prev, rng);
    Tensor a_onehot = one_hot(actions_prev, nets.config.num_actions);
    DiagGaussian p_trans = transition(s_prev, a_onehot);

    DiagGaussian q_t = encoder(obs_t);
    Tensor complexity = dist::kl_diag_gaussian(q_t, p_trans);
    Tensor s_t = dist::reparameterize(q_t, rng);
    dist::BernoulliFactors probs = decoder(s_t);
    Tensor target = last_frame(obs_t, decoder.pixels());
    Tensor accuracy = neg(dist::bernoulli_log_likelihood(target, probs));

    VfeResult result;
    Tensor c = mean_all(complexity);
    Tensor a = mean_all(accuracy);
    result.loss = add(c, a);
    result.breakdown.complexity = c.item();
    result.breakdown.accuracy = a.item();
    result.breakdown.total = result.loss.item();
    result.state_sample = s_t.detached();
    result.state_sample_on_tape = s_t;
    return result;
}

VfeResult vfe_dai(const Tensor& obs_prev, const std::vector<int>& actions_prev,
                  const Tensor& obs_t, const nets::AgentNetworks& nets, real zeta,
                  Rng& rng) {
    if (!nets.critic || !nets.policy)
        throw ContractError("vfe_dai: agent lacks critic or policy network");

    VfeResult result = vfe_hmm(obs_prev, actions_prev, obs_t, nets, rng);

    // Action prior sigma[-zeta G] is a constant: the critic is trained by
    // regression only, never through the VFE.
    dist::CategoricalDist prior;
    {
        NoGrad guard;
        Tensor g = (*nets.critic)(result.state_sample);
        prior = dist::precision_softmax(g, zeta, /*negate=*/true);
    }
    // The policy sees the same reparameterized sample that produced the
    // reconstruction, so gradient also reaches the encoder through this term.
    dist::CategoricalDist pi = (*nets.policy)(result.state_sample_on_tape);
    Tensor action_kl = mean_all(dist::categorical_kl(pi, prior));

    result.breakdown.action_kl = action_kl.item();
    result.loss = add(result.loss, action_kl);
    result.breakdown.total = result.loss.item();
    return result;
}

std::vector<real> efe_one_step(const EfeVariant& variant, const nets::AgentNetworks& nets,
                               const Tensor& state_sample, const std::vector<int>& actions,
                               const DiagGaussian& q_next,
                               const std::vector<real>& rewards_next) {
    require_no_tape("efe_one_step");
    const std::size_t B = rewards_next.size();
    std::vector<real> g(B, real(0));
    for (std::size_t b = 0; b < B; ++b) g[b] = -variant.psi * rewards_next[b];
    if (variant.tag == EfeTag::G4) return g;  // reward only, no model terms

    if (actions.size() != B || state_sample.rows() != B || q_next.batch() != B)
        throw ShapeError("efe_one_step: batch size mismatch");
    Tensor a_onehot = one_hot(actions, nets.config.num_actions);
    DiagGaussian p_trans = (*nets.transition)(state_sample, a_onehot);

    Tensor term;
    switch (variant.tag) {
        case EfeTag::Principled:
            term = dist::kl_diag_gaussian(p_trans, q_next);
            break;
        case EfeTag::G1:
            term = sub(dist::gaussian_entropy(q_next), dist::gaussian_entropy(p_trans));
            break;
        case EfeTag::G2:
            term = sub(dist::gaussian_entropy(p_trans), dist::gaussian_entropy(q_next));
            break;
        case EfeTag::G3:
            term = dist::kl_diag_gaussian(q_next, p_trans);
            break;
        case EfeTag::Blend:
            term = scale(dist::kl_diag_gaussian(p_trans, q_next), variant.lambda);
            break;
        case EfeTag::G4:
            break;
    }
    for (std::size_t b = 0; b < B; ++b) g[b] += term.values()[b];
    return g;
}

std::vector<real> critic_target(const std::vector<real>& g_next,
                                const DiagGaussian& q_next,
                                const nets::ValueNet& target_critic, real gamma,
                                Backup backup, const std::vector<std::uint8_t>& done,
                                Rng& rng) {
    require_no_tape("critic_target");
    if (gamma < 0 || gamma >= 1) throw ContractError("critic_target: gamma must be in [0,1)");
    const std::size_t B = g_next.size();
    if (done.size() != B || q_next.batch() != B)
        throw ShapeError("critic_target: batch size mismatch");
    std::vector<real> y = g_next;
    bool any_bootstrap = false;
    for (auto d : done)
        if (!d) any_bootstrap = true;
    if (!any_bootstrap) return y;

    Tensor s_next = detached_gaussian_sample(q_next, rng);
    Tensor values = target_critic(s_next);
    const std::size_t A = values.cols();
    for (std::size_t b = 0; b < B; ++b) {
        if (done[b]) continue;
        real best = values.at(b, 0);
        for (std::size_t a = 1; a < A; ++a) {
            const real v = values.at(b, a);
            best = (backup == Backup::Min) ? std::min(best, v) : std::max(best, v);
        }
        y[b] += gamma * best;
    }
    return y;
}

std::vector<real> dqn_target(const Tensor& obs_next, const std::vector<real>& rewards,
                             const nets::ValueNet& target_q, real gamma,
                             const std::vector<std::uint8_t>& done) {
    require_no_tape("dqn_target");
    if (gamma < 0 || gamma >= 1) throw ContractError("dqn_target: gamma must be in [0,1)");
    const std::size_t B = rewards.size();
    if (done.size() != B) throw ShapeError("dqn_target: batch size mismatch");
    std::vector<real> y = rewards;
    bool any_bootstrap = false;
    for (auto d : done)
        if (!d) any_bootstrap = true;
    if (!any_bootstrap) return y;

    Tensor values = target_q(obs_next);
    const std::size_t A = values.cols();
    for (std::size_t b = 0; b < B; ++b) {
        if (done[b]) continue;
        real best = values.at(b, 0);
        for (std::size_t a = 1; a < A; ++a) best = std::max(best, values.at(b, a));
        y[b] += gamma * best;
    }
    return y;
}

real smooth_l1(real pred, real target, real beta) {
    if (beta <= 0) throw ContractError("smooth_l1: beta must be positive");
    const real d = std::abs(pred - target);
    return d < beta ? real(0.5) * d * d / beta : d - real(0.5) * beta;
}

Tensor smooth_l1_loss(const Tensor& pred, const std::vector<real>& target, real beta) {
    if (beta <= 0) throw ContractError("smooth_l1: beta must be positive");
    if (pred.size() != target.size())
        throw ShapeError("smooth_l1_loss: prediction/target size mismatch");
    auto out = std::make_shared<detail::TensorNode>();
    out->shape = pred.shape();
    out->value.resize(pred.size());
    auto pn = pred.node();
    auto tgt = std::make_shared<std::vector<real>>(target);
    for (std::size_t i = 0; i < pred.size(); ++i)
        out->value[i] = smooth_l1(pn->value[i], (*tgt)[i], beta);

    Tape* tape = Tape::active();
    if (tape && pn->requires_grad) {
        out->requires_grad = true;
        out->inputs = {pn};
        auto on = out;
        out->backward = [pn, on, tgt, beta] {
            pn->ensure_grad();
            for (std::size_t i = 0; i < on->value.size(); ++i) {
                const real d = pn->value[i] - (*tgt)[i];
                const real slope = std::abs(d) < beta ? d / beta : (d > 0 ? real(1) : real(-1));
                pn->grad[i] += on->grad[i] * slope;
            }
        };
        tape->record(out);
    }
    return Tensor(std::move(out));
}

}  // namespace fewb::obj
