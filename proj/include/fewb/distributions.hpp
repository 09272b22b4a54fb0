#pragma once

#include "fewb/rng.hpp"
#include "fewb/tensor.hpp"

namespace fewb::dist {

/// Variance bound: log-variances are clamped to [-kLogVarClamp, kLogVarClamp]
/// before any exponentiation, keeping the objectives away from the
/// NaN regime at extreme variances.
inline constexpr real kLogVarClamp = real(10);

/// Probability floor for the Bernoulli likelihood (binary cross entropy).
inline constexpr real kBernoulliClamp = real(1e-7);

/// Diagonal Gaussian, parameterized by mean and log-variance. Tensors are
/// [BxD] (or [D] for a single distribution); every operation below is
/// row-wise over the batch and differentiable through both parameters.
struct DiagGaussian {
    Tensor mean;
    Tensor log_var;
    DiagGaussian() = default;
    DiagGaussian(Tensor m, Tensor lv);
    std::size_t batch() const { return mean.rows(); }
    std::size_t dim() const { return mean.cols(); }
    /// N(0, I) of the given arity.
    static DiagGaussian standard(std::size_t batch, std::size_t dim);
};

/// Independent per-pixel Bernoulli factors (probabilities in [0,1]).
struct BernoulliFactors {
    Tensor probs;
};

/// Probability vector over actions, rows summing to one.
struct CategoricalDist {
    Tensor probs;
};

/// KL(q || p) per batch row:
/// sum_d 0.5 * (exp(lq-lp) + (mq-mp)^2 * exp(-lp) - 1 + lp - lq).
Tensor kl_diag_gaussian(const DiagGaussian& q, const DiagGaussian& p);

/// Differential entropy per batch row: sum_d 0.5 * (ln(2*pi*e) + lv_d).
Tensor gaussian_entropy(const DiagGaussian& g);

/// One sample per row via the reparameterization trick:
/// mean + exp(log_var / 2) * eps, eps ~ N(0, I). Gradient flows to mean and
/// log_var but not through eps.
Tensor reparameterize(const DiagGaussian& g, Rng& rng);

/// log Bernoulli(obs; probs) summed over pixels per row, with probabilities
/// clamped to [kBernoulliClamp, 1 - kBernoulliClamp]. obs entries in [0,1].
Tensor bernoulli_log_likelihood(const Tensor& obs, const BernoulliFactors& factors);

/// KL(q || p) per row over a shared categorical support, 0*ln(0) = 0.
/// Returns +infinity for rows where p_a = 0 while q_a > 0.
Tensor categorical_kl(const CategoricalDist& q, const CategoricalDist& p);

/// softmax(+-zeta * values) row-wise with max subtraction; negate=true gives
/// the action prior sigma[-zeta * G].
CategoricalDist precision_softmax(const Tensor& values, real zeta, bool negate);

/// Shannon entropy (nats) of one probability row.
real categorical_entropy(const std::vector<real>& probs);

}  // namespace fewb::dist
