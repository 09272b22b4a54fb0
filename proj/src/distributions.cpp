#include "fewb/distributions.hpp"

#include <cmath>
#include <limits>

namespace fewb::dist {

namespace {

constexpr real kHalfLog2PiE = real(1.4189385332046727);  // 0.5 * ln(2*pi*e)

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

std::pair<std::size_t, std::size_t> rows_cols(const Tensor& t) {
    if (t.shape().size() == 1) return {1, t.shape()[0]};
    if (t.shape().size() == 2) return {t.shape()[0], t.shape()[1]};
    throw ShapeError("distribution tensors must be [D] or [BxD]");
}

NodePtr make_row_output(std::size_t b) {
    auto n = std::make_shared<TensorNode>();
    n->shape = {b};
    n->value.assign(b, real(0));
    return n;
}

Tensor finish(NodePtr out, std::vector<NodePtr> inputs, std::function<void()> backward) {
    Tape* tape = Tape::active();
    bool needs = false;
    for (const auto& in : inputs)
        if (in->requires_grad) needs = true;
    if (tape && needs) {
        out->requires_grad = true;
        out->inputs = std::move(inputs);
        out->backward = std::move(backward);
        tape->record(out);
    }
    return Tensor(std::move(out));
}

}  // namespace

DiagGaussian::DiagGaussian(Tensor m, Tensor lv) : mean(std::move(m)), log_var(std::move(lv)) {
    if (mean.shape() != log_var.shape())
        throw ShapeError("DiagGaussian: mean and log_var must have equal shape");
}

DiagGaussian DiagGaussian::standard(std::size_t batch, std::size_t dim) {
    return DiagGaussian(Tensor::zeros({batch, dim}), Tensor::zeros({batch, dim}));
}

Tensor kl_diag_gaussian(const DiagGaussian& q, const DiagGaussian& p) {
    if (q.mean.shape() != p.mean.shape())
        throw ShapeError("kl_diag_gaussian: dimension mismatch");
    auto [B, D] = rows_cols(q.mean);
    auto out = make_row_output(B);
    auto mq = q.mean.node(), lq = q.log_var.node();
    auto mp = p.mean.node(), lp = p.log_var.node();
    for (std::size_t b = 0; b < B; ++b) {
        real acc = 0;
        for (std::size_t d = 0; d < D; ++d) {
            const std::size_t i = b * D + d;
            const real dlv = lq->value[i] - lp->value[i];
            const real dm = mq->value[i] - mp->value[i];
            acc += real(0.5) * (std::exp(dlv) + dm * dm * std::exp(-lp->value[i]) -
                                real(1) - dlv);
        }
        out->value[b] = acc;
    }
    auto on = out;
    return finish(out, {mq, lq, mp, lp}, [mq, lq, mp, lp, on, B, D] {
        for (std::size_t b = 0; b < B; ++b) {
            const real g = on->grad[b];
            if (g == 0) continue;
            for (std::size_t d = 0; d < D; ++d) {
                const std::size_t i = b * D + d;
                const real inv_vp = std::exp(-lp->value[i]);
                const real ratio = std::exp(lq->value[i] - lp->value[i]);
                const real dm = mq->value[i] - mp->value[i];
                if (mq->requires_grad) {
                    mq->ensure_grad();
                    mq->grad[i] += g * dm * inv_vp;
                }
                if (mp->requires_grad) {
                    mp->ensure_grad();
                    mp->grad[i] -= g * dm * inv_vp;
                }
                if (lq->requires_grad) {
                    lq->ensure_grad();
                    lq->grad[i] += g * real(0.5) * (ratio - real(1));
                }
                if (lp->requires_grad) {
                    lp->ensure_grad();
                    lp->grad[i] += g * real(0.5) * (real(1) - ratio - dm * dm * inv_vp);
                }
            }
        }
    });
}

Tensor gaussian_entropy(const DiagGaussian& g) {
    auto [B, D] = rows_cols(g.log_var);
    auto out = make_row_output(B);
    auto lv = g.log_var.node();
    for (std::size_t b = 0; b < B; ++b) {
        real acc = 0;
        for (std::size_t d = 0; d < D; ++d)
            acc += kHalfLog2PiE + real(0.5) * lv->value[b * D + d];
        out->value[b] = acc;
    }
    auto on = out;
    return finish(out, {lv}, [lv, on, B, D] {
        if (!lv->requires_grad) return;
        lv->ensure_grad();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t d = 0; d < D; ++d)
                lv->grad[b * D + d] += on->grad[b] * real(0.5);
    });
}

Tensor reparameterize(const DiagGaussian& g, Rng& rng) {
    auto [B, D] = rows_cols(g.mean);
    auto mu = g.mean.node();
    auto lv = g.log_var.node();
    auto out = std::make_shared<TensorNode>();
    out->shape = g.mean.shape();
    out->value.resize(B * D);
    auto eps = std::make_shared<std::vector<real>>(B * D);
    for (std::size_t i = 0; i < B * D; ++i) {
        (*eps)[i] = rng.gaussian();
        out->value[i] = mu->value[i] + std::exp(real(0.5) * lv->value[i]) * (*eps)[i];
    }
    auto on = out;
    return finish(out, {mu, lv}, [mu, lv, on, eps] {
        for (std::size_t i = 0; i < on->value.size(); ++i) {
            const real gi = on->grad[i];
            if (mu->requires_grad) {
                mu->ensure_grad();
                mu->grad[i] += gi;
            }
            if (lv->requires_grad) {
                lv->ensure_grad();
                lv->grad[i] += gi * real(0.5) * std::exp(real(0.5) * lv->value[i]) * (*eps)[i];
            }
        }
    });
}

Tensor bernoulli_log_likelihood(const Tensor& obs, const BernoulliFactors& factors) {
    if (obs.shape() != factors.probs.shape())
        throw ShapeError("bernoulli_log_likelihood: pixel count mismatch");
    auto [B, P] = rows_cols(obs);
    auto out = make_row_output(B);
    auto ob = obs.node();
    auto pr = factors.probs.node();
    const real lo = kBernoulliClamp, hi = real(1) - kBernoulliClamp;
    for (std::size_t b = 0; b < B; ++b) {
        real acc = 0;
        for (std::size_t j = 0; j < P; ++j) {
            const std::size_t i = b * P + j;
            const real p = std::min(hi, std::max(lo, pr->value[i]));
            const real o = ob->value[i];
            acc += o * std::log(p) + (real(1) - o) * std::log(real(1) - p);
        }
        out->value[b] = acc;
    }
    auto on = out;
    return finish(out, {ob, pr}, [ob, pr, on, B, P, lo, hi] {
        if (!pr->requires_grad) return;
        pr->ensure_grad();
        for (std::size_t b = 0; b < B; ++b) {
            const real g = on->grad[b];
            if (g == 0) continue;
            for (std::size_t j = 0; j < P; ++j) {
                const std::size_t i = b * P + j;
                const real raw = pr->value[i];
                if (raw <= lo || raw >= hi) continue;  // clamp region: zero slope
                const real o = ob->value[i];
                pr->grad[i] += g * (o / raw - (real(1) - o) / (real(1) - raw));
            }
        }
    });
}

Tensor categorical_kl(const CategoricalDist& q, const CategoricalDist& p) {
    if (q.probs.shape() != p.probs.shape())
        throw ShapeError("categorical_kl: support mismatch");
    auto [B, A] = rows_cols(q.probs);
    auto out = make_row_output(B);
    auto qn = q.probs.node();
    auto pn = p.probs.node();
    for (std::size_t b = 0; b < B; ++b) {
        real acc = 0;
        for (std::size_t a = 0; a < A; ++a) {
            const std::size_t i = b * A + a;
            const real qa = qn->value[i];
            if (qa <= 0) continue;  // 0 * ln 0 = 0
            const real pa = pn->value[i];
            if (pa <= 0) {
                acc = std::numeric_limits<real>::infinity();
                break;
            }
            acc += qa * (std::log(qa) - std::log(pa));
        }
        out->value[b] = acc;
    }
    auto on = out;
    return finish(out, {qn, pn}, [qn, pn, on, B, A] {
        for (std::size_t b = 0; b < B; ++b) {
            const real g = on->grad[b];
            if (g == 0 || !std::isfinite(on->value[b])) continue;
            for (std::size_t a = 0; a < A; ++a) {
                const std::size_t i = b * A + a;
                const real qa = qn->value[i];
                if (qa <= 0) continue;
                const real pa = pn->value[i];
                if (qn->requires_grad) {
                    qn->ensure_grad();
                    qn->grad[i] += g * (std::log(qa) - std::log(pa) + real(1));
                }
                if (pn->requires_grad) {
                    pn->ensure_grad();
                    pn->grad[i] -= g * qa / pa;
                }
            }
        }
    });
}

CategoricalDist precision_softmax(const Tensor& values, real zeta, bool negate) {
    if (zeta < 0) throw ContractError("precision_softmax: zeta must be >= 0");
    const real sign = negate ? -zeta : zeta;
    return CategoricalDist{softmax_lastdim(scale(values, sign))};
}

real categorical_entropy(const std::vector<real>& probs) {
    real h = 0;
    for (real p : probs)
        if (p > 0) h -= p * std::log(p);
    return h;
}

}  // namespace fewb::dist
