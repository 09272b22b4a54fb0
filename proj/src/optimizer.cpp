#include "fewb/optimizer.hpp"

#include <cmath>

namespace fewb {

void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
    for (Parameter* p : params) {
        auto& val = p->value.values();
        auto node = p->value.node();
        node->ensure_grad();
        auto& g = node->grad;
        for (real gv : g)
            if (!std::isfinite(gv))
                throw NumericError("non-finite gradient in adam_step for " + p->name);
        auto& st = p->adam;
        st.step_count += 1;
        const real bc1 = real(1) - std::pow(cfg.beta1, static_cast<real>(st.step_count));
        const real bc2 = real(1) - std::pow(cfg.beta2, static_cast<real>(st.step_count));
        for (std::size_t i = 0; i < val.size(); ++i) {
            st.m[i] = cfg.beta1 * st.m[i] + (real(1) - cfg.beta1) * g[i];
            st.v[i] = cfg.beta2 * st.v[i] + (real(1) - cfg.beta2) * g[i] * g[i];
            const real mhat = st.m[i] / bc1;
            const real vhat = st.v[i] / bc2;
            val[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        p->value.zero_grad();
    }
}

GradCheckReport gradient_check(const std::function<Tensor()>& model,
                               std::span<Parameter* const> params, real h, real tol) {
    (void)tol;
    // Reverse-mode gradients.
    for (Parameter* p : params) p->value.zero_grad();
    {
        Tape tape;
        Tensor loss = model();
        tape.backward(loss);
    }
    std::vector<std::vector<real>> ad;
    ad.reserve(params.size());
    for (Parameter* p : params) {
        p->value.node()->ensure_grad();
        ad.push_back(p->value.grad());
    }

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Parameter* p = params[pi];
        GradCheckBlock block{p->name, 0};
        auto& val = p->value.values();
        for (std::size_t i = 0; i < val.size(); ++i) {
            const real orig = val[i];
            val[i] = orig + h;
            const real up = model().item();
            val[i] = orig - h;
            const real down = model().item();
            val[i] = orig;
            const real fd = (up - down) / (real(2) * h);
            const real a = ad[pi][i];
            const real denom = std::max({real(1e-6), std::abs(a), std::abs(fd)});
            block.max_rel_err = std::max(block.max_rel_err, std::abs(a - fd) / denom);
        }
        report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
        report.blocks.push_back(std::move(block));
    }
    for (Parameter* p : params) p->value.zero_grad();
    return report;
}

}  // namespace fewb
