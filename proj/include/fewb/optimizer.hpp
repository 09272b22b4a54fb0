#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fewb/tensor.hpp"

namespace fewb {

struct AdamState {
    std::vector<real> m;  // first moment
    std::vector<real> v;  // second moment
    long step_count = 0;
};

/// A named weight tensor plus its optimizer state. The tensor is a
/// gradient-tracking leaf that outlives any single tape.
struct Parameter {
    std::string name;
    Tensor value;
    AdamState adam;

    Parameter() = default;
    Parameter(std::string n, Tensor t) : name(std::move(n)), value(std::move(t)) {
        adam.m.assign(value.size(), real(0));
        adam.v.assign(value.size(), real(0));
    }
};

struct AdamConfig {
    real lr = real(1e-4);
    real beta1 = real(0.9);
    real beta2 = real(0.999);
    real eps = real(1e-8);
};

/// Standard Adam update with bias correction. Consumes and zeroes the
/// accumulated gradients. Parameters with no accumulated gradient are
/// treated as having gradient zero. Non-finite gradients raise NumericError.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);

struct GradCheckBlock {
    std::string name;
    real max_rel_err = 0;
};

struct GradCheckReport {
    real max_rel_err = 0;
    std::vector<GradCheckBlock> blocks;
    bool passed(real tol) const { return max_rel_err < tol; }
};

/// Compares reverse-mode gradients against central finite differences
/// (step h) for every element of every parameter block. The closure must be
/// deterministic and return a scalar loss.
GradCheckReport gradient_check(const std::function<Tensor()>& model,
                               std::span<Parameter* const> params, real h, real tol);

}  // namespace fewb
