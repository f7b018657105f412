#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "naim/tensor.hpp"

namespace naim {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled: applied to params before the Adam delta
};

struct AdamState {
    AdamConfig cfg;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    int64_t t = 0;
};

// Moment buffers are allocated to mirror the given parameter shapes.
AdamState make_adam(const AdamConfig& cfg, const std::vector<Tensor*>& params);

// One update in place: params[i] <- params[i]*(1 - lr*wd) - lr*m_hat/(sqrt(v_hat)+eps).
void adam_step(AdamState& st, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads);

// Central-difference gradient of a scalar function of the given parameters.
// f is re-evaluated with each coordinate perturbed by +/-step; params are
// restored bit-exactly afterwards.
std::vector<Tensor> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<Tensor*>& params, double step);

}  // namespace naim
