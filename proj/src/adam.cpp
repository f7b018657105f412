#include "naim/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace naim {

AdamState make_adam(const AdamConfig& cfg, const std::vector<Tensor*>& params) {
    if (cfg.lr <= 0.0 || cfg.eps <= 0.0) throw std::invalid_argument("make_adam: bad hyperparameters");
    AdamState st;
    st.cfg = cfg;
    for (const Tensor* p : params) {
        st.m.emplace_back(p->shape, 0.0);
        st.v.emplace_back(p->shape, 0.0);
    }
    return st;
}

void adam_step(AdamState& st, const std::vector<Tensor*>& params,
               const std::vector<const Tensor*>& grads) {
    if (params.size() != st.m.size() || grads.size() != params.size())
        throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
    st.t += 1;
    const AdamConfig& c = st.cfg;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(st.t));
    for (size_t k = 0; k < params.size(); ++k) {
        Tensor& p = *params[k];
        const Tensor& g = *grads[k];
        if (!p.same_shape(g) || !p.same_shape(st.m[k]))
            throw std::invalid_argument("adam_step: shape mismatch at parameter " + std::to_string(k));
        Tensor& m = st.m[k];
        Tensor& v = st.v[k];
        for (int64_t i = 0; i < p.size(); ++i) {
            if (c.weight_decay != 0.0) p.v[i] -= c.lr * c.weight_decay * p.v[i];
            m.v[i] = c.beta1 * m.v[i] + (1.0 - c.beta1) * g.v[i];
            v.v[i] = c.beta2 * v.v[i] + (1.0 - c.beta2) * g.v[i] * g.v[i];
            const double mhat = m.v[i] / bc1;
            const double vhat = v.v[i] / bc2;
            p.v[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
        }
    }
}

std::vector<Tensor> finite_diff_grad(const std::function<double()>& f,
                                     const std::vector<Tensor*>& params, double step) {
    if (step <= 0.0) throw std::invalid_argument("finite_diff_grad: step must be positive");
    std::vector<Tensor> grads;
    for (Tensor* p : params) {
        Tensor g(p->shape, 0.0);
        for (int64_t i = 0; i < p->size(); ++i) {
            const double saved = p->v[i];
            p->v[i] = saved + step;
            const double fp = f();
            p->v[i] = saved - step;
            const double fm = f();
            p->v[i] = saved;
            g.v[i] = (fp - fm) / (2.0 * step);
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

}  // namespace naim
