#include "hermite/optim.hpp"

#include <cmath>

#include "hermite/common.hpp"
#include "hermite/kernels.hpp"

namespace hermite::opt {

Kind kind_from_string(const std::string& name) {
    if (name == "sgd") return Kind::sgd;
    if (name == "sgd_momentum") return Kind::sgd_momentum;
    if (name == "adam") return Kind::adam;
    throw ConfigError("unknown optimizer '" + name + "'");
}

std::string to_string(Kind k) {
    switch (k) {
    case Kind::sgd: return "sgd";
    case Kind::sgd_momentum: return "sgd_momentum";
    case Kind::adam: return "adam";
    }
    return "?";
}

void Optimizer::step(const std::vector<ad::Var>& params) {
    if (cfg_.lr <= 0.0) throw std::invalid_argument("optimizer: learning rate must be positive");
    if (m_.empty() && cfg_.kind != Kind::sgd) {
        m_.reserve(params.size());
        v_.reserve(params.size());
        for (const auto& p : params) {
            m_.emplace_back(p->value.shape());
            v_.emplace_back(p->value.shape());
        }
    }
    if (cfg_.kind != Kind::sgd && m_.size() != params.size())
        throw std::invalid_argument("optimizer: parameter list changed between steps");

    ++t_;
    for (std::size_t idx = 0; idx < params.size(); ++idx) {
        const auto& p = params[idx];
        if (!p->requires_grad) continue;
        const std::size_t n = p->value.numel();
        const double* g = p->grad.data();
        if (!kernels::all_finite(n, g))
            throw NumericError("optimizer: non-finite gradient for parameter " +
                               std::to_string(idx));
        double* w = p->value.data();
        switch (cfg_.kind) {
        case Kind::sgd:
            kernels::axpy(n, -cfg_.lr, g, w);
            break;
        case Kind::sgd_momentum: {
            double* mom = m_[idx].data();
            kernels::for_each_index(n, [&](std::size_t i) {
                mom[i] = cfg_.momentum * mom[i] + g[i];
                w[i] -= cfg_.lr * mom[i];
            });
            break;
        }
        case Kind::adam: {
            double* m = m_[idx].data();
            double* v = v_[idx].data();
            const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
            const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
            kernels::for_each_index(n, [&](std::size_t i) {
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
                const double mhat = m[i] / bc1;
                const double vhat = v[i] / bc2;
                w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            });
            break;
        }
        }
    }
}

void Optimizer::reset() {
    t_ = 0;
    for (auto& m : m_) m.fill(0.0);
    for (auto& v : v_) v.fill(0.0);
}

} // namespace hermite::opt
