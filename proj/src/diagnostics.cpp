#include "hermite/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "hermite/common.hpp"
#include "hermite/hermite.hpp"
#include "hermite/kernels.hpp"
#include "hermite/rng.hpp"

namespace hermite::diag {

namespace {

std::vector<double> flatten_params(const std::vector<ad::Var>& params, bool grads) {
    std::vector<double> flat;
    for (const auto& p : params) {
        const Tensor& t = grads ? p->grad : p->value;
        flat.insert(flat.end(), t.data(), t.data() + t.numel());
    }
    return flat;
}

void write_params(const std::vector<ad::Var>& params, const std::vector<double>& flat) {
    std::size_t pos = 0;
    for (const auto& p : params) {
        for (std::size_t i = 0; i < p->value.numel(); ++i) p->value[i] = flat[pos++];
    }
}

double l2_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

double vector_p_norm(const double* v, std::size_t n, double p) {
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    }
    if (p == 1.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(v[i]);
        return s;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::pow(std::abs(v[i]), p);
    return std::pow(s, 1.0 / p);
}

} // namespace

LandscapeProbe loss_along_gradient(nn::Model& model, const Tensor& features,
                                   const Tensor& targets_onehot,
                                   const std::vector<double>& eta_grid) {
    if (eta_grid.empty()) throw std::invalid_argument("loss_along_gradient: empty eta grid");
    auto params = model.params();
    const auto state_snapshot = model.snapshot();

    // gradient at the current weights
    ad::zero_grad(params);
    {
        auto x = ad::leaf(features);
        auto targets = ad::leaf(targets_onehot);
        auto loss = ad::softmax_cross_entropy(model.forward(x, true), targets);
        ad::backward(loss);
    }
    const std::vector<double> w0 = flatten_params(params, false);
    const std::vector<double> g0 = flatten_params(params, true);
    model.restore(state_snapshot); // forward above may have touched running stats

    LandscapeProbe probe;
    probe.eta_grid = eta_grid;
    probe.losses.reserve(eta_grid.size());
    std::vector<double> shifted(w0.size());
    for (double eta : eta_grid) {
        for (std::size_t i = 0; i < w0.size(); ++i) shifted[i] = w0[i] - eta * g0[i];
        write_params(params, shifted);
        double loss_value = std::numeric_limits<double>::infinity();
        try {
            auto x = ad::leaf(features);
            auto targets = ad::leaf(targets_onehot);
            auto loss = ad::softmax_cross_entropy(model.forward(x, true), targets);
            loss_value = loss->value.value();
        } catch (const NumericError&) {
            // blowup at this step size is data, not an abort
        }
        probe.losses.push_back(loss_value);
        model.restore(state_snapshot);
    }
    ad::zero_grad(params);
    return probe;
}

Trajectory record_sgd_trajectory(nn::Model& model, const data::Dataset& ds, int steps, double lr,
                                 std::size_t batch, std::uint64_t seed) {
    ds.validate();
    if (steps < 1) throw std::invalid_argument("record_sgd_trajectory: need at least one step");
    auto params = model.params();
    const auto state_snapshot = model.snapshot();

    Trajectory traj;
    Rng rng(derive_seed(seed, 0x7aULL));
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::size_t cursor = 0;

    for (int step = 0; step < steps; ++step) {
        std::vector<std::size_t> idx;
        idx.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            idx.push_back(order[cursor]);
            cursor = (cursor + 1) % order.size();
        }
        data::Dataset part = data::subset(ds, idx);
        auto x = ad::leaf(part.features);
        auto targets = ad::leaf(nn::one_hot(part.labels, ds.num_classes));
        auto loss = ad::softmax_cross_entropy(model.forward(x, true), targets);
        ad::zero_grad(params);
        ad::backward(loss);
        traj.weights.push_back(flatten_params(params, false));
        traj.grads.push_back(flatten_params(params, true));
        for (const auto& p : params)
            kernels::axpy(p->value.numel(), -lr, p->grad.data(), p->value.data());
    }
    model.restore(state_snapshot);
    ad::zero_grad(params);
    return traj;
}

double max_beta_smoothness(const std::vector<std::vector<double>>& weights,
                           const std::vector<std::vector<double>>& grads) {
    if (weights.size() < 2 || weights.size() != grads.size())
        throw std::invalid_argument("max_beta_smoothness: need >= 2 matching snapshots");
    double best = -1.0;
    for (std::size_t t = 0; t + 1 < weights.size(); ++t) {
        const double dw = l2_distance(weights[t + 1], weights[t]);
        if (dw == 0.0) continue;
        const double dg = l2_distance(grads[t + 1], grads[t]);
        best = std::max(best, dg / dw);
    }
    if (best < 0.0)
        throw std::invalid_argument("max_beta_smoothness: every displacement is zero");
    return best;
}

std::vector<double> weight_deviation(const std::vector<std::vector<double>>& weights) {
    if (weights.empty()) throw std::invalid_argument("weight_deviation: need >= 1 snapshot");
    std::vector<double> out;
    out.reserve(weights.size());
    for (const auto& w : weights) out.push_back(l2_distance(w, weights[0]));
    return out;
}

std::vector<double> active_unit_census(nn::Model& model, const Tensor& features, double tau) {
    if (tau < 0.0 || tau >= 1.0)
        throw std::invalid_argument("active_unit_census: tau must be in [0, 1)");
    const std::size_t n = features.rows();
    const std::size_t chunk = 512;
    std::vector<std::vector<std::size_t>> nonzero_counts; // per layer, per unit

    std::size_t done = 0;
    while (done < n) {
        const std::size_t take = std::min(chunk, n - done);
        Tensor part({take, features.cols()});
        for (std::size_t i = 0; i < take; ++i)
            for (std::size_t j = 0; j < features.cols(); ++j)
                part.at(i, j) = features.at(done + i, j);
        std::vector<Tensor> census;
        auto x = ad::leaf(part);
        (void)model.forward(x, false, &census);
        if (nonzero_counts.empty()) nonzero_counts.resize(census.size());
        for (std::size_t layer = 0; layer < census.size(); ++layer) {
            const Tensor& acts = census[layer];
            const std::size_t units = acts.cols();
            auto& counts = nonzero_counts[layer];
            if (counts.empty()) counts.assign(units, 0);
            for (std::size_t i = 0; i < acts.rows(); ++i)
                for (std::size_t j = 0; j < units; ++j)
                    if (std::abs(acts.at(i, j)) > 1e-12) ++counts[j];
        }
        done += take;
    }

    std::vector<double> fractions;
    fractions.reserve(nonzero_counts.size());
    const double needed = tau * static_cast<double>(n);
    for (const auto& counts : nonzero_counts) {
        std::size_t active = 0;
        for (std::size_t c : counts)
            if (static_cast<double>(c) > needed) ++active;
        fractions.push_back(static_cast<double>(active) / static_cast<double>(counts.size()));
    }
    return fractions;
}

Lemma1Result lemma1_bound(const BoundInputs& inputs, const std::vector<double>& x,
                          double c_multiplier) {
    const Tensor& a = inputs.output_weights;
    const Tensor& w = inputs.hidden_weights;
    if (a.rank() != 2 || w.rank() != 2)
        throw std::invalid_argument("lemma1_bound: weights must be matrices");
    const std::size_t num_classes = a.rows(), hidden = a.cols(), dim = w.cols();
    if (w.rows() != hidden)
        throw std::invalid_argument("lemma1_bound: output/hidden unit count mismatch");
    if (x.size() != dim) throw std::invalid_argument("lemma1_bound: input dimension mismatch");
    if (inputs.coeffs.empty()) throw std::invalid_argument("lemma1_bound: empty coefficients");
    const int degree = static_cast<int>(inputs.coeffs.size()) - 1;
    if (degree < 1) throw std::invalid_argument("lemma1_bound: degree must be >= 1");
    const double p = inputs.p_norm;
    if (!(p >= 1.0)) throw std::invalid_argument("lemma1_bound: p must be >= 1");
    const double q = std::isinf(p) ? 1.0 : (p == 1.0 ? std::numeric_limits<double>::infinity()
                                                     : p / (p - 1.0));

    // exact network outputs
    std::vector<double> h(inputs.coeffs.size());
    std::vector<double> sigma(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
        double z = 0.0;
        for (std::size_t d = 0; d < dim; ++d) z += w.at(j, d) * x[d];
        basis::eval_normalized_all(degree, z, h.data());
        double s = 0.0;
        for (std::size_t i = 0; i < inputs.coeffs.size(); ++i) s += inputs.coeffs[i] * h[i];
        sigma[j] = s;
    }
    std::vector<double> outputs(num_classes, 0.0);
    for (std::size_t klass = 0; klass < num_classes; ++klass)
        for (std::size_t j = 0; j < hidden; ++j) outputs[klass] += a.at(klass, j) * sigma[j];

    Lemma1Result res;
    for (std::size_t l = 0; l < num_classes; ++l)
        for (std::size_t m = 0; m < num_classes; ++m)
            res.lhs_max = std::max(res.lhs_max, std::abs(outputs[l] - outputs[m]));

    // alpha = max_{l,k} sum_j |a_lj - a_kj|
    for (std::size_t l = 0; l < num_classes; ++l) {
        for (std::size_t m = 0; m < num_classes; ++m) {
            double s = 0.0;
            for (std::size_t j = 0; j < hidden; ++j) s += std::abs(a.at(l, j) - a.at(m, j));
            res.alpha = std::max(res.alpha, s);
        }
    }

    // beta at the row with the largest p-norm
    double w_norm = 0.0;
    for (std::size_t j = 0; j < hidden; ++j)
        w_norm = std::max(w_norm, vector_p_norm(w.data() + j * dim, dim, p));
    const double x_norm = vector_p_norm(x.data(), x.size(), q);
    const double product = w_norm * x_norm;
    res.beta = std::max(product, std::pow(product, static_cast<double>(degree)));

    // C from the coefficient magnitudes and the polynomial envelope
    // nu_n = ||He_n||_1 / sqrt(n!)
    double max_coeff = 0.0;
    for (double c : inputs.coeffs) max_coeff = std::max(max_coeff, std::abs(c));
    std::vector<double> he_prev{1.0}, he_cur{0.0, 1.0};
    double max_nu = 1.0; // nu_0
    double factorial = 1.0;
    for (int n = 1; n <= degree; ++n) {
        factorial *= n;
        double l1 = 0.0;
        for (double c : he_cur) l1 += std::abs(c);
        max_nu = std::max(max_nu, l1 / std::sqrt(factorial));
        if (n < degree) {
            // He_{n+1} = x He_n - n He_{n-1}
            std::vector<double> next(he_cur.size() + 1, 0.0);
            for (std::size_t i = 0; i < he_cur.size(); ++i) next[i + 1] += he_cur[i];
            for (std::size_t i = 0; i < he_prev.size(); ++i) next[i] -= n * he_prev[i];
            he_prev = he_cur;
            he_cur = next;
        }
    }
    res.constant = c_multiplier * (degree + 1) * max_coeff * max_nu;
    res.bound = res.constant * degree * res.alpha * res.beta;
    return res;
}

Theorem1Result theorem1_required_norm(double w_norm, double alpha, int num_classes,
                                      double epsilon) {
    if (epsilon <= 0.0 || alpha <= 0.0 || w_norm <= 0.0 || num_classes <= 0)
        throw std::domain_error("theorem1_required_norm: inputs must be positive");
    Theorem1Result res;
    const double log_term = std::log(1.0 + num_classes * epsilon);
    if (alpha / log_term <= 1.0) {
        res.vacuous = true;
        res.required_norm = 0.0;
        return res;
    }
    res.required_norm = std::log(alpha / log_term) / w_norm;
    return res;
}

std::vector<double> confidence_profile(nn::Model& model, const std::vector<double>& direction,
                                       const std::vector<double>& radii) {
    if (direction.empty()) throw std::invalid_argument("confidence_profile: empty direction");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] < radii[i - 1])
            throw std::invalid_argument("confidence_profile: radii must be ascending");
    std::vector<double> confidences;
    confidences.reserve(radii.size());
    for (double r : radii) {
        Tensor x({1, direction.size()});
        for (std::size_t d = 0; d < direction.size(); ++d) x.at(0, d) = r * direction[d];
        auto out = model.forward(ad::leaf(x), false);
        const std::size_t k = out->value.cols();
        std::vector<double> probs(k);
        kernels::softmax_rows(1, k, out->value.data(), probs.data());
        double best = 0.0;
        for (double p : probs) best = std::max(best, p);
        confidences.push_back(best);
    }
    return confidences;
}

} // namespace hermite::diag
