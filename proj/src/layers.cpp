#include "hermite/layers.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "hermite/activations.hpp"
#include "hermite/common.hpp"
#include "hermite/hermite.hpp"

namespace hermite::nn {

ActKind act_kind_from_string(const std::string& name) {
    if (name == "hermite") return ActKind::hermite;
    if (name == "relu") return ActKind::relu;
    if (name == "elu") return ActKind::elu;
    if (name == "selu") return ActKind::selu;
    if (name == "sigmoid") return ActKind::sigmoid;
    if (name == "softsign_only") return ActKind::softsign_only;
    if (name == "identity") return ActKind::identity;
    throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(ActKind k) {
    switch (k) {
    case ActKind::hermite: return "hermite";
    case ActKind::relu: return "relu";
    case ActKind::elu: return "elu";
    case ActKind::selu: return "selu";
    case ActKind::sigmoid: return "sigmoid";
    case ActKind::softsign_only: return "softsign_only";
    case ActKind::identity: return "identity";
    }
    return "?";
}

const std::vector<double>& relu_init_coefficients(int degree) {
    static std::mutex mu;
    static std::map<int, std::vector<double>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(degree);
    if (it == cache.end()) {
        const int order = std::max(64, 2 * degree + 8);
        auto quad = basis::GaussianQuadrature::make(order);
        it = cache.emplace(degree, basis::relu_expansion_coefficients(degree, quad)).first;
    }
    return it->second;
}

void Layer::collect_params(std::vector<ad::Var>&) {}
void Layer::collect_state(const std::string&, std::vector<std::pair<std::string, Tensor*>>&) {}
void Layer::reinit(Rng&) {}

namespace {

const ad::ScalarFn& scalar_fn(ActKind k) {
    switch (k) {
    case ActKind::relu: return act::relu();
    case ActKind::elu: return act::elu();
    case ActKind::selu: return act::selu();
    case ActKind::sigmoid: return act::sigmoid();
    case ActKind::softsign_only: return act::softsign();
    case ActKind::identity: return act::identity();
    case ActKind::hermite: break;
    }
    throw std::invalid_argument("scalar_fn: hermite activations are not a scalar fn");
}

} // namespace

// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : weight(ad::leaf(Tensor({in, out}), true)),
      bias(ad::leaf(Tensor({out}), true)),
      fan_in(in),
      fan_out(out) {
    if (in == 0 || out == 0) throw std::invalid_argument("dense: zero width");
}

ad::Var DenseLayer::forward(const ad::Var& x, bool, std::vector<Tensor>*) {
    return ad::add(ad::matmul(x, weight), bias);
}

void DenseLayer::collect_params(std::vector<ad::Var>& out) {
    out.push_back(weight);
    out.push_back(bias);
}

void DenseLayer::collect_state(const std::string& prefix,
                               std::vector<std::pair<std::string, Tensor*>>& out) {
    out.emplace_back(prefix + ".W", &weight->value);
    out.emplace_back(prefix + ".b", &bias->value);
}

void DenseLayer::reinit(Rng& rng) {
    if (force_identity) {
        weight->value.fill(0.0);
        for (std::size_t i = 0; i < std::min(fan_in, fan_out); ++i)
            weight->value.at(i, i) = 1.0;
        bias->value.fill(0.0);
        return;
    }
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < weight->value.numel(); ++i)
        weight->value[i] = rng.gaussian(0.0, std_dev);
    bias->value.fill(0.0);
}

// ---------------------------------------------------------------------------

FeatureNormLayer::FeatureNormLayer(std::size_t dim)
    : gamma(ad::leaf(Tensor::full({dim}, 1.0), true)),
      beta(ad::leaf(Tensor({dim}), true)),
      state(dim),
      dim(dim) {}

ad::Var FeatureNormLayer::forward(const ad::Var& x, bool training, std::vector<Tensor>*) {
    return ad::feature_normalize(x, gamma, beta, state, training);
}

void FeatureNormLayer::collect_params(std::vector<ad::Var>& out) {
    out.push_back(gamma);
    out.push_back(beta);
}

void FeatureNormLayer::collect_state(const std::string& prefix,
                                     std::vector<std::pair<std::string, Tensor*>>& out) {
    out.emplace_back(prefix + ".gamma", &gamma->value);
    out.emplace_back(prefix + ".beta", &beta->value);
    out.emplace_back(prefix + ".running_mean", &state.running_mean);
    out.emplace_back(prefix + ".running_var", &state.running_var);
}

void FeatureNormLayer::reinit(Rng&) {
    gamma->value.fill(1.0);
    beta->value.fill(0.0);
    state.running_mean.fill(0.0);
    state.running_var.fill(1.0);
}

// ---------------------------------------------------------------------------

ActivationLayer::ActivationLayer(ActKind kind, bool census_point)
    : kind(kind), census(census_point) {
    if (kind == ActKind::hermite)
        throw std::invalid_argument("ActivationLayer: use HermiteActLayer for hermite");
}

ad::Var ActivationLayer::forward(const ad::Var& x, bool, std::vector<Tensor>* census_sink) {
    auto out = ad::pointwise(x, scalar_fn(kind));
    if (census && census_sink) census_sink->push_back(out->value);
    return out;
}

// ---------------------------------------------------------------------------

HermiteActLayer::HermiteActLayer(int degree, bool trainable)
    : coeffs(ad::leaf(Tensor({static_cast<std::size_t>(degree) + 1}), trainable)),
      degree(degree) {
    if (degree < 0) throw std::invalid_argument("hermite activation: degree must be >= 0");
    const auto& init = relu_init_coefficients(degree);
    for (std::size_t i = 0; i < init.size(); ++i) coeffs->value[i] = init[i];
}

ad::Var HermiteActLayer::forward(const ad::Var& x, bool, std::vector<Tensor>* census_sink) {
    auto out = ad::hermite_activation(x, coeffs);
    if (census_sink) census_sink->push_back(out->value);
    return out;
}

void HermiteActLayer::collect_params(std::vector<ad::Var>& out) { out.push_back(coeffs); }

void HermiteActLayer::collect_state(const std::string& prefix,
                                    std::vector<std::pair<std::string, Tensor*>>& out) {
    out.emplace_back(prefix + ".c", &coeffs->value);
}

void HermiteActLayer::reinit(Rng&) {
    const auto& init = relu_init_coefficients(degree);
    for (std::size_t i = 0; i < init.size(); ++i) coeffs->value[i] = init[i];
}

// ---------------------------------------------------------------------------

PreactBlock::PreactBlock(std::size_t width, ActivationChoice act, bool use_norm,
                         bool second_softsign, bool residual)
    : dense(std::make_unique<DenseLayer>(width, width)),
      second_softsign(second_softsign),
      residual(residual) {
    if (use_norm) norm = std::make_unique<FeatureNormLayer>(width);
    if (act.kind == ActKind::hermite)
        hermite = std::make_unique<HermiteActLayer>(act.degree);
    else
        baseline = std::make_unique<ActivationLayer>(act.kind, true);
}

ad::Var PreactBlock::forward(const ad::Var& x, bool training, std::vector<Tensor>* census) {
    ad::Var h = x;
    if (norm) h = norm->forward(h, training, census);
    if (hermite) {
        h = hermite->forward(h, training, census);
        h = ad::pointwise(h, act::softsign());
    } else {
        h = baseline->forward(h, training, census);
    }
    h = dense->forward(h, training, census);
    if (second_softsign) h = ad::pointwise(h, act::softsign());
    return residual ? ad::add(x, h) : h;
}

void PreactBlock::collect_params(std::vector<ad::Var>& out) {
    if (norm) norm->collect_params(out);
    if (hermite) hermite->collect_params(out);
    dense->collect_params(out);
}

void PreactBlock::collect_state(const std::string& prefix,
                                std::vector<std::pair<std::string, Tensor*>>& out) {
    if (norm) norm->collect_state(prefix + ".norm", out);
    if (hermite) hermite->collect_state(prefix + ".act", out);
    dense->collect_state(prefix + ".dense", out);
}

void PreactBlock::reinit(Rng& rng) {
    Rng norm_rng = rng.child(0), act_rng = rng.child(1), dense_rng = rng.child(2);
    if (norm) norm->reinit(norm_rng);
    if (hermite) hermite->reinit(act_rng);
    dense->reinit(dense_rng);
}

// ---------------------------------------------------------------------------

ad::Var Model::forward(const ad::Var& x, bool training, std::vector<Tensor>* census) {
    ad::Var h = x;
    for (auto& layer : layers) h = layer->forward(h, training, census);
    return h;
}

std::vector<ad::Var> Model::params() const {
    std::vector<ad::Var> out;
    for (const auto& layer : layers) layer->collect_params(out);
    return out;
}

std::vector<std::pair<std::string, Tensor*>> Model::named_state() {
    std::vector<std::pair<std::string, Tensor*>> out;
    char buf[16];
    for (std::size_t i = 0; i < layers.size(); ++i) {
        std::snprintf(buf, sizeof buf, "L%02zu", i);
        layers[i]->collect_state(buf, out);
    }
    return out;
}

std::size_t Model::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params()) n += p->value.numel();
    return n;
}

void Model::reinit(std::uint64_t seed) {
    Rng root(seed);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        Rng layer_rng = root.child(i);
        layers[i]->reinit(layer_rng);
    }
}

std::vector<Tensor> Model::snapshot() {
    std::vector<Tensor> snap;
    for (auto& [name, tensor] : named_state()) snap.push_back(*tensor);
    return snap;
}

void Model::restore(const std::vector<Tensor>& snap) {
    auto state = named_state();
    if (snap.size() != state.size())
        throw std::invalid_argument("model restore: snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) *state[i].second = snap[i];
}

} // namespace hermite::nn
