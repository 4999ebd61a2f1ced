#ifndef HERMITE_LAYERS_HPP
#define HERMITE_LAYERS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hermite/graph.hpp"
#include "hermite/rng.hpp"

namespace hermite::nn {

enum class ActKind { hermite, relu, elu, selu, sigmoid, softsign_only, identity };

ActKind act_kind_from_string(const std::string& name);
std::string to_string(ActKind k);

struct ActivationChoice {
    ActKind kind = ActKind::relu;
    int degree = 4; // only meaningful for hermite
};

/// ReLU expansion coefficients for a hermite activation of this degree
/// (cached; this is the reinitialization target for every c vector).
const std::vector<double>& relu_init_coefficients(int degree);

class Layer {
public:
    virtual ~Layer() = default;

    /// census, when non-null, receives the post-activation values of layers
    /// that count as unit-census points.
    virtual ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census) = 0;

    virtual void collect_params(std::vector<ad::Var>& out);
    virtual void collect_state(const std::string& prefix,
                               std::vector<std::pair<std::string, Tensor*>>& out);
    virtual void reinit(Rng& rng);
};

class DenseLayer : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out);
    ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census) override;
    void collect_params(std::vector<ad::Var>& out) override;
    void collect_state(const std::string& prefix,
                       std::vector<std::pair<std::string, Tensor*>>& out) override;
    void reinit(Rng& rng) override;

    ad::Var weight, bias;
    std::size_t fan_in, fan_out;
    bool force_identity = false; // test hook: acts as W = I, b = 0
};

class FeatureNormLayer : public Layer {
public:
    explicit FeatureNormLayer(std::size_t dim);
    ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census) override;
    void collect_params(std::vector<ad::Var>& out) override;
    void collect_state(const std::string& prefix,
                       std::vector<std::pair<std::string, Tensor*>>& out) override;
    void reinit(Rng& rng) override;

    ad::Var gamma, beta;
    ad::FeatureNormState state;
    std::size_t dim;
};

class ActivationLayer : public Layer {
public:
    ActivationLayer(ActKind kind, bool census_point);
    ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census) override;

    ActKind kind;
    bool census;
};

class HermiteActLayer : public Layer {
public:
    explicit HermiteActLayer(int degree, bool trainable = true);
    ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census) override;
    void collect_params(std::vector<ad::Var>& out) override;
    void collect_state(const std::string& prefix,
                       std::vector<std::pair<std::string, Tensor*>>& out) override;
    void reinit(Rng& rng) override;

    ad::Var coeffs;
    int degree;
};

/// Pre-activation block: normalize -> activation (-> softsign when the
/// activation is a hermite expansion) -> dense (-> optional second softsign),
/// with an optional residual connection around the whole branch.
class PreactBlock : public Layer {
public:
    PreactBlock(std::size_t width, ActivationChoice act, bool use_norm, bool second_softsign,
                bool residual);
    ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census) override;
    void collect_params(std::vector<ad::Var>& out) override;
    void collect_state(const std::string& prefix,
                       std::vector<std::pair<std::string, Tensor*>>& out) override;
    void reinit(Rng& rng) override;

    std::unique_ptr<FeatureNormLayer> norm;    // null when disabled
    std::unique_ptr<HermiteActLayer> hermite;  // exactly one of these two
    std::unique_ptr<ActivationLayer> baseline; // is the branch activation
    std::unique_ptr<DenseLayer> dense;
    bool second_softsign;
    bool residual;
};

/// Ordered stack of layers with named state for checkpoints and bitwise
/// snapshot/restore.
class Model {
public:
    ad::Var forward(const ad::Var& x, bool training, std::vector<Tensor>* census = nullptr);

    std::vector<ad::Var> params() const;
    std::vector<std::pair<std::string, Tensor*>> named_state();
    std::size_t param_count() const;

    /// Redraw all weights from the init scheme; hermite coefficients return
    /// to the ReLU expansion. Same seed gives bitwise-identical state.
    void reinit(std::uint64_t seed);

    std::vector<Tensor> snapshot() ;
    void restore(const std::vector<Tensor>& snap);

    std::vector<std::unique_ptr<Layer>> layers;
    std::string arch_tag;
};

} // namespace hermite::nn

#endif
