#ifndef HERMITE_GRAPH_HPP
#define HERMITE_GRAPH_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hermite/tensor.hpp"

// Reverse-mode differentiation over dense float64 tensors. A graph is built
// per forward pass; parameter leaves are long-lived and their gradients
// accumulate across backward calls until zero_grad.

namespace hermite::ad {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backprop; // empty for leaves
    const char* op = "leaf";
};

/// New leaf holding `v`. Parameter leaves pass requires_grad = true.
Var leaf(Tensor v, bool requires_grad = false);

/// Scalar activation with its exact derivative, applied elementwise.
struct ScalarFn {
    const char* name;
    double (*f)(double);
    double (*df)(double);
};

Var matmul(const Var& a, const Var& b);

/// Elementwise add; also broadcasts a [D] vector over the rows of [N x D].
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);

Var pointwise(const Var& a, const ScalarFn& fn);

/// sigma(x) = sum_i c_i h_i(x) elementwise, with gradients to both x and the
/// coefficient vector c (grad_c is summed over all elements).
Var hermite_activation(const Var& x, const Var& c);

/// Per-feature normalization state owned by the layer that uses the op.
struct FeatureNormState {
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    explicit FeatureNormState(std::size_t dim = 0)
        : running_mean({dim}), running_var(Tensor::full({dim}, 1.0)) {}
};

/// Batch statistics while training (running averages updated in place),
/// running statistics at eval.
Var feature_normalize(const Var& x, const Var& gamma, const Var& beta, FeatureNormState& state,
                      bool training);

/// Mean over rows of -sum_k t_k log softmax(z)_k. Accepts soft target rows
/// (must sum to 1 within 1e-6); propagates into targets when they are a
/// gradient-requiring leaf.
Var softmax_cross_entropy(const Var& logits, const Var& targets);

/// Mean over rows of the squared-error row sum.
Var mse_row_sum(const Var& pred, const Var& target);

/// Euclidean norm of all entries.
Var l2_norm(const Var& x);

/// Mean Shannon entropy of the rows of a [N x K] probability matrix.
Var entropy_mean_rows(const Var& p);

/// Reverse sweep from a scalar loss; gradients accumulate (+=) into every
/// gradient-requiring node, each node visited exactly once.
void backward(const Var& loss);

void zero_grad(const std::vector<Var>& params);

} // namespace hermite::ad

#endif
