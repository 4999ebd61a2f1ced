#include "hermite/graph.hpp"

#include <cmath>
#include <cstring>
#include <unordered_set>

#include "hermite/common.hpp"
#include "hermite/hermite.hpp"
#include "hermite/kernels.hpp"

namespace hermite::ad {

namespace {

void check_finite(const Tensor& t, const char* op) {
    if (!kernels::all_finite(t.numel(), t.data()))
        throw NumericError(std::string(op) + ": non-finite value in result");
}

Var make_op(Tensor value, std::vector<Var> parents, const char* op,
            std::function<void(Node&)> backprop) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->op = op;
    check_finite(node->value, op);
    node->requires_grad = false;
    for (const auto& p : parents) node->requires_grad = node->requires_grad || p->requires_grad;
    if (node->requires_grad) {
        node->parents = std::move(parents);
        node->backprop = std::move(backprop);
        node->grad = Tensor(node->value.shape());
    }
    return node;
}

void require_matrix(const Var& v, const char* op) {
    if (v->value.rank() != 2)
        throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got shape " +
                                    v->value.shape_string());
}

} // namespace

Var leaf(Tensor v, bool requires_grad) {
    auto node = std::make_shared<Node>();
    node->grad = Tensor(v.shape());
    node->value = std::move(v);
    node->requires_grad = requires_grad;
    return node;
}

Var matmul(const Var& a, const Var& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    const std::size_t m = a->value.rows(), k = a->value.cols(), n = b->value.cols();
    if (b->value.rows() != k)
        throw std::invalid_argument("matmul: inner dimensions disagree: " +
                                    a->value.shape_string() + " x " + b->value.shape_string());
    Tensor out({m, n});
    kernels::matmul_nn(m, k, n, a->value.data(), b->value.data(), out.data());
    return make_op(std::move(out), {a, b}, "matmul", [m, k, n](Node& node) {
        const Var& a = node.parents[0];
        const Var& b = node.parents[1];
        if (a->requires_grad) {
            Tensor da({m, k});
            kernels::matmul_nt(m, k, n, node.grad.data(), b->value.data(), da.data());
            kernels::axpy(da.numel(), 1.0, da.data(), a->grad.data());
        }
        if (b->requires_grad) {
            Tensor db({k, n});
            kernels::matmul_tn(m, k, n, a->value.data(), node.grad.data(), db.data());
            kernels::axpy(db.numel(), 1.0, db.data(), b->grad.data());
        }
    });
}

namespace {

bool row_broadcastable(const Tensor& a, const Tensor& b) {
    return a.rank() == 2 && b.rank() == 1 && a.cols() == b.dim(0);
}

} // namespace

Var add(const Var& a, const Var& b) {
    if (a->value.same_shape(b->value)) {
        Tensor out(a->value.shape());
        kernels::ewise_add(out.numel(), a->value.data(), b->value.data(), out.data());
        return make_op(std::move(out), {a, b}, "add", [](Node& node) {
            for (int which = 0; which < 2; ++which) {
                const Var& p = node.parents[which];
                if (p->requires_grad)
                    kernels::axpy(node.grad.numel(), 1.0, node.grad.data(), p->grad.data());
            }
        });
    }
    if (row_broadcastable(a->value, b->value)) {
        const std::size_t rows = a->value.rows(), cols = a->value.cols();
        Tensor out = a->value;
        kernels::add_row_vector(rows, cols, out.data(), b->value.data());
        return make_op(std::move(out), {a, b}, "add", [rows, cols](Node& node) {
            const Var& a = node.parents[0];
            const Var& b = node.parents[1];
            if (a->requires_grad)
                kernels::axpy(node.grad.numel(), 1.0, node.grad.data(), a->grad.data());
            if (b->requires_grad) {
                Tensor colsums({cols});
                kernels::col_sum(rows, cols, node.grad.data(), colsums.data());
                kernels::axpy(cols, 1.0, colsums.data(), b->grad.data());
            }
        });
    }
    throw std::invalid_argument("add: incompatible shapes " + a->value.shape_string() + " and " +
                                b->value.shape_string());
}

Var sub(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value))
        throw std::invalid_argument("sub: incompatible shapes " + a->value.shape_string() +
                                    " and " + b->value.shape_string());
    Tensor out(a->value.shape());
    kernels::ewise_sub(out.numel(), a->value.data(), b->value.data(), out.data());
    return make_op(std::move(out), {a, b}, "sub", [](Node& node) {
        const Var& a = node.parents[0];
        const Var& b = node.parents[1];
        if (a->requires_grad)
            kernels::axpy(node.grad.numel(), 1.0, node.grad.data(), a->grad.data());
        if (b->requires_grad)
            kernels::axpy(node.grad.numel(), -1.0, node.grad.data(), b->grad.data());
    });
}

Var mul(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value))
        throw std::invalid_argument("mul: incompatible shapes " + a->value.shape_string() +
                                    " and " + b->value.shape_string());
    Tensor out(a->value.shape());
    kernels::ewise_mul(out.numel(), a->value.data(), b->value.data(), out.data());
    return make_op(std::move(out), {a, b}, "mul", [](Node& node) {
        const Var& a = node.parents[0];
        const Var& b = node.parents[1];
        const std::size_t n = node.grad.numel();
        if (a->requires_grad) {
            Tensor tmp(node.grad.shape());
            kernels::ewise_mul(n, node.grad.data(), b->value.data(), tmp.data());
            kernels::axpy(n, 1.0, tmp.data(), a->grad.data());
        }
        if (b->requires_grad) {
            Tensor tmp(node.grad.shape());
            kernels::ewise_mul(n, node.grad.data(), a->value.data(), tmp.data());
            kernels::axpy(n, 1.0, tmp.data(), b->grad.data());
        }
    });
}

Var scale(const Var& a, double s) {
    Tensor out = a->value;
    kernels::scale(out.numel(), s, out.data());
    return make_op(std::move(out), {a}, "scale", [s](Node& node) {
        const Var& a = node.parents[0];
        if (a->requires_grad) kernels::axpy(node.grad.numel(), s, node.grad.data(), a->grad.data());
    });
}

Var pointwise(const Var& a, const ScalarFn& fn) {
    Tensor out(a->value.shape());
    const double* in = a->value.data();
    double* o = out.data();
    auto f = fn.f;
    kernels::for_each_index(out.numel(), [&](std::size_t i) { o[i] = f(in[i]); });
    return make_op(std::move(out), {a}, fn.name, [fn](Node& node) {
        const Var& a = node.parents[0];
        if (!a->requires_grad) return;
        const std::size_t n = node.grad.numel();
        const double* in = a->value.data();
        const double* up = node.grad.data();
        double* g = a->grad.data();
        auto df = fn.df;
        kernels::for_each_index(n, [&](std::size_t i) { g[i] += up[i] * df(in[i]); });
    });
}

Var hermite_activation(const Var& x, const Var& c) {
    if (c->value.rank() != 1 || c->value.numel() == 0)
        throw std::invalid_argument("hermite_activation: coefficients must be a nonempty vector");
    const int degree = static_cast<int>(c->value.numel()) - 1;
    const std::size_t n = x->value.numel();

    // Cache h_0..h_d at every element for the backward pass.
    auto hcache = std::make_shared<std::vector<double>>(n * (degree + 1));
    Tensor out(x->value.shape());
    {
        const double* xs = x->value.data();
        const double* cs = c->value.data();
        double* os = out.data();
        double* hc = hcache->data();
        kernels::for_each_index(n, [&](std::size_t i) {
            double* h = hc + i * (degree + 1);
            basis::eval_normalized_all(degree, xs[i], h);
            double acc = 0.0;
            for (int k = 0; k <= degree; ++k) acc += cs[k] * h[k];
            os[i] = acc;
        });
    }

    return make_op(std::move(out), {x, c}, "hermite_activation", [hcache, degree, n](Node& node) {
        const Var& x = node.parents[0];
        const Var& c = node.parents[1];
        const double* up = node.grad.data();
        const double* hc = hcache->data();
        const int width = degree + 1;
        if (x->requires_grad) {
            const double* cs = c->value.data();
            double* gx = x->grad.data();
            kernels::for_each_index(n, [&](std::size_t i) {
                const double* h = hc + i * width;
                double acc = 0.0;
                for (int k = 1; k <= degree; ++k)
                    acc += cs[k] * std::sqrt(static_cast<double>(k)) * h[k - 1];
                gx[i] += up[i] * acc;
            });
        }
        if (c->requires_grad) {
            // grad_c[k] = sum_i up_i h_k(x_i); fixed-block reduction keeps the
            // sum order independent of thread count.
            double* gc = c->grad.data();
            const std::size_t nblocks = (n + kernels::kReduceBlock - 1) / kernels::kReduceBlock;
            std::vector<double> partials(nblocks);
            for (int k = 0; k <= degree; ++k) {
                kernels::for_each_index(nblocks, [&](std::size_t b) {
                    const std::size_t lo = b * kernels::kReduceBlock;
                    const std::size_t hi = std::min(n, lo + kernels::kReduceBlock);
                    double s = 0.0;
                    for (std::size_t i = lo; i < hi; ++i) s += up[i] * hc[i * width + k];
                    partials[b] = s;
                });
                double total = 0.0;
                for (double p : partials) total += p;
                gc[k] += total;
            }
        }
    });
}

Var feature_normalize(const Var& x, const Var& gamma, const Var& beta, FeatureNormState& state,
                      bool training) {
    require_matrix(x, "feature_normalize");
    const std::size_t rows = x->value.rows(), cols = x->value.cols();
    if (gamma->value.numel() != cols || beta->value.numel() != cols ||
        state.running_mean.numel() != cols)
        throw std::invalid_argument("feature_normalize: scale/shift width mismatch");
    if (rows == 0) throw std::invalid_argument("feature_normalize: empty batch");

    auto mean = std::make_shared<Tensor>(Tensor({cols}));
    auto inv_std = std::make_shared<Tensor>(Tensor({cols}));
    auto xhat = std::make_shared<Tensor>(Tensor({rows, cols}));

    const double* xd = x->value.data();
    if (training) {
        kernels::col_sum(rows, cols, xd, mean->data());
        kernels::scale(cols, 1.0 / static_cast<double>(rows), mean->data());
        // biased variance over the batch
        Tensor var({cols});
        for (std::size_t j = 0; j < cols; ++j) {
            double acc = 0.0;
            const double mu = (*mean)[j];
            for (std::size_t i = 0; i < rows; ++i) {
                const double d = xd[i * cols + j] - mu;
                acc += d * d;
            }
            var[j] = acc / static_cast<double>(rows);
            (*inv_std)[j] = 1.0 / std::sqrt(var[j] + state.eps);
        }
        const double m = state.momentum;
        for (std::size_t j = 0; j < cols; ++j) {
            state.running_mean[j] = m * state.running_mean[j] + (1.0 - m) * (*mean)[j];
            state.running_var[j] = m * state.running_var[j] + (1.0 - m) * var[j];
        }
    } else {
        for (std::size_t j = 0; j < cols; ++j) {
            (*mean)[j] = state.running_mean[j];
            (*inv_std)[j] = 1.0 / std::sqrt(state.running_var[j] + state.eps);
        }
    }

    Tensor out({rows, cols});
    {
        double* od = out.data();
        double* xh = xhat->data();
        const double* g = gamma->value.data();
        const double* b = beta->value.data();
        kernels::for_each_index(rows, [&](std::size_t i) {
            for (std::size_t j = 0; j < cols; ++j) {
                const double h = (xd[i * cols + j] - (*mean)[j]) * (*inv_std)[j];
                xh[i * cols + j] = h;
                od[i * cols + j] = g[j] * h + b[j];
            }
        });
    }

    return make_op(std::move(out), {x, gamma, beta}, "feature_normalize",
                   [mean, inv_std, xhat, rows, cols, training](Node& node) {
                       const Var& x = node.parents[0];
                       const Var& gamma = node.parents[1];
                       const Var& beta = node.parents[2];
                       const double* up = node.grad.data();
                       const double* xh = xhat->data();

                       if (gamma->requires_grad) {
                           for (std::size_t j = 0; j < cols; ++j) {
                               double acc = 0.0;
                               for (std::size_t i = 0; i < rows; ++i)
                                   acc += up[i * cols + j] * xh[i * cols + j];
                               gamma->grad[j] += acc;
                           }
                       }
                       if (beta->requires_grad) {
                           Tensor colsums({cols});
                           kernels::col_sum(rows, cols, up, colsums.data());
                           kernels::axpy(cols, 1.0, colsums.data(), beta->grad.data());
                       }
                       if (!x->requires_grad) return;

                       const double* g = gamma->value.data();
                       double* gx = x->grad.data();
                       if (!training) {
                           // running statistics are constants
                           kernels::for_each_index(rows, [&](std::size_t i) {
                               for (std::size_t j = 0; j < cols; ++j)
                                   gx[i * cols + j] += up[i * cols + j] * g[j] * (*inv_std)[j];
                           });
                           return;
                       }
                       // backward through the batch statistics
                       std::vector<double> sum_dy(cols, 0.0), sum_dy_xhat(cols, 0.0);
                       for (std::size_t i = 0; i < rows; ++i) {
                           for (std::size_t j = 0; j < cols; ++j) {
                               const double dy = up[i * cols + j] * g[j];
                               sum_dy[j] += dy;
                               sum_dy_xhat[j] += dy * xh[i * cols + j];
                           }
                       }
                       const double invn = 1.0 / static_cast<double>(rows);
                       kernels::for_each_index(rows, [&](std::size_t i) {
                           for (std::size_t j = 0; j < cols; ++j) {
                               const double dy = up[i * cols + j] * g[j];
                               gx[i * cols + j] +=
                                   (*inv_std)[j] * (dy - invn * sum_dy[j] -
                                                    xh[i * cols + j] * invn * sum_dy_xhat[j]);
                           }
                       });
                   });
}

Var softmax_cross_entropy(const Var& logits, const Var& targets) {
    require_matrix(logits, "softmax_cross_entropy");
    require_matrix(targets, "softmax_cross_entropy");
    if (!logits->value.same_shape(targets->value))
        throw std::invalid_argument("softmax_cross_entropy: logits/targets shape mismatch");
    const std::size_t rows = logits->value.rows(), cols = logits->value.cols();
    if (rows == 0) throw std::invalid_argument("softmax_cross_entropy: empty batch");
    for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols; ++j) s += targets->value.at(i, j);
        if (std::abs(s - 1.0) > 1e-6)
            throw std::invalid_argument("softmax_cross_entropy: target row " + std::to_string(i) +
                                        " does not sum to 1");
    }

    auto logsm = std::make_shared<Tensor>(Tensor({rows, cols}));
    kernels::log_softmax_rows(rows, cols, logits->value.data(), logsm->data());

    double loss = 0.0;
    {
        const double* t = targets->value.data();
        const double* l = logsm->data();
        loss = -kernels::reduce_dot(rows * cols, t, l) / static_cast<double>(rows);
    }

    return make_op(Tensor::scalar(loss), {logits, targets}, "softmax_cross_entropy",
                   [logsm, rows, cols](Node& node) {
                       const Var& logits = node.parents[0];
                       const Var& targets = node.parents[1];
                       const double up = node.grad.value() / static_cast<double>(rows);
                       if (logits->requires_grad) {
                           // d/dz = softmax(z) - t, row-wise
                           Tensor sm({rows, cols});
                           const double* l = logsm->data();
                           double* s = sm.data();
                           kernels::for_each_index(rows * cols,
                                                   [&](std::size_t i) { s[i] = std::exp(l[i]); });
                           const double* t = targets->value.data();
                           double* g = logits->grad.data();
                           kernels::for_each_index(rows * cols, [&](std::size_t i) {
                               g[i] += up * (s[i] - t[i]);
                           });
                       }
                       if (targets->requires_grad) {
                           const double* l = logsm->data();
                           double* g = targets->grad.data();
                           kernels::for_each_index(rows * cols,
                                                   [&](std::size_t i) { g[i] += -up * l[i]; });
                       }
                   });
}

Var mse_row_sum(const Var& pred, const Var& target) {
    require_matrix(pred, "mse_row_sum");
    if (!pred->value.same_shape(target->value))
        throw std::invalid_argument("mse_row_sum: shape mismatch");
    const std::size_t rows = pred->value.rows();
    const std::size_t n = pred->value.numel();
    Tensor diff(pred->value.shape());
    kernels::ewise_sub(n, pred->value.data(), target->value.data(), diff.data());
    const double loss = kernels::reduce_sumsq(n, diff.data()) / static_cast<double>(rows);
    auto diff_keep = std::make_shared<Tensor>(std::move(diff));
    return make_op(Tensor::scalar(loss), {pred, target}, "mse_row_sum",
                   [diff_keep, rows, n](Node& node) {
                       const double up = 2.0 * node.grad.value() / static_cast<double>(rows);
                       const double* d = diff_keep->data();
                       const Var& pred = node.parents[0];
                       const Var& target = node.parents[1];
                       if (pred->requires_grad) {
                           double* g = pred->grad.data();
                           kernels::for_each_index(n, [&](std::size_t i) { g[i] += up * d[i]; });
                       }
                       if (target->requires_grad) {
                           double* g = target->grad.data();
                           kernels::for_each_index(n, [&](std::size_t i) { g[i] -= up * d[i]; });
                       }
                   });
}

Var l2_norm(const Var& x) {
    const std::size_t n = x->value.numel();
    const double norm = std::sqrt(kernels::reduce_sumsq(n, x->value.data()));
    return make_op(Tensor::scalar(norm), {x}, "l2_norm", [n, norm](Node& node) {
        const Var& x = node.parents[0];
        if (!x->requires_grad) return;
        const double up = node.grad.value();
        const double inv = norm > 0.0 ? 1.0 / norm : 0.0;
        const double* v = x->value.data();
        double* g = x->grad.data();
        kernels::for_each_index(n, [&](std::size_t i) { g[i] += up * inv * v[i]; });
    });
}

Var entropy_mean_rows(const Var& p) {
    require_matrix(p, "entropy_mean_rows");
    const std::size_t rows = p->value.rows();
    const std::size_t n = p->value.numel();
    if (rows == 0) throw std::invalid_argument("entropy_mean_rows: empty matrix");
    const double* v = p->value.data();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (v[i] > 0.0) acc -= v[i] * std::log(v[i]);
    const double h = acc / static_cast<double>(rows);
    return make_op(Tensor::scalar(h), {p}, "entropy_mean_rows", [rows, n](Node& node) {
        const Var& p = node.parents[0];
        if (!p->requires_grad) return;
        const double up = node.grad.value() / static_cast<double>(rows);
        const double* v = p->value.data();
        double* g = p->grad.data();
        // The exact slope -log p - 1 diverges at the simplex boundary, which
        // would pin one-hot rows in place no matter how strong the opposing
        // signal is. Clamping the log at 1e-3 keeps the boundary slope finite
        // while leaving interior entries (> 1e-3) untouched.
        kernels::for_each_index(n, [&](std::size_t i) {
            const double clamped = v[i] > 1e-3 ? v[i] : 1e-3;
            g[i] += up * (-std::log(clamped) - 1.0);
        });
    });
}

void backward(const Var& loss) {
    if (!loss) throw std::invalid_argument("backward: null node");
    if (loss->value.numel() != 1)
        throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                    loss->value.shape_string());
    if (!loss->requires_grad) return;

    // iterative post-order DFS; each node enters the order exactly once
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.get(), 0);
    seen.insert(loss.get());
    while (!stack.empty()) {
        auto& [node, next_child] = stack.back();
        if (next_child < node->parents.size()) {
            Node* child = node->parents[next_child].get();
            ++next_child;
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    // Interior (op) grads are per-sweep scratch; only leaves accumulate
    // across backward calls.
    for (Node* node : order)
        if (node->backprop) node->grad.fill(0.0);

    loss->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backprop) node->backprop(*node);
    }
}

void zero_grad(const std::vector<Var>& params) {
    for (const auto& p : params) p->grad.fill(0.0);
}

} // namespace hermite::ad
