#ifndef HERMITE_OPTIM_HPP
#define HERMITE_OPTIM_HPP

#include <string>
#include <vector>

#include "hermite/graph.hpp"

namespace hermite::opt {

enum class Kind { sgd, sgd_momentum, adam };

Kind kind_from_string(const std::string& name);
std::string to_string(Kind k);

struct OptimizerConfig {
    Kind kind = Kind::sgd;
    double lr = 0.1;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First-order updates over a fixed parameter list. Moment buffers are keyed
/// by position, so the same Optimizer must always be stepped with the same
/// parameter vector; reset() zeroes the buffers (used on reinitialization).
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

    const OptimizerConfig& config() const { return cfg_; }

    void step(const std::vector<ad::Var>& params);
    void reset();

private:
    OptimizerConfig cfg_;
    long long t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

} // namespace hermite::opt

#endif
