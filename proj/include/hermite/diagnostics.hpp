#ifndef HERMITE_DIAGNOSTICS_HPP
#define HERMITE_DIAGNOSTICS_HPP

#include <vector>

#include "hermite/data.hpp"
#include "hermite/models.hpp"

// Loss-landscape probes, unit census, and the robustness bound calculators.
// Every probe restores the model bit-identically; parameter gradients are
// treated as scratch and left zeroed.

namespace hermite::diag {

struct LandscapeProbe {
    std::vector<double> eta_grid;
    std::vector<double> losses; // +inf marks a numeric blowup at that step size
};

/// L(w - eta * grad L) over the grid, evaluated on one batch without
/// committing any step.
LandscapeProbe loss_along_gradient(nn::Model& model, const Tensor& features,
                                   const Tensor& targets_onehot,
                                   const std::vector<double>& eta_grid);

struct Trajectory {
    std::vector<std::vector<double>> weights; // flattened per step
    std::vector<std::vector<double>> grads;   // gradient at the same step
};

/// Run `steps` plain SGD mini-batch steps, recording (w_t, grad_t) before
/// each update. The model is restored afterwards.
Trajectory record_sgd_trajectory(nn::Model& model, const data::Dataset& ds, int steps, double lr,
                                 std::size_t batch, std::uint64_t seed);

/// max over consecutive snapshots of ||g_{t+1}-g_t|| / ||w_{t+1}-w_t||,
/// skipping zero-displacement pairs.
double max_beta_smoothness(const std::vector<std::vector<double>>& weights,
                           const std::vector<std::vector<double>>& grads);

/// ||w_t - w_0|| per step.
std::vector<double> weight_deviation(const std::vector<std::vector<double>>& weights);

/// Per census layer, the fraction of units whose post-activation output is
/// nonzero (|.| > 1e-12) on more than tau of the samples.
std::vector<double> active_unit_census(nn::Model& model, const Tensor& features, double tau);

/// One-hidden-layer bound instance: f_k(x) = sum_j A[k][j] sigma(w_j . x)
/// with sigma the degree-d expansion given by `coeffs`.
struct BoundInputs {
    Tensor output_weights; // [K x J]
    Tensor hidden_weights; // [J x D], rows w_j
    std::vector<double> coeffs;
    double p_norm = 2.0; // Hoelder exponent; q is its conjugate
};

struct Lemma1Result {
    double bound = 0.0;
    double lhs_max = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double constant = 0.0;
};

/// Output-gap bound C * d * alpha * beta against the exact max gap at x.
/// C = multiplier * (d+1) * max_i|c_i| * max_n nu_n with nu_n the L1 norm of
/// the He_n coefficients over sqrt(n!).
Lemma1Result lemma1_bound(const BoundInputs& inputs, const std::vector<double>& x,
                          double c_multiplier = 1.0);

struct Theorem1Result {
    double required_norm = 0.0;
    bool vacuous = false; // alpha <= log(1+K eps): any norm qualifies
};

/// ||x|| >= log(alpha / log(1+K eps)) / ||w_J||.
Theorem1Result theorem1_required_norm(double w_norm, double alpha, int num_classes,
                                      double epsilon);

/// Max softmax probability of model(r * direction) for each radius.
std::vector<double> confidence_profile(nn::Model& model, const std::vector<double>& direction,
                                       const std::vector<double>& radii);

} // namespace hermite::diag

#endif
