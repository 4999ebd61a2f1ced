#ifndef HERMITE_HERMITE_HPP
#define HERMITE_HERMITE_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "hermite/common.hpp"

// Probabilists' Hermite polynomials He_n (orthogonal under the standard
// normal), their orthonormal scaling h_n = He_n / sqrt(n!), Gauss quadrature
// for the standard normal measure, and activation expansion coefficients.

namespace hermite::basis {

/// Largest supported polynomial index. Above this the normalized recurrence
/// is still stable but nothing in this library asks for it.
inline constexpr int kMaxDegree = 32;

/// Degree tag for the orthonormal family used across the library.
struct HermiteBasis {
    int degree = 4;
};

/// He_n(x) via the three-term recurrence He_{n+1} = x He_n - n He_{n-1}.
double eval_unnormalized(int n, double x);

/// h_n(x) = He_n(x)/sqrt(n!), iterated directly in normalized form:
/// h_{n+1} = (x h_n - sqrt(n) h_{n-1}) / sqrt(n+1).
double eval_normalized(int n, double x);

/// h_n'(x) = sqrt(n) h_{n-1}(x); 0 for n = 0.
double eval_normalized_derivative(int n, double x);

/// Fill out[0..d] with h_0(x)..h_d(x) in one recurrence sweep.
void eval_normalized_all(int d, double x, double* out);

/// Quadrature nodes/weights for E_{x~N(0,1)}[f(x)]: sum(weights) == 1 and
/// polynomials up to degree 2*order-1 integrate exactly.
struct GaussianQuadrature {
    int order = 0;
    std::vector<double> nodes;
    std::vector<double> weights;

    static GaussianQuadrature make(int order);
};

/// <f, g> = E[f(x) g(x)] by quadrature.
template <typename F, typename G>
double inner_product(F&& f, G&& g, const GaussianQuadrature& quad) {
    if (quad.order < 1) throw std::domain_error("inner_product: quadrature order must be >= 1");
    double acc = 0.0;
    for (int k = 0; k < quad.order; ++k) {
        const double fv = f(quad.nodes[k]);
        const double gv = g(quad.nodes[k]);
        if (!std::isfinite(fv) || !std::isfinite(gv))
            throw NumericError("inner_product: non-finite integrand at node " + std::to_string(k));
        acc += quad.weights[k] * fv * gv;
    }
    return acc;
}

/// Expansion coefficients <f, h_i> for i = 0..d of an arbitrary activation,
/// by Gaussian quadrature.
template <typename F>
std::vector<double> expansion_coefficients(F&& f, int d, const GaussianQuadrature& quad) {
    if (d < 0) throw std::domain_error("expansion_coefficients: degree must be >= 0");
    if (quad.order < 2 * d + 8)
        throw std::domain_error("expansion_coefficients: quadrature order must be >= 2d+8");
    std::vector<double> coeffs(static_cast<std::size_t>(d) + 1, 0.0);
    std::vector<double> h(static_cast<std::size_t>(d) + 1);
    for (int k = 0; k < quad.order; ++k) {
        const double x = quad.nodes[k];
        const double fv = f(x);
        if (!std::isfinite(fv))
            throw NumericError("expansion_coefficients: non-finite activation at node " +
                               std::to_string(k));
        eval_normalized_all(d, x, h.data());
        for (int i = 0; i <= d; ++i) coeffs[i] += quad.weights[k] * fv * h[i];
    }
    return coeffs;
}

/// Coefficients <ReLU, h_i> for i = 0..d. ReLU has a kink at 0, which ruins
/// the convergence of the symmetric Gauss rule, so the integral is taken over
/// the half line x > 0 (where x*h_i(x)*phi(x) is smooth) with composite
/// Gauss-Legendre panels. `quad` only sets the contract floor on resolution.
std::vector<double> relu_expansion_coefficients(int d, const GaussianQuadrature& quad);

/// ||ReLU - sum_i c_i h_i||^2 under the standard normal measure, evaluated by
/// the same kink-split scheme.
double relu_l2_residual(const std::vector<double>& coeffs);

/// Truncation residuals of the generating function e^{xt - t^2/2} at degree d:
/// first with the standard terms He_n(x) t^n / n!, second with the literal
/// normalized terms h_n(x) t^n (which does not converge; kept to make the
/// difference between the two conventions observable).
std::pair<double, double> generating_function_residual(double x, double t, int d);

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

} // namespace hermite::basis

#endif
