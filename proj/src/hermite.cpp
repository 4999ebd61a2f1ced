#include "hermite/hermite.hpp"

#include <algorithm>
#include <cmath>

namespace hermite::basis {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void check_eval_args(int n, double x) {
    if (n < 0) throw std::domain_error("hermite: polynomial index must be >= 0");
    if (n > kMaxDegree) throw std::domain_error("hermite: polynomial index above supported max");
    if (!std::isfinite(x)) throw std::domain_error("hermite: non-finite evaluation point");
}

// Physicists' Gauss-Hermite rule (weight e^{-x^2}) by Newton iteration on the
// orthonormal recurrence; standard initial guesses for the largest roots.
void gauss_hermite_physicists(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    const double pim4 = 0.7511255444649424828587030047762276930510; // pi^{-1/4}
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(n, 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = pim4;
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 -
                     std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if (n % 2 == 1) x[m - 1] = 0.0;
}

// Composite Gauss-Legendre evaluation of \int_0^U g(x) phi(x) dx with
// phi the standard normal density. U = 20 puts the truncated tail below
// 1e-20 relative for every polynomial-times-ReLU integrand used here.
template <typename G>
double half_line_gaussian_integral(G&& g) {
    static thread_local std::vector<double> nodes, weights;
    if (nodes.empty()) gauss_legendre(32, nodes, weights);
    const double inv_sqrt_2pi = 0.3989422804014326779399460599343819;
    const double panel_width = 2.0;
    const int panel_count = 10;
    double total = 0.0;
    for (int p = 0; p < panel_count; ++p) {
        const double lo = p * panel_width;
        const double half = 0.5 * panel_width;
        const double mid = lo + half;
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double x = mid + half * nodes[k];
            acc += weights[k] * g(x) * std::exp(-0.5 * x * x);
        }
        total += acc * half * inv_sqrt_2pi;
    }
    return total;
}

} // namespace

double eval_unnormalized(int n, double x) {
    check_eval_args(n, x);
    if (n == 0) return 1.0;
    double prev = 1.0; // He_0
    double cur = x;    // He_1
    for (int k = 1; k < n; ++k) {
        const double next = x * cur - k * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double eval_normalized(int n, double x) {
    check_eval_args(n, x);
    if (n == 0) return 1.0;
    double prev = 1.0; // h_0
    double cur = x;    // h_1
    for (int k = 1; k < n; ++k) {
        const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

double eval_normalized_derivative(int n, double x) {
    check_eval_args(n, x);
    if (n == 0) return 0.0;
    return std::sqrt(static_cast<double>(n)) * eval_normalized(n - 1, x);
}

void eval_normalized_all(int d, double x, double* out) {
    check_eval_args(d, x);
    out[0] = 1.0;
    if (d == 0) return;
    out[1] = x;
    for (int k = 1; k < d; ++k)
        out[k + 1] = (x * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                     std::sqrt(static_cast<double>(k + 1));
}

GaussianQuadrature GaussianQuadrature::make(int order) {
    if (order < 1) throw std::domain_error("quadrature: order must be >= 1");
    std::vector<double> x, w;
    gauss_hermite_physicists(order, x, w);
    GaussianQuadrature q;
    q.order = order;
    q.nodes.resize(order);
    q.weights.resize(order);
    const double sqrt2 = std::sqrt(2.0);
    const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
    // Rescale from weight e^{-x^2} to the standard normal measure.
    for (int i = 0; i < order; ++i) {
        q.nodes[i] = sqrt2 * x[i];
        q.weights[i] = w[i] * inv_sqrt_pi;
    }
    return q;
}

std::vector<double> relu_expansion_coefficients(int d, const GaussianQuadrature& quad) {
    if (d < 0) throw std::domain_error("relu_expansion_coefficients: degree must be >= 0");
    if (d > kMaxDegree)
        throw std::domain_error("relu_expansion_coefficients: degree above supported max");
    if (quad.order < 2 * d + 8)
        throw std::domain_error("relu_expansion_coefficients: quadrature order must be >= 2d+8");
    std::vector<double> coeffs(static_cast<std::size_t>(d) + 1);
    std::vector<double> h(static_cast<std::size_t>(d) + 1);
    for (int i = 0; i <= d; ++i) {
        coeffs[i] = half_line_gaussian_integral([&](double x) {
            eval_normalized_all(d, x, h.data());
            return x * h[i];
        });
    }
    return coeffs;
}

double relu_l2_residual(const std::vector<double>& coeffs) {
    if (coeffs.empty()) throw std::domain_error("relu_l2_residual: empty coefficient vector");
    const int d = static_cast<int>(coeffs.size()) - 1;
    std::vector<double> h(coeffs.size());
    const auto sigma = [&](double x) {
        eval_normalized_all(d, x, h.data());
        double s = 0.0;
        for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * h[i];
        return s;
    };
    // Split at the kink: (ReLU - sigma)^2 is sigma^2 on x<0 and (x-sigma)^2 on
    // x>0, each smooth. Negative side by reflection.
    const double neg = half_line_gaussian_integral([&](double x) {
        const double s = sigma(-x);
        return s * s;
    });
    const double pos = half_line_gaussian_integral([&](double x) {
        const double diff = x - sigma(x);
        return diff * diff;
    });
    return neg + pos;
}

std::pair<double, double> generating_function_residual(double x, double t, int d) {
    if (d < 0) throw std::domain_error("generating_function_residual: degree must be >= 0");
    if (!std::isfinite(x) || !std::isfinite(t))
        throw std::domain_error("generating_function_residual: non-finite argument");
    if (std::abs(t) > 1.0)
        throw std::domain_error("generating_function_residual: |t| must be <= 1");
    const double target = std::exp(x * t - 0.5 * t * t);

    // Convention A: sum He_n(x) t^n / n!, with t^n/n! iterated to avoid
    // forming n! directly.
    double sum_a = 0.0;
    {
        double he_prev = 0.0, he = 1.0; // He_{-1}, He_0
        double tn_over_fact = 1.0;
        for (int n = 0; n <= d; ++n) {
            sum_a += he * tn_over_fact;
            const double he_next = x * he - n * he_prev;
            he_prev = he;
            he = he_next;
            tn_over_fact *= t / (n + 1);
        }
    }

    // Convention B: sum h_n(x) t^n, as printed in the source identity.
    double sum_b = 0.0;
    {
        double h_prev = 0.0, h = 1.0; // h_{-1}, h_0
        double tn = 1.0;
        for (int n = 0; n <= d; ++n) {
            sum_b += h * tn;
            const double h_next =
                (x * h - std::sqrt(static_cast<double>(n)) * h_prev) / std::sqrt(n + 1.0);
            h_prev = h;
            h = h_next;
            tn *= t;
        }
    }

    return {std::abs(target - sum_a), std::abs(target - sum_b)};
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw std::domain_error("gauss_legendre: order must be >= 1");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15) break;
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
}

} // namespace hermite::basis
