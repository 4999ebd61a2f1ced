#ifndef HERMITE_ACTIVATIONS_HPP
#define HERMITE_ACTIVATIONS_HPP

#include <cmath>

#include "hermite/graph.hpp"

namespace hermite::act {

// Each activation carries its exact derivative so backward passes never fall
// back to numeric differentiation.

inline double relu_f(double x) { return x > 0.0 ? x : 0.0; }
inline double relu_df(double x) { return x > 0.0 ? 1.0 : 0.0; }

inline double elu_f(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_df(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// Klambauer et al. constants.
inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kSeluLambda = 1.0507009873554804934193349852946;
inline double selu_f(double x) {
    return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x);
}
inline double selu_df(double x) {
    return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x);
}

inline double sigmoid_f(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double sigmoid_df(double x) {
    const double s = sigmoid_f(x);
    return s * (1.0 - s);
}

inline double softsign_f(double x) { return x / (1.0 + std::abs(x)); }
inline double softsign_df(double x) {
    const double denom = 1.0 + std::abs(x);
    return 1.0 / (denom * denom);
}

inline double identity_f(double x) { return x; }
inline double identity_df(double) { return 1.0; }

inline const ad::ScalarFn& relu() {
    static const ad::ScalarFn fn{"relu", relu_f, relu_df};
    return fn;
}
inline const ad::ScalarFn& elu() {
    static const ad::ScalarFn fn{"elu", elu_f, elu_df};
    return fn;
}
inline const ad::ScalarFn& selu() {
    static const ad::ScalarFn fn{"selu", selu_f, selu_df};
    return fn;
}
inline const ad::ScalarFn& sigmoid() {
    static const ad::ScalarFn fn{"sigmoid", sigmoid_f, sigmoid_df};
    return fn;
}
inline const ad::ScalarFn& softsign() {
    static const ad::ScalarFn fn{"softsign", softsign_f, softsign_df};
    return fn;
}
inline const ad::ScalarFn& identity() {
    static const ad::ScalarFn fn{"identity", identity_f, identity_df};
    return fn;
}

} // namespace hermite::act

#endif
