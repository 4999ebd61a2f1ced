#include <doctest.h>

#include <cmath>

#include "hermite/hermite.hpp"
#include "hermite/rng.hpp"
#include "oracles.hpp"

using namespace hermite;
using basis::GaussianQuadrature;

TEST_SUITE_BEGIN("hermite");

TEST_CASE("unnormalized evaluation matches hand expansions") {
    CHECK(basis::eval_unnormalized(0, 7.3) == 1.0);
    CHECK(basis::eval_unnormalized(2, 2.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(basis::eval_unnormalized(3, 1.0) == doctest::Approx(-2.0).epsilon(1e-12));

    // recurrence vs explicit monomials, n <= 5, 100 random points in [-4, 4]
    Rng rng(7);
    for (int trial = 0; trial < 100; ++trial) {
        const double x = rng.uniform(-4.0, 4.0);
        for (int n = 0; n <= 5; ++n) {
            const double expected = oracles::he_by_monomials(n, x);
            const double got = basis::eval_unnormalized(n, x);
            CHECK(std::abs(got - expected) <=
                  1e-10 * std::max(1.0, std::abs(expected)));
        }
    }
}

TEST_CASE("normalized evaluation") {
    CHECK(basis::eval_normalized(1, 0.5) == 0.5);
    CHECK(basis::eval_normalized(2, 2.0) ==
          doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(basis::eval_normalized(4, 0.0) ==
          doctest::Approx(3.0 / std::sqrt(24.0)).epsilon(1e-12));
}

TEST_CASE("evaluation rejects bad arguments") {
    CHECK_THROWS_AS(basis::eval_unnormalized(2, std::nan("")), std::domain_error);
    CHECK_THROWS_AS(basis::eval_unnormalized(-1, 0.0), std::domain_error);
    CHECK_THROWS_AS(basis::eval_normalized(33, 0.0), std::domain_error);
}

TEST_CASE("derivative identity h_n' = sqrt(n) h_{n-1}") {
    CHECK(basis::eval_normalized_derivative(0, 3.0) == 0.0);
    CHECK(basis::eval_normalized_derivative(1, 9.9) == 1.0);
    CHECK(basis::eval_normalized_derivative(2, 2.0) ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));

    Rng rng(11);
    for (int n = 0; n <= 8; ++n) {
        for (int trial = 0; trial < 25; ++trial) {
            const double x = rng.uniform(-4.0, 4.0);
            const double fd = oracles::central_difference(
                [n](double z) { return basis::eval_normalized(n, z); }, x, 1e-5);
            CHECK(std::abs(basis::eval_normalized_derivative(n, x) - fd) < 1e-6);
        }
    }
}

TEST_CASE("quadrature is a probability measure and integrates polynomials") {
    const auto quad = GaussianQuadrature::make(64);
    double total = 0.0;
    for (double w : quad.weights) total += w;
    CHECK(std::abs(total - 1.0) < 1e-12);

    // E[x^2] = 1, E[x^4] = 3, E[x^6] = 15 under the standard normal
    auto moment = [&](int k) {
        return basis::inner_product([k](double x) { return std::pow(x, k); },
                                    [](double) { return 1.0; }, quad);
    };
    CHECK(moment(2) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(moment(4) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(moment(6) == doctest::Approx(15.0).epsilon(1e-10));
    CHECK(std::abs(moment(1)) < 1e-12);
    CHECK(std::abs(moment(7)) < 1e-10);

    // degree-50 integrand, still inside the rule's exactness range
    const double high = basis::inner_product(
        [](double x) { return basis::eval_normalized(25, x); },
        [](double x) { return basis::eval_normalized(25, x); }, quad);
    CHECK(high == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("orthonormality under the Gaussian measure") {
    const auto quad = GaussianQuadrature::make(64);
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            const double ip = basis::inner_product(
                [i](double x) { return basis::eval_normalized(i, x); },
                [j](double x) { return basis::eval_normalized(j, x); }, quad);
            const double expected = i == j ? 1.0 : 0.0;
            CHECK(std::abs(ip - expected) < 1e-8);
        }
    }
}

TEST_CASE("inner product examples and error path") {
    const auto quad = GaussianQuadrature::make(64);
    const double second_moment = basis::inner_product(
        [](double) { return 1.0; }, [](double x) { return x * x; }, quad);
    CHECK(second_moment == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(basis::inner_product([](double) { return std::nan(""); },
                                         [](double) { return 1.0; }, quad),
                    NumericError);
}

TEST_CASE("relu expansion matches the half-normal-moment oracle") {
    const auto quad = GaussianQuadrature::make(64);
    const auto coeffs = basis::relu_expansion_coefficients(10, quad);
    for (int i = 0; i <= 10; ++i)
        CHECK(coeffs[i] == doctest::Approx(oracles::relu_expansion_oracle(i)).epsilon(1e-10));

    SUBCASE("spec'd closed forms") {
        CHECK(coeffs[0] == doctest::Approx(1.0 / oracles::kSqrt2Pi).epsilon(1e-9));
        CHECK(coeffs[1] == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(coeffs[2] ==
              doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-9));
        CHECK(coeffs[4] ==
              doctest::Approx(-1.0 / std::sqrt(48.0 * M_PI)).epsilon(1e-9));
    }

    SUBCASE("odd coefficients above 1 vanish (ReLU minus x/2 is even)") {
        CHECK(std::abs(coeffs[3]) < 1e-8);
        CHECK(std::abs(coeffs[5]) < 1e-8);
        CHECK(std::abs(coeffs[7]) < 1e-8);
        CHECK(std::abs(coeffs[9]) < 1e-8);
    }

    SUBCASE("contract checks") {
        CHECK_THROWS_AS(basis::relu_expansion_coefficients(-1, quad), std::domain_error);
        const auto tiny = GaussianQuadrature::make(8);
        CHECK_THROWS_AS(basis::relu_expansion_coefficients(4, tiny), std::domain_error);
    }
}

TEST_CASE("generic expansion agrees with the dedicated relu path for smooth parts") {
    // for the identity activation the expansion is exactly (0, 1, 0, ...)
    const auto quad = GaussianQuadrature::make(64);
    const auto coeffs =
        basis::expansion_coefficients([](double x) { return x; }, 6, quad);
    CHECK(coeffs[1] == doctest::Approx(1.0).epsilon(1e-12));
    for (int i : {0, 2, 3, 4, 5, 6}) CHECK(std::abs(coeffs[i]) < 1e-10);
}

TEST_CASE("relu residual decreases with degree and matches Parseval") {
    const auto quad = GaussianQuadrature::make(64);
    const auto coeffs = basis::relu_expansion_coefficients(10, quad);
    double prev = 1e300;
    double parseval = 0.5; // E[ReLU^2] = 1/2
    for (int d = 0; d <= 10; ++d) {
        const std::vector<double> truncated(coeffs.begin(), coeffs.begin() + d + 1);
        const double residual = basis::relu_l2_residual(truncated);
        parseval -= coeffs[d] * coeffs[d];
        CHECK(residual == doctest::Approx(parseval).epsilon(1e-7));
        CHECK(residual <= prev + 1e-12);
        prev = residual;
    }
}

TEST_CASE("generating function residuals document the convention gap") {
    const auto zero = basis::generating_function_residual(0.0, 0.0, 0);
    CHECK(zero.first == 0.0);
    CHECK(zero.second == 0.0);

    const auto at_minus_one = basis::generating_function_residual(1.0, -1.0, 40);
    CHECK(at_minus_one.first < 1e-12); // standard identity converges

    // the literal normalized series never settles: its residual stays bounded
    // away from zero and keeps oscillating as the truncation deepens
    double b_min = 1e300, b_max = 0.0;
    for (int d = 10; d <= 100; d += 5) {
        const auto r = basis::generating_function_residual(1.0, -1.0, d);
        b_min = std::min(b_min, r.second);
        b_max = std::max(b_max, r.second);
    }
    CHECK(b_min > 1e-2);
    CHECK(b_max - b_min > 0.1);
}

TEST_SUITE_END();
