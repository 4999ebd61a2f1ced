#include <doctest.h>

#include <cmath>

#include "hermite/activations.hpp"
#include "hermite/hermite.hpp"
#include "hermite/layers.hpp"
#include "hermite/rng.hpp"
#include "oracles.hpp"

using namespace hermite;

TEST_SUITE_BEGIN("activations");

TEST_CASE("softsign values are bit-exact") {
    CHECK(act::softsign_f(0.0) == 0.0);
    CHECK(act::softsign_f(1.0) == 0.5);
    CHECK(act::softsign_f(-3.0) == -0.75);
}

TEST_CASE("softsign output stays strictly inside (-1, 1)") {
    Rng rng(13);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.gaussian() * std::pow(10.0, rng.uniform(-3.0, 8.0));
        const double y = act::softsign_f(x);
        CHECK(y > -1.0);
        CHECK(y < 1.0);
    }
    // beyond ~2^52 the quotient rounds onto the bound itself, so the strict
    // interior claim is checked up to there
    CHECK(act::softsign_f(1e15) < 1.0);
    CHECK(act::softsign_f(-1e15) > -1.0);
}

TEST_CASE("baseline activation values") {
    CHECK(act::relu_f(-2.0) == 0.0);
    CHECK(act::relu_f(3.0) == 3.0);
    CHECK(act::sigmoid_f(0.0) == 0.5);
    CHECK(act::elu_f(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0).epsilon(1e-15));
    CHECK(act::elu_f(2.0) == 2.0);
    CHECK(act::selu_f(1.0) == doctest::Approx(act::kSeluLambda).epsilon(1e-15));
}

TEST_CASE("scalar derivatives match finite differences") {
    Rng rng(17);
    for (const auto& fn :
         {act::relu(), act::elu(), act::selu(), act::sigmoid(), act::softsign()}) {
        for (int i = 0; i < 50; ++i) {
            double x = rng.uniform(-4.0, 4.0);
            if (std::abs(x) < 1e-3) x += 0.01; // keep clear of the relu kink
            const double fd = oracles::central_difference(
                [&](double z) { return fn.f(z); }, x, 1e-6);
            CHECK(std::abs(fn.df(x) - fd) < 1e-6);
        }
    }
}

TEST_CASE("relu-initialized expansion approximates relu better as degree grows") {
    double prev = 1e300;
    for (int d = 0; d <= 10; ++d) {
        const auto& coeffs = nn::relu_init_coefficients(d);
        const double residual = basis::relu_l2_residual(coeffs);
        CHECK(residual <= prev + 1e-12);
        prev = residual;
    }
}

TEST_CASE("relu-initialized activation has almost surely nonzero derivative") {
    // supports always-active units: the derivative of the degree-4 expansion
    // vanishes only on a measure-zero set
    const auto& coeffs = nn::relu_init_coefficients(4);
    Rng rng(19);
    int nonzero = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        const double x = rng.gaussian();
        double deriv = 0.0;
        for (int k = 1; k <= 4; ++k)
            deriv += coeffs[k] * basis::eval_normalized_derivative(k, x);
        if (std::abs(deriv) > 1e-12) ++nonzero;
    }
    CHECK(static_cast<double>(nonzero) / trials >= 0.99);
}

TEST_CASE("preact block with identity wiring is the identity map") {
    nn::PreactBlock block(3, {nn::ActKind::identity, 0}, /*use_norm=*/false,
                          /*second_softsign=*/false, /*residual=*/false);
    block.dense->force_identity = true;
    Rng rng(23);
    nn::Model model;
    model.layers.push_back(std::make_unique<nn::PreactBlock>(std::move(block)));
    model.reinit(1);

    Tensor x({4, 3});
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.gaussian();
    auto out = model.forward(ad::leaf(x), false);
    for (std::size_t i = 0; i < x.numel(); ++i)
        CHECK(out->value[i] == doctest::Approx(x[i]).epsilon(1e-15));
}

TEST_CASE("preact block residual keeps widths and adds the branch") {
    auto block = std::make_unique<nn::PreactBlock>(3, nn::ActivationChoice{nn::ActKind::hermite, 4},
                                                   true, true, true);
    nn::Model model;
    model.layers.push_back(std::move(block));
    model.reinit(7);
    Tensor x({5, 3});
    Rng rng(29);
    for (std::size_t i = 0; i < x.numel(); ++i) x[i] = rng.gaussian();
    auto out = model.forward(ad::leaf(x), true);
    CHECK(out->value.rows() == 5);
    CHECK(out->value.cols() == 3);
    // residual: output differs from branch-only by exactly x
    nn::Model branch_only;
    auto block2 = std::make_unique<nn::PreactBlock>(3, nn::ActivationChoice{nn::ActKind::hermite, 4},
                                                    true, true, false);
    branch_only.layers.push_back(std::move(block2));
    branch_only.reinit(7);
    auto branch = branch_only.forward(ad::leaf(x), true);
    for (std::size_t i = 0; i < x.numel(); ++i)
        CHECK(out->value[i] == doctest::Approx(branch->value[i] + x[i]).epsilon(1e-12));
}

TEST_SUITE_END();
