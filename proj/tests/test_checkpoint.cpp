#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "hermite/checkpoint.hpp"
#include "hermite/models.hpp"
#include "hermite/rng.hpp"

using namespace hermite;
namespace fs = std::filesystem;

TEST_SUITE_BEGIN("checkpoint");

TEST_CASE("named float64 arrays round trip bit-exactly") {
    const auto path = (fs::temp_directory_path() / "hermite_ckpt_test.bin").string();
    Rng rng(41);

    ckpt::Checkpoint original;
    original.meta["arch"] = "mlp [2,3,2] relu";
    original.meta["seed"] = "7";
    Tensor w({3, 4});
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] = rng.gaussian() * 1e-3;
    w[0] = 0.1 + 0.2; // a value with a non-terminating binary expansion
    Tensor b({4});
    b[1] = -0.0; // negative zero must survive
    original.arrays.emplace_back("dense.W", w);
    original.arrays.emplace_back("dense.b", b);

    ckpt::save(path, original);
    const auto loaded = ckpt::load(path);

    CHECK(loaded.meta.at("arch") == "mlp [2,3,2] relu");
    CHECK(loaded.arrays.size() == 2);
    const Tensor* w2 = loaded.find("dense.W");
    REQUIRE(w2 != nullptr);
    CHECK(w2->shape() == w.shape());
    CHECK(std::memcmp(w2->data(), w.data(), w.numel() * sizeof(double)) == 0);
    const Tensor* b2 = loaded.find("dense.b");
    REQUIRE(b2 != nullptr);
    CHECK(std::memcmp(b2->data(), b.data(), b.numel() * sizeof(double)) == 0);
    CHECK(std::signbit((*b2)[1]));
}

TEST_CASE("model state round trips through a checkpoint") {
    nn::MlpSpec spec;
    spec.widths = {4, 6, 3};
    spec.act = {nn::ActKind::hermite, 4};
    spec.normalize = true;
    auto model = nn::build_mlp(spec);
    model.reinit(99);

    const auto path = (fs::temp_directory_path() / "hermite_model_ckpt.bin").string();
    ckpt::Checkpoint out;
    for (auto& [name, tensor] : model.named_state()) out.arrays.emplace_back(name, *tensor);
    ckpt::save(path, out);

    auto model2 = nn::build_mlp(spec);
    model2.reinit(1234);
    const auto loaded = ckpt::load(path);
    for (auto& [name, tensor] : model2.named_state()) {
        const Tensor* stored = loaded.find(name);
        REQUIRE_MESSAGE(stored != nullptr, name);
        *tensor = *stored;
    }
    auto s1 = model.snapshot();
    auto s2 = model2.snapshot();
    REQUIRE(s1.size() == s2.size());
    for (std::size_t i = 0; i < s1.size(); ++i)
        CHECK(std::memcmp(s1[i].data(), s2[i].data(), s1[i].numel() * sizeof(double)) == 0);
}

TEST_CASE("malformed checkpoints are format errors") {
    const auto path = (fs::temp_directory_path() / "hermite_ckpt_bad.bin").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "NOTACKPT\njunk";
    }
    CHECK_THROWS_AS(ckpt::load(path), FormatError);

    ckpt::Checkpoint original;
    Tensor w({2, 2});
    original.arrays.emplace_back("w", w);
    ckpt::save(path, original);
    fs::resize_file(path, fs::file_size(path) - 8);
    CHECK_THROWS_AS(ckpt::load(path), FormatError);
}

TEST_SUITE_END();
