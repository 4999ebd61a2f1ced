#include <doctest.h>

#include <cstdlib>

#include "hermite/config.hpp"

using namespace hermite;

TEST_SUITE_BEGIN("config");

TEST_CASE("key = value parsing with comments and blank lines") {
    auto config = cfg::RunConfig::from_text(
        "# a comment\n"
        "\n"
        "epochs = 20\n"
        "lr=0.05\n"
        "  activation =  hermite  \n");
    CHECK(config.get_int("epochs", 1) == 20);
    CHECK(config.get_double("lr", 1.0) == doctest::Approx(0.05));
    CHECK(config.get_string("activation", "") == "hermite");
}

TEST_CASE("unknown keys are rejected") {
    auto config = cfg::RunConfig::from_text("epochs = 20\nmystery = 1\n");
    CHECK_THROWS_AS(config.require_known({"epochs"}), ConfigError);
    CHECK_NOTHROW(config.require_known({"epochs", "mystery"}));
}

TEST_CASE("malformed lines and values raise config errors") {
    CHECK_THROWS_AS(cfg::RunConfig::from_text("not a kv line\n"), ConfigError);
    auto config = cfg::RunConfig::from_text("epochs = banana\n");
    CHECK_THROWS_AS(config.get_int("epochs", 1), ConfigError);
    auto config2 = cfg::RunConfig::from_text("flag = perhaps\n");
    CHECK_THROWS_AS(config2.get_bool("flag", true), ConfigError);
}

TEST_CASE("environment override with the documented prefix") {
    auto config = cfg::RunConfig::from_text("lr = 0.1\n");
    setenv("HERMITE_LR", "0.25", 1);
    setenv("HERMITE_EPOCHS", "7", 1);
    config.apply_env_overrides({"lr", "epochs"});
    unsetenv("HERMITE_LR");
    unsetenv("HERMITE_EPOCHS");
    CHECK(config.get_double("lr", 0.0) == doctest::Approx(0.25));
    CHECK(config.get_int("epochs", 0) == 7);
}

TEST_CASE("resolved dump includes defaults that were read") {
    auto config = cfg::RunConfig::from_text("lr = 0.1\n");
    (void)config.get_double("lr", 0.0);
    (void)config.get_int("epochs", 50);
    const std::string dump = config.resolved_text();
    CHECK(dump.find("lr = 0.1") != std::string::npos);
    CHECK(dump.find("epochs = 50") != std::string::npos);
}

TEST_CASE("list parsing") {
    auto config = cfg::RunConfig::from_text("hidden = 256, 256\netas = 0.1,0.2,0.3\n");
    const auto hidden = config.get_size_list("hidden", "");
    REQUIRE(hidden.size() == 2);
    CHECK(hidden[0] == 256);
    const auto etas = config.get_double_list("etas", "");
    REQUIRE(etas.size() == 3);
    CHECK(etas[2] == doctest::Approx(0.3));
}

TEST_SUITE_END();
