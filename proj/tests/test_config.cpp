#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "liir/config.hpp"

using namespace liir;
namespace fs = std::filesystem;

TEST_CASE("defaults validate and dump-reparse is a fixed point") {
    RunConfig cfg;
    cfg.validate();
    const std::string dumped = dump_config(cfg);

    RunConfig reparsed;
    std::istringstream is(dumped);
    std::string line;
    while (std::getline(is, line)) apply_config_line(reparsed, line);
    CHECK(dump_config(reparsed) == dumped);
}

TEST_CASE("unknown keys are rejected by name") {
    RunConfig cfg;
    try {
        apply_config_line(cfg, "warmup_epochz=3");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("warmup_epochz") != std::string::npos);
    }
}

TEST_CASE("value type errors name the field") {
    RunConfig cfg;
    try {
        apply_config_line(cfg, "batch_size=four");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("batch_size") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_config_line(cfg, "compact_train=maybe"), ConfigError);
    CHECK_THROWS_AS(apply_config_line(cfg, "position=3dape"), ConfigError);
    CHECK_THROWS_AS(apply_config_line(cfg, "shift_mode=rotate"), ConfigError);
    CHECK_THROWS_AS(apply_config_line(cfg, "scenario=flying_cubes"), ConfigError);
    CHECK_THROWS_AS(apply_config_line(cfg, "no equals sign"), ConfigError);
}

TEST_CASE("config files parse with comments and overrides apply in order") {
    const fs::path path = fs::temp_directory_path() / "liir_cfg_test.cfg";
    {
        std::ofstream out(path);
        out << "# a comment\n";
        out << "seed=9\n";
        out << "scenario=twin_sprites,occlusion\n";
        out << "lambda_com=0.5  # trailing comment\n";
        out << "\n";
        out << "position=2dape\n";
    }
    RunConfig cfg = parse_config_file(path.string());
    CHECK(cfg.seed == 9);
    REQUIRE(cfg.scenarios.size() == 2);
    CHECK(cfg.scenarios[0] == Scenario::TwinSprites);
    CHECK(cfg.scenarios[1] == Scenario::Occlusion);
    CHECK(cfg.lambda_com == 0.5);
    CHECK(cfg.position == "2dape");

    apply_overrides(cfg, {"position=1dape", "seed=11"});
    CHECK(cfg.position == "1dape");
    CHECK(cfg.seed == 11);
    fs::remove(path);
}

TEST_CASE("invalid combinations fail validation") {
    RunConfig cfg;
    cfg.frame_size = 30;  // not divisible by 4
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.lambda_com = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.bottleneck_drop = 3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RunConfig{};
    cfg.ema_beta = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("position none disables the encoding but stays a valid config") {
    RunConfig cfg;
    cfg.position = "none";
    cfg.validate();
    CHECK_FALSE(cfg.position_enabled());
    CHECK_THROWS_AS(cfg.position_kind(), ConfigError);
}
