#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "bmv/config_file.hpp"
#include "bmv/suite.hpp"

using namespace bmv;

TEST_CASE("config parsing happy path") {
    auto cfg = ConfigFile::parse_string(
        "# comment\n"
        "[model]\n"
        "dim 1\n"
        "gamma_bar 0.75\n"
        "drift affine -1.0 0.3\n"
        "\n"
        "[run]\n"
        "replicas 100\n",
        "test.cfg");
    CHECK(cfg.has_section("model"));
    CHECK(cfg.has("model", "dim"));
    CHECK(!cfg.has("model", "sigma"));
    CHECK(cfg.get_int("model", "dim") == 1);
    CHECK(cfg.get_double("model", "gamma_bar") == doctest::Approx(0.75));
    CHECK(cfg.get("model", "drift") == "affine -1.0 0.3");
    CHECK(cfg.get_int("run", "replicas") == 100);
    CHECK(cfg.get_or("run", "format", "json") == "json");
    CHECK_NOTHROW(cfg.finish());

    const auto& resolved = cfg.resolved();
    CHECK(resolved.at("model.drift") == "affine -1.0 0.3");
    CHECK(resolved.at("run.format") == "json");  // default materialized
}

TEST_CASE("config error diagnostics carry line numbers") {
    SUBCASE("duplicate key names both lines") {
        CHECK_THROWS_WITH_AS(
            ConfigFile::parse_string("[a]\nk 1\nk 2\n", "dup.cfg"),
            doctest::Contains("first defined at line 2"), std::runtime_error);
    }

    SUBCASE("missing required key") {
        auto cfg = ConfigFile::parse_string("[a]\nk 1\n");
        CHECK_THROWS_WITH_AS(cfg.get("a", "missing"), doctest::Contains("missing"),
                             std::runtime_error);
    }

    SUBCASE("type errors point at the offending line") {
        auto cfg = ConfigFile::parse_string("[a]\nx not_a_number\n", "t.cfg");
        CHECK_THROWS_WITH_AS(cfg.get_double("a", "x"), doctest::Contains("t.cfg:2"),
                             std::runtime_error);
        auto cfg2 = ConfigFile::parse_string("[a]\nn 1.5\n", "t2.cfg");
        CHECK_THROWS_WITH_AS(cfg2.get_int("a", "n"), doctest::Contains("t2.cfg:2"),
                             std::runtime_error);
    }

    SUBCASE("unconsumed keys are unknown keys") {
        auto cfg = ConfigFile::parse_string("[a]\nk 1\nextra 2\n", "u.cfg");
        cfg.get_int("a", "k");
        CHECK_THROWS_WITH_AS(cfg.finish(), doctest::Contains("a.extra"), std::runtime_error);
    }

    SUBCASE("key outside a section") {
        CHECK_THROWS(ConfigFile::parse_string("k 1\n", "s.cfg"));
    }
}

TEST_CASE("run manifest serialization") {
    RunManifest man;
    man.subcommand = "metric";
    man.tool_version = "0.1.0";
    man.master_seed = 42;
    man.resolved_config["run.format"] = "json";
    man.input_digests["a.measure"] = "00000000deadbeef";
    man.output_paths = {"metric.json"};
    auto j = man.to_json();
    CHECK(j.find("\"subcommand\": \"metric\"") != std::string::npos);
    CHECK(j.find("\"master_seed\": 42") != std::string::npos);
    CHECK(j.find("00000000deadbeef") != std::string::npos);
    CHECK(j == man.to_json());  // deterministic
}

TEST_CASE("file digest") {
    std::string path = "digest_probe.tmp";
    {
        std::ofstream out(path, std::ios::binary);
        out << "hello";
    }
    auto d = file_digest(path);
    CHECK(d.size() == 16);
    // FNV-1a 64 of "hello"
    CHECK(d == "a430d84680aabd0b");
    std::remove(path.c_str());
    CHECK_THROWS(file_digest("no_such_file.really"));
}

TEST_CASE("suite registry") {
    auto names = registered_suites();
    for (const char* expect : {"metrics", "dynamics", "ito", "hamiltonian", "aux", "lfd", "all"})
        CHECK(std::find(names.begin(), names.end(), expect) != names.end());
    CHECK_THROWS_AS(run_suite("nonexistent", 0), std::invalid_argument);
}

TEST_CASE("fast suites pass and are deterministic") {
    for (const char* name : {"aux", "lfd", "hamiltonian"}) {
        auto a = run_suite(name, 7);
        auto b = run_suite(name, 7);
        CHECK(a.passed);
        CHECK(!a.checks.empty());
        CHECK(a.to_json() == b.to_json());
        for (const auto& c : a.checks) {
            INFO(name << "/" << c.name << ": " << c.detail);
            CHECK(c.passed);
        }
    }
}
