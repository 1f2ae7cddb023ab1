#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ensamp/cli.hpp"
#include "ensamp/stats.hpp"

using namespace ensamp;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("bound prints the ensemble size") {
    const Outcome o = cli({"bound", "--actions", "50", "--horizon", "2000", "--eps", "0.03"});
    CHECK(o.code == 0);
    CHECK(o.out == std::to_string(theorem1_min_models(50, 2000, 0.03)) + "\n");
    CHECK(o.err.empty());

    const Outcome weak = cli({"bound", "--actions", "1", "--horizon", "1", "--eps", "1"});
    CHECK(weak.code == 0);
    CHECK(weak.err.find("warning") != std::string::npos);

    CHECK(cli({"bound", "--actions", "1", "--horizon", "1", "--eps", "0"}).code == 2);
}

TEST_CASE("usage errors exit with 2") {
    const Outcome unknown = cli({"frobnicate"});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("run") != std::string::npos);
    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({"verify", "--suite", "nope"}).code == 2);
}

TEST_CASE("run reports config errors with exit 2") {
    const Outcome o = cli({"run", "missing.cfg"});
    CHECK(o.code == 2);
    CHECK(o.err.find("missing.cfg") != std::string::npos);
}

TEST_CASE("run writes outputs and honours overrides") {
    const auto dir = std::filesystem::temp_directory_path() / "ensamp_cli_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto cfg = dir / "c.json";
    std::ofstream(cfg) << R"({"env": {"family": "independent_gaussian", "num_actions": 3},
                             "agents": [{"kind": "ts"}], "run": {"horizon": 10, "realizations": 50}})";
    const Outcome o = cli({"run", cfg.string(), "--out", (dir / "out").string(), "--realizations", "2", "--seed", "5"});
    CHECK(o.code == 0);
    std::ifstream traces(dir / "out" / "traces.csv");
    std::size_t rows = 0;
    for (std::string line; std::getline(traces, line);) ++rows;
    CHECK(rows == 1 + 2 * 10);
    std::filesystem::remove_all(dir);
}

TEST_CASE("verify runs a named suite") {
    const Outcome o = cli({"verify", "--suite", "count-invariance"});
    CHECK(o.code == 0);
    CHECK(o.out.rfind("PASS count-invariance", 0) == 0);
}
