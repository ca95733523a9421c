#include "heterodyn/cli.hpp"
#include "heterodyn/serialize.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace heterodyn;
using heterodyn::io::Json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream o, e;
    Run r;
    r.code = cli::run(args, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

fs::path fresh_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / "heterodyn_test_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const fs::path& dir, const Json& j) {
    const auto p = dir / "config.json";
    io::write_text(p, j.dump(2));
    return p;
}

}  // namespace

TEST_CASE("git blob hash matches git hash-object") {
    CHECK(cli::git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(cli::git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("windows command reports the unit-drift constants") {
    const auto dir = fresh_dir("windows");
    const auto cfg = write_config(dir, {{"params", {{"c0", 0.5}, {"Gamma2", 1.0}}}, {"n", 1000}});
    const auto r = run({"windows", "--config", cfg.string(), "--out", (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto w = io::read_json(dir / "out" / "windows.json");
    CHECK(io::get_real(w["c"]) == doctest::Approx(8.0));
    CHECK(io::get_real(w["C"]) == doctest::Approx(1.0 / 3.0));
    CHECK(io::get_real(w["c_bar"]) == doctest::Approx(3.0));
    CHECK(io::get_real(w["C_bar"]) == doctest::Approx(0.5));
    const auto s = io::read_json(dir / "out" / "summary.json");
    CHECK(s["command"] == "windows");
    CHECK(s["input_hash"].get<std::string>().size() == 40);
    CHECK(fs::exists(dir / "out" / "timings.json"));
}

TEST_CASE("generate is reproducible for a fixed seed") {
    const auto dir = fresh_dir("generate");
    const std::vector<std::string> base = {"generate", "--n", "1000", "--ell", "2", "--theta", "0.3",
                                           "--gamma", "0.65", "--seed", "7", "--out"};
    auto a = base, b = base;
    a.push_back((dir / "a").string());
    b.push_back((dir / "b").string());
    REQUIRE(run(a).code == 0);
    REQUIRE(run(b).code == 0);
    for (const char* f : {"graph.json", "sequence.json", "summary.json"}) {
        INFO(f);
        CHECK(io::read_text(dir / "a" / f) == io::read_text(dir / "b" / f));
    }
    const auto s = io::read_json(dir / "a" / "summary.json");
    CHECK(s["config"]["seed"] == 7);
    CHECK(s["results"]["n"] == 1000);

    auto c = base;
    c[10] = "8";
    c.push_back((dir / "c").string());
    REQUIRE(run(c).code == 0);
    CHECK(io::read_text(dir / "a" / "graph.json") != io::read_text(dir / "c" / "graph.json"));
}

TEST_CASE("generate outside the theorem regime exits with a config error") {
    const auto dir = fresh_dir("regime");
    const auto r = run({"generate", "--n", "1000", "--theta", "0.5", "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("theta < (3-sqrt(5))/2") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "summary.json"));
}

TEST_CASE("bad arguments and configs exit 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    const auto dir = fresh_dir("bad");
    io::write_text(dir / "broken.json", "{");
    CHECK(run({"windows", "--config", (dir / "broken.json").string(), "--out", dir.string()}).code == 2);
    CHECK(run({"windows", "--config", (dir / "missing.json").string(), "--out", dir.string()}).code == 2);
    const auto cfg = write_config(dir, {{"kind", "nope"}});
    CHECK(run({"campaign", "--config", cfg.string(), "--out", dir.string()}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("lyapunov on a star recovers the closed-form spectrum") {
    const auto dir = fresh_dir("lyapunov");
    const auto cfg = write_config(dir, {{"graph", "star:3"},
                                        {"drift", {{"kind", "constant"}, {"d", 1}, {"a", 2.0}}},
                                        {"alpha", 1.0},
                                        {"spectrum", {{"horizon", 100.0}, {"burn_in", 20.0}}}});
    const auto r = run({"lyapunov", "--config", cfg.string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto s = io::read_json(dir / "summary.json")["results"];
    const std::vector<double> want{2, 1, 1, -2};
    const auto& ex = s["spectrum"]["exponents"];
    REQUIRE(ex.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(io::get_real(ex[i]) == doctest::Approx(want[i]).epsilon(1e-3));
    CHECK(s["stable_dimension"]["stable_dim"] == 1);
    CHECK(fs::exists(dir / "spectrum.csv"));
}

TEST_CASE("fixed-graph sweep on two stars finds both hub jumps") {
    const auto dir = fresh_dir("sweep");
    const auto cfg = write_config(dir, {{"graph", "stars:20,8"},
                                        {"alpha_range", {{"lo", 0.02}, {"hi", 0.5}, {"points", 25}}},
                                        {"spectrum", {{"horizon", 40.0}, {"burn_in", 10.0}}}});
    const auto r = run({"sweep", "--config", cfg.string(), "--out", dir.string()});
    REQUIRE(r.code == 0);
    const auto ev = io::read_json(dir / "summary.json")["results"]["events"];
    REQUIRE(ev.size() == 2);
    CHECK(io::get_real(ev[0]["alpha_lo"]) < 1.0 / 21);
    CHECK(io::get_real(ev[0]["alpha_hi"]) > 1.0 / 21);
    CHECK(io::get_real(ev[1]["alpha_lo"]) < 1.0 / 9);
    CHECK(io::get_real(ev[1]["alpha_hi"]) > 1.0 / 9);
    const auto csv = io::read_text(dir / "events.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("graph specs") {
    const fs::path here = ".";
    CHECK(cli::graph_from_spec("star:4", here).n() == 5);
    CHECK(cli::graph_from_spec("complete:5", here).edges().size() == 10);
    const auto g = cli::graph_from_spec("stars:3,2", here);
    CHECK(g.n() == 7);
    CHECK(g.degree(0) == 3);
    CHECK(g.degree(1) == 2);
    CHECK(cli::graph_from_spec(Json{{"n", 4}, {"edges", {{0, 1}, {1, 2}}}}, here).n() == 4);
    CHECK_THROWS((void)cli::graph_from_spec("ring:4", here));
    CHECK_THROWS((void)cli::graph_from_spec("star:x", here));
}

TEST_CASE("seed comes from the environment when not given") {
    const auto dir = fresh_dir("env");
    const auto cfg = write_config(dir, {{"params", Json::object()}, {"n", 1000}});
    setenv("HETERODYN_SEED", "42", 1);
    const auto r = run({"windows", "--config", cfg.string(), "--out", dir.string()});
    unsetenv("HETERODYN_SEED");
    REQUIRE(r.code == 0);
    CHECK(io::read_json(dir / "summary.json")["config"]["seed"] == 42);
}

TEST_CASE("installed binary runs end to end") {
    const char* exe = std::getenv("HETERODYN_CLI");
    if (!exe) return;
    const auto dir = fresh_dir("binary");
    const std::string cmd = std::string(exe) + " generate --n 1000 --ell 1 --seed 3 --out " + dir.string() +
                            " > " + (dir / "log.txt").string() + " 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "graph.json"));
    const std::string bad = std::string(exe) + " generate --n 1000 --theta 0.5 --out " + dir.string() + " > " +
                            (dir / "log2.txt").string() + " 2>&1";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == 2);
}
