#include "doctest.h"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aware/model.hpp"
#include "aware/transition.hpp"

namespace fs = std::filesystem;
using namespace aware;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(FIXTURE_DIR) + "/" + name;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("awmc-tests-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    static int call = 0;
    fs::path out = scratch_dir() / ("out" + std::to_string(call) + ".txt");
    fs::path err = scratch_dir() / ("err" + std::to_string(call) + ".txt");
    ++call;
    std::string cmd = std::string(AWMC_BIN) + " " + args + " > " + out.string() +
                      " 2> " + err.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

} // namespace

TEST_CASE("validate reports health with matching exit codes") {
    RunResult ok = run_cli("validate " + fixture_path("three_state.json"));
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("\"ok\":true") != std::string::npos);

    // break the probability normalization and expect V4 with exit 1
    AwarenessModel m = load_model_file(fixture_path("three_state.json"));
    m.prob["i"]["s1"]["s2"] = Rational(1, 4);
    fs::path broken = scratch_dir() / "broken.json";
    std::ofstream(broken) << save_model(m);
    RunResult bad = run_cli("validate " + broken.string());
    CHECK(bad.exit_code == 1);
    CHECK(bad.out.find("V4") != std::string::npos);
}

TEST_CASE("eval distinguishes false results from errors") {
    std::string model = fixture_path("three_state.json");
    RunResult t = run_cli("eval " + model + " --state s1 --formula " + quoted("A[i] p"));
    CHECK(t.exit_code == 0);
    CHECK(t.out.find("\"value\":true") != std::string::npos);

    RunResult f = run_cli("eval " + model + " --state s1 --formula " + quoted("A[i] p'"));
    CHECK(f.exit_code == 1);
    CHECK(f.out.find("\"value\":false") != std::string::npos);

    RunResult bad = run_cli("eval " + model + " --state s1 --formula " + quoted("A[i]"));
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("error:") != std::string::npos);

    RunResult quantified = run_cli("eval " + model + " --state s1 --formula " +
                                   quoted("X[i]((exists x. ~A[i](x)) -> p)"));
    CHECK(quantified.exit_code == 0);

    RunResult traced = run_cli("eval " + model + " --state s1 --formula " +
                               quoted("A[i] p") + " --trace");
    CHECK(traced.exit_code == 0);
    CHECK(traced.out.find("\"trace\"") != std::string::npos);
}

TEST_CASE("cons lists the absorbing states") {
    RunResult r = run_cli("cons " + fixture_path("three_state.json") +
                          " --formula " + quoted("p'") + " --agent i --anchor s1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"states\":[\"s2\"]") != std::string::npos);
}

TEST_CASE("transition writes a model and relation that verify") {
    fs::path prefix = scratch_dir() / "step";
    RunResult built =
        run_cli("transition " + fixture_path("three_state.json") + " --state s1 --formula " +
                quoted("p'") + " --agent i --mode multi --out " + prefix.string());
    CHECK(built.exit_code == 0);
    CHECK(fs::exists(prefix.string() + ".model.json"));
    CHECK(fs::exists(prefix.string() + ".T.json"));

    AwarenessModel after = load_model_file(prefix.string() + ".model.json");
    CHECK(after.states.size() == 8);

    RunResult verified = run_cli("verify " + fixture_path("three_state.json") + " " +
                                 prefix.string() + ".model.json " + prefix.string() +
                                 ".T.json --formula " + quoted("p'") +
                                 " --agent i --state s1 --mode multi");
    CHECK(verified.exit_code == 0);
    CHECK(verified.out.find("\"ok\":true") != std::string::npos);
}

TEST_CASE("verify flags a tampered result with exit 1") {
    RunResult r = run_cli("verify " + fixture_path("three_state.json") + " " +
                          fixture_path("discovery_multi_after.json") + " " +
                          fixture_path("discovery_multi_T.json") + " --formula " +
                          quoted("p'") + " --agent j --state s1 --mode multi");
    // the wrong agent cannot have produced this transition
    CHECK(r.exit_code == 1);
}

TEST_CASE("the golden verification passes through the command line") {
    RunResult r = run_cli("verify " + fixture_path("three_state.json") + " " +
                          fixture_path("discovery_multi_after.json") + " " +
                          fixture_path("discovery_multi_T.json") + " --formula " +
                          quoted("p'") + " --agent i --state s1 --mode multi");
    CHECK(r.exit_code == 0);
}

TEST_CASE("axioms runs the harness and validates its arguments") {
    RunResult ok = run_cli("axioms --axiom Ka --samples 25 --seed 3");
    CHECK(ok.exit_code == 0);
    CHECK(ok.out.find("\"failures\":0") != std::string::npos);

    RunResult both = run_cli("axioms --axiom Ka --experimental Kb");
    CHECK(both.exit_code == 2);

    RunResult unknown = run_cli("axioms --axiom K5");
    CHECK(unknown.exit_code == 2);
}

TEST_CASE("disclose prints the outcome table") {
    RunResult r = run_cli("disclose " + fixture_path("rating_disclosure.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"no_disclosure\"") != std::string::npos);
    CHECK(r.out.find("\"7/4\"") != std::string::npos);
    CHECK(r.out.find("Withhold") != std::string::npos);
    CHECK(r.out.find("Disclose") != std::string::npos);
}

TEST_CASE("export-dot matches the golden rendering byte for byte") {
    RunResult r = run_cli("export-dot " + fixture_path("three_state.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.out == slurp(fixture_path("three_state.dot")));

    RunResult colored = run_cli("export-dot " + fixture_path("three_state.json") +
                                " --agent-colors");
    CHECK(colored.exit_code == 0);
    CHECK(colored.out.find("color=\"#1f77b4\"") != std::string::npos);
}

TEST_CASE("bad invocations exit with 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("validate /no/such/file.json").exit_code == 2);
    CHECK(run_cli("frobnicate x").exit_code == 2);
    CHECK(run_cli("eval " + fixture_path("three_state.json") + " --state nowhere --formula p")
              .exit_code == 2);
}
