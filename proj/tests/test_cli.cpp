// End-to-end checks of the command-line tool: exit codes, output contracts,
// and byte-level determinism of written files.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

const std::string kCli = TWORELAY_CLI_PATH;
const std::string kBundled = TWORELAY_BUNDLED_DATA_DIR;
const std::string kFixtures = TWORELAY_TEST_DATA_DIR;

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

std::string temp_path(const std::string& name) {
    return std::string("/tmp/tworelay_cli_test_") + name;
}

RunResult run(const std::string& args) {
    const std::string out_file = temp_path("last_run.txt");
    const std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::ostringstream text;
    text << in.rdbuf();
    r.output = text.str();
    return r;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("validate accepts every bundled example spec") {
    for (const char* name : {"p2p_noiseless.json", "useless_receiver.json",
                             "two_relay_sym.json"}) {
        const RunResult r = run("validate " + kBundled + "/" + name);
        CAPTURE(name);
        CAPTURE(r.output);
        CHECK(r.exit_code == 0);
        CHECK(contains(r.output, "validation: OK"));
    }
}

TEST_CASE("truncated input file fails with the parse-error exit code") {
    const std::string path = temp_path("truncated.json");
    write_file(path, "{\"name\": \"trunc");
    const RunResult r = run("validate " + path);
    CHECK(r.exit_code == 2);
    CHECK(contains(r.output, "parse error"));
}

TEST_CASE("normalization violation exits 1 and names the offending row") {
    // Rebuild the noiseless spec with one row summing to 1.02.
    std::string text = read_file(kBundled + "/p2p_noiseless.json");
    const std::string good = "[[[0.5,0.5]]]";
    // The bundled file is pretty-printed; normalize whitespace before patching.
    std::string squeezed;
    for (char c : text)
        if (c != ' ' && c != '\n') squeezed += c;
    const std::size_t pos = squeezed.find(good);
    REQUIRE(pos != std::string::npos);
    squeezed.replace(pos, good.size(), "[[[0.52,0.5]]]");
    const std::string path = temp_path("badsum.json");
    write_file(path, squeezed);

    const RunResult r = run("validate " + path);
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "p_x0_given_v1_v2"));
    CHECK(contains(r.output, "row_sum"));
}

TEST_CASE("region without a stored distribution exits 1 and suggests optimize") {
    const RunResult r = run("region " + kFixtures + "/infeasible_net.json");
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "optimize"));
}

TEST_CASE("region reports feasibility and the elimination cross-check") {
    const RunResult r =
        run("region " + kBundled + "/two_relay_sym.json --fme-check");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "feasible: yes"));
    CHECK(contains(r.output, "agreement: true"));
    CHECK(contains(r.output, "rate: 1"));
}

TEST_CASE("region structured output is deterministic and self-describing") {
    const std::string out1 = temp_path("region1.json");
    const std::string out2 = temp_path("region2.json");
    const std::string base =
        "region " + kBundled + "/two_relay_sym.json --mode both --out ";
    REQUIRE(run(base + out1).exit_code == 0);
    REQUIRE(run(base + out2).exit_code == 0);
    const std::string a = read_file(out1);
    CHECK(a == read_file(out2));
    CHECK(contains(a, "\"spec\""));
    CHECK(contains(a, "\"command\""));
    CHECK(contains(a, "\"version\""));
    CHECK(contains(a, "\"comparison\""));
}

TEST_CASE("optimize finds the noisy pipe capacity and writes stable reports") {
    const std::string rep1 = temp_path("opt1.json");
    const std::string rep2 = temp_path("opt2.json");
    const std::string base = "optimize " + kFixtures +
                             "/p2p_bsc.json --restarts 2 --iters 60 --seed 5 "
                             "--report ";
    const RunResult r = run(base + rep1);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "best rate:"));
    REQUIRE(run(base + rep2).exit_code == 0);
    const std::string a = read_file(rep1);
    CHECK(a == read_file(rep2));
    CHECK(contains(a, "\"seed\": 5"));
    // Capacity of the 0.11-crossover pipe is just above 0.5.
    CHECK(contains(a, "\"best_rate\": 0.5"));
}

TEST_CASE("optimize rescues a network whose random starts are all infeasible") {
    // Helper 1 watches a coin nobody can use; every informative quantizer is
    // infeasible, and the search must fall back to a degenerate one (rate 0).
    const RunResult r = run("optimize " + kFixtures +
                            "/infeasible_net.json --restarts 2 --iters 30 --seed 3");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "best rate: 0 "));
}

TEST_CASE("simulate honors budgets, reports zero error on the clean pipe") {
    const std::string csv1 = temp_path("sim1.csv");
    const std::string csv2 = temp_path("sim2.csv");
    const std::string base =
        "simulate " + kBundled + "/p2p_noiseless.json --n 12 --blocks 2 "
        "--bits 1,0,0,0,0,0,0,0,0 --eps 0.9 --trials 40 --seed 11 --out ";
    const RunResult r = run(base + csv1);
    CHECK(r.exit_code == 0);
    REQUIRE(run(base + csv2).exit_code == 0);
    const std::string a = read_file(csv1);
    CHECK(a == read_file(csv2));
    CHECK(contains(a, "# seed: 11"));
    CHECK(contains(a, "n,blocks,epsilon,joint_decoding,trials,errors,p_hat"));
    // One data row with zero errors: noiseless pipe at one bit per 12 symbols.
    CHECK(contains(a, "12,2,0.9,0,40,0,0,"));
}

TEST_CASE("simulate rejects inconsistent budgets naming the invariant") {
    const RunResult r = run("simulate " + kBundled +
                            "/p2p_noiseless.json --n 6 --bits 1,2,0,0,1,0,0,0,0 "
                            "--trials 5");
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "k_s1 must not exceed k_h1"));
}

TEST_CASE("sweep interpolates between two channels") {
    const RunResult r = run("sweep " + kBundled + "/p2p_noiseless.json --mix " +
                            kFixtures + "/p2p_bsc.json --points 5");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "lambda,feasible,rate,min_slack"));
    // Header comments plus column line plus five data rows.
    CHECK(count_lines(r.output) == 11);
    CHECK(contains(r.output, "\n0,1,1,0\n"));           // noiseless endpoint
    CHECK(contains(r.output, "\n1,1,0.500084041835,")); // crossover endpoint
}

TEST_CASE("a one-point sweep equals the plain region evaluation") {
    const RunResult sweep = run("sweep " + kFixtures + "/p2p_bsc.json --mix " +
                                kFixtures + "/p2p_bsc.json --points 1");
    CHECK(sweep.exit_code == 0);
    CHECK(contains(sweep.output, "\n0,1,0.500084041835,"));
    const RunResult region = run("region " + kFixtures + "/p2p_bsc.json");
    CHECK(contains(region.output, "rate: 0.500084041835"));
}

TEST_CASE("sweep rejects mismatched alphabets and malformed grids") {
    const RunResult mismatch = run("sweep " + kBundled +
                                   "/p2p_noiseless.json --mix " + kBundled +
                                   "/two_relay_sym.json --points 3");
    CHECK(mismatch.exit_code == 1);
    const RunResult bad_grid = run("sweep " + kFixtures + "/p2p_bsc.json --mix " +
                                   kFixtures + "/p2p_bsc.json --points 0");
    CHECK(bad_grid.exit_code == 1);
}

TEST_CASE("unknown files and flags use the documented exit codes") {
    CHECK(run("validate /tmp/tworelay_no_such_file.json").exit_code == 2);
    CHECK(run("region").exit_code == 1);        // missing required argument
    CHECK(run("frobnicate x").exit_code == 1);  // unknown subcommand
}
