#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef CLI_BINARY
#error "CLI_BINARY must point at the built executable"
#endif

namespace {

const std::string kBin = CLI_BINARY;

int run(const std::string& args) {
    const int status = std::system((kBin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string tmp(const std::string& name) {
    return std::string("/tmp/causal_cli_test_") + name;
}

}  // namespace

TEST_CASE("generate: writes a parsable CSV and is reproducible") {
    const std::string out = tmp("gen.csv");
    CHECK(run("generate exp1 --seed 5 --out " + out) == 0);
    const std::string first = slurp(out);
    CHECK(first.rfind("t,x,y,truth_label\n", 0) == 0);
    // header + 3000 rows
    CHECK(std::count(first.begin(), first.end(), '\n') == 3001);
    CHECK(run("generate exp1 --seed 5 --out " + out) == 0);
    CHECK(slurp(out) == first);
    CHECK(run("generate exp1 --seed 6 --out " + out) == 0);
    CHECK(slurp(out) != first);
}

TEST_CASE("generate: unknown experiment exits with usage code") {
    CHECK(run("generate exp9 --out " + tmp("bad.csv")) == 2);
    CHECK(run("generate") == 2);     // missing positional
    CHECK(run("frobnicate") == 2);   // unknown subcommand
}

TEST_CASE("fit: corrupt input exits with usage code") {
    const std::string bad = tmp("corrupt.csv");
    std::ofstream(bad) << "t,x,y,truth_label\n0,1.0,2.0,0\nnot,a,row\n";
    CHECK(run("fit --input " + bad + " --out-model " + tmp("m.json") +
              " --out-resp " + tmp("r.csv") + " --out-trace " + tmp("t.csv")) == 2);
    CHECK(run("fit --input /nonexistent.csv") == 1);
}

TEST_CASE("full pipeline: generate, fit, eval, gc") {
    const std::string series = tmp("exp1.csv");
    const std::string model = tmp("model.json");
    const std::string resp = tmp("resp.csv");
    const std::string trace = tmp("trace.csv");
    const std::string report = tmp("report.json");
    const std::string tidy = tmp("tidy.csv");

    REQUIRE(run("generate exp1 --seed 1 --out " + series) == 0);
    REQUIRE(run("fit --input " + series + " --k 3 --dt 1 --seed 1 --restarts 3"
                " --out-model " + model + " --out-resp " + resp +
                " --out-trace " + trace) == 0);

    const std::string model_text = slurp(model);
    CHECK(model_text.find("\"version\": 1") != std::string::npos);
    CHECK(slurp(resp).rfind("r0,r1,r2\n", 0) == 0);
    CHECK(slurp(trace).rfind("iteration,log_likelihood\n", 0) == 0);

    // Same seed reproduces the model byte for byte.
    REQUIRE(run("fit --input " + series + " --k 3 --dt 1 --seed 1 --restarts 3"
                " --out-model " + model + "2 --out-resp " + resp +
                " --out-trace " + trace) == 0);
    CHECK(slurp(model + "2") == model_text);

    REQUIRE(run("eval --input " + series + " --model " + model +
                " --out-report " + report + " --out-tidy " + tidy) == 0);
    const std::string report_text = slurp(report);
    CHECK(report_text.find("misallocation_mppcca") != std::string::npos);
    CHECK(report_text.find("whole_series_gc") != std::string::npos);
    CHECK(slurp(tidy).rfind("index,x,y,truth,estimated\n", 0) == 0);

    REQUIRE(run("gc --input " + series + " --use-truth --out-csv " +
                tmp("gc.csv")) == 0);
    CHECK(slurp(tmp("gc.csv")).rfind("cluster_id,n_samples,rho1,gc_index\n", 0) ==
          0);
}

TEST_CASE("preprocess: multichannel CSV to regression blocks") {
    // Two channels per series, 300 frames of noise.
    const std::string in = tmp("multi.csv");
    {
        std::ofstream os(in);
        os << "y0,y1,x0,x1\n";
        unsigned state = 12345;
        auto noise = [&state] {
            state = state * 1664525u + 1013904223u;
            return static_cast<double>(state % 1000) / 500.0 - 1.0;
        };
        for (int t = 0; t < 300; ++t)
            os << noise() << ',' << noise() << ',' << noise() << ',' << noise()
               << '\n';
    }
    const std::string blocks = tmp("blocks.csv");
    REQUIRE(run("preprocess --input " + in + " --effect y --cause x"
                " --delay 1 --stride 1 --window 4 --pca-ratio 1.0"
                " --with-velocity --out " + blocks +
                " --basis-prefix " + tmp("basis")) == 0);
    const std::string text = slurp(blocks);
    CHECK(text.rfind("y1_0,", 0) == 0);
    // N = (300-1) - 1 - 4 + 1 = 295 rows plus header.
    CHECK(std::count(text.begin(), text.end(), '\n') == 296);
    CHECK(slurp(tmp("basis") + "_y2.json").find("\"rank\"") != std::string::npos);

    CHECK(run("preprocess --input " + in + " --effect z --cause x --out " +
              blocks) == 2);
}
