// Guards the generator's byte-level output against accidental changes to the
// RNG stream or the formatting.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "causal/synthgen.hpp"

#ifndef GOLDEN_DIR
#error "GOLDEN_DIR must point at the committed reference CSVs"
#endif

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE_MESSAGE(is.good(), "missing golden file: " << path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("generator output matches the committed reference series") {
    const std::string dir = GOLDEN_DIR;
    for (std::uint64_t seed : {0ULL, 1ULL, 2ULL}) {
        const auto series = causal::synthgen::gen_exp1(
            causal::synthgen::default_exp1_params(), seed);
        CHECK(causal::synthgen::to_csv(series) ==
              slurp(dir + "/exp1_seed" + std::to_string(seed) + ".csv"));
    }
    const auto exp2 = causal::synthgen::gen_exp2(
        causal::synthgen::default_exp2_params(), 0);
    CHECK(causal::synthgen::to_csv(exp2) == slurp(dir + "/exp2_seed0.csv"));
}
