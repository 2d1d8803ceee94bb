// Exercises the installed command surface through real subprocess calls.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef GRID_CLI_PATH
#define GRID_CLI_PATH "grid"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path kWork = "/tmp/grid_cli_test";

int cli(const std::string& args, std::string* output = nullptr) {
    const std::string out_file = (kWork / "cmd_output.txt").string();
    const std::string cmd = std::string(GRID_CLI_PATH) + " " + args + " > " +
                            out_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (output != nullptr) {
        std::ifstream in(out_file);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    return status == 0 ? 0 : 1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Fixture {
    Fixture() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        REQUIRE(cli("synth --classes 3 --per-class 14 --separation 2.0 "
                    "--seed 7 --out " + (kWork / "data").string()) == 0);
        REQUIRE(cli("ingest --manifest " + (kWork / "data/manifest.txt").string() +
                    " --out " + (kWork / "data.bin").string()) == 0);
    }
};

}  // namespace

TEST_CASE("cli end-to-end: synth, ingest, train, predict, inspect") {
    Fixture fixture;

    const std::string model = (kWork / "model.grid").string();
    REQUIRE(cli("train --data " + (kWork / "data.bin").string() +
                " --space raw_plus_hfmh --c 1.0 --seed 3 --out " + model) == 0);

    // Predicting a training sample of a separable problem returns its class.
    std::string output;
    REQUIRE(cli("predict --model " + model + " --input " +
                (kWork / "data/class_01/sample_0000.csv").string(),
                &output) == 0);
    CHECK(output.find("predicted: class_01") != std::string::npos);
    CHECK(output.find("per-class losses") != std::string::npos);

    REQUIRE(cli("inspect --model " + model, &output) == 0);
    CHECK(output.find("feature space: raw_plus_hfmh") != std::string::npos);
    CHECK(output.find("coding matrix 3 x 3") != std::string::npos);
    CHECK(output.find("class_02") != std::string::npos);
}

TEST_CASE("cli evaluate is byte-deterministic in the seed") {
    Fixture fixture;
    const std::string base = "evaluate --data " + (kWork / "data.bin").string() +
                             " --space hfmh --repeats 3 --train 9 --test 4 "
                             "--seed 11 ";
    REQUIRE(cli(base + "--report " + (kWork / "r1.csv").string() +
                " --confusion " + (kWork / "c1.csv").string()) == 0);
    REQUIRE(cli(base + "--report " + (kWork / "r2.csv").string() +
                " --confusion " + (kWork / "c2.csv").string()) == 0);
    CHECK(slurp(kWork / "r1.csv") == slurp(kWork / "r2.csv"));
    CHECK(slurp(kWork / "c1.csv") == slurp(kWork / "c2.csv"));
    CHECK(!slurp(kWork / "r1.csv").empty());
}

TEST_CASE("cli compare emits the full table-shaped CSV with p-values") {
    Fixture fixture;
    REQUIRE(cli("compare --data " + (kWork / "data.bin").string() +
                " --spaces all --repeats 2 --train 9 --test 4 --seed 5 "
                "--pca-k 8 --rica-k 4 --out " + (kWork / "table.csv").string() +
                " --pvals " + (kWork / "pvals.csv").string()) == 0);
    const std::string table = slurp(kWork / "table.csv");
    std::istringstream lines(table);
    std::string line;
    std::getline(lines, line);  // header
    const char* expected_order[] = {
        "raw_plus_hfmh", "raw_plus_dft",      "norm_raw_plus_hfmh",
        "norm_raw_plus_dft", "hfmh",          "raw",
        "raw_hist",      "norm_raw",          "dft",
        "pca",           "pca_rica"};
    for (const char* id : expected_order) {
        REQUIRE(std::getline(lines, line));
        CHECK(line.rfind(std::string(id) + ",", 0) == 0);
    }
    const std::string pvals = slurp(kWork / "pvals.csv");
    CHECK(pvals.find("space_id,raw_plus_hfmh") == 0);
}

TEST_CASE("cli ablate-permute reports near-chance accuracy and the baseline") {
    Fixture fixture;
    std::string output;
    REQUIRE(cli("ablate-permute --data " + (kWork / "data.bin").string() +
                " --space raw --repeats 3 --train 9 --test 4 --seed 5 "
                "--report " + (kWork / "abl.csv").string(), &output) == 0);
    CHECK(output.find("chance level for 3 balanced classes: 0.3333") !=
          std::string::npos);
    CHECK(slurp(kWork / "abl.csv").find("raw_permuted,") != std::string::npos);
}

TEST_CASE("cli fails cleanly on bad input") {
    Fixture fixture;
    std::string output;
    CHECK(cli("evaluate --data /nonexistent.bin --report x.csv", &output) == 1);
    CHECK(cli("evaluate --data " + (kWork / "data.bin").string() +
              " --space not_a_space", &output) == 1);
    CHECK(output.find("not_a_space") != std::string::npos);
    CHECK(cli("train --data " + (kWork / "data.bin").string() +
              " --out m.grid --unknown-flag", &output) == 1);
    CHECK(cli("predict --model /nonexistent.grid --input x.csv", &output) == 1);
}

TEST_CASE("cli zero-phase flag changes the hfmh model deterministically") {
    Fixture fixture;
    const std::string causal = (kWork / "causal.grid").string();
    const std::string zp = (kWork / "zp.grid").string();
    REQUIRE(cli("train --data " + (kWork / "data.bin").string() +
                " --space hfmh --seed 3 --out " + causal) == 0);
    REQUIRE(cli("train --data " + (kWork / "data.bin").string() +
                " --space hfmh --seed 3 --zero-phase --out " + zp) == 0);
    CHECK(slurp(causal) != slurp(zp));

    std::string out1, out2;
    REQUIRE(cli("predict --model " + zp + " --input " +
                (kWork / "data/class_00/sample_0001.csv").string(), &out1) == 0);
    CHECK(out1.find("predicted: class_00") != std::string::npos);
}
