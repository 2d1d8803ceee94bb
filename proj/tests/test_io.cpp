#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "grid/io.hpp"
#include "grid/model_io.hpp"
#include "grid/synth.hpp"

using namespace grid;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("/tmp") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("manifest parsing with comments, defaults and overrides") {
    TempDir tmp("grid_manifest_test");
    write_file(tmp.path / "m.txt",
               "# a comment\n"
               "root = data   # trailing comment\n"
               "classes = b, a\n"
               "sample_rate_hz = 250\n"
               "target_length = 64\n"
               "trim = head\n"
               "fx_column = force_x\n");
    const auto m = parse_manifest((tmp.path / "m.txt").string());
    CHECK(m.root == (tmp.path / "data").string());
    CHECK(m.classes == std::vector<std::string>{"b", "a"});
    CHECK(m.sample_rate_hz == 250.0);
    CHECK(m.target_length == 64);
    CHECK(m.trim == LengthAlign::Head);
    CHECK(m.channel_columns[0] == "force_x");
    CHECK(m.channel_columns[1] == "Fy");
}

TEST_CASE("synth-written CSVs ingest back to an equal dataset") {
    TempDir tmp("grid_roundtrip_test");
    const auto synth = generate_dataset(3, 5, 1.5, 91);
    write_dataset_csv(synth.dataset, tmp.path.string());

    const Dataset back = ingest(parse_manifest((tmp.path / "manifest.txt").string()));
    REQUIRE(back.classes == synth.dataset.classes);
    REQUIRE(back.samples.size() == synth.dataset.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i) {
        CHECK(back.samples[i].label == synth.dataset.samples[i].label);
        for (std::size_t c = 0; c < kNumChannels; ++c)
            CHECK(back.samples[i].signal.channels[c] ==
                  synth.dataset.samples[i].signal.channels[c]);  // bit-exact
    }
}

TEST_CASE("ingest applies the trim policy to long recordings") {
    TempDir tmp("grid_trim_test");
    std::string csv = "time,Fx,Fy,Fz,Tx,Ty,Tz\n";
    for (int i = 0; i < 80; ++i) {
        csv += std::to_string(0.002 * i);
        for (int c = 0; c < 6; ++c) csv += "," + std::to_string(i + c * 1000);
        csv += "\n";
    }
    write_file(tmp.path / "data" / "stuff" / "r0.csv", csv);
    write_file(tmp.path / "m.txt",
               "root = data\ntarget_length = 64\ntrim = end\n");
    const Dataset ds = ingest(parse_manifest((tmp.path / "m.txt").string()));
    REQUIRE(ds.samples.size() == 1);
    const auto& sig = ds.samples[0].signal;
    REQUIRE(sig.n_samples() == 64);
    CHECK(sig.channels[0].front() == 16.0);  // last 64 of 80 rows kept
    CHECK(sig.channels[0].back() == 79.0);
    CHECK(ds.classes == std::vector<std::string>{"stuff"});
}

TEST_CASE("ingest errors cite the offending file and line") {
    TempDir tmp("grid_badrow_test");
    write_file(tmp.path / "data" / "a" / "r0.csv",
               "time,Fx,Fy,Fz,Tx,Ty,Tz\n"
               "0.0,1,2,3,4,5,6\n"
               "0.002,1,oops,3,4,5,6\n");
    write_file(tmp.path / "m.txt", "root = data\ntarget_length = 2\n");
    try {
        ingest(parse_manifest((tmp.path / "m.txt").string()));
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("r0.csv:3") != std::string::npos);
        CHECK(msg.find("oops") != std::string::npos);
    }
}

TEST_CASE("ingest reports a missing column by name") {
    TempDir tmp("grid_badcol_test");
    write_file(tmp.path / "data" / "a" / "r0.csv",
               "time,Fx,Fy,Fz,Tx,Ty\n0,1,2,3,4,5\n");
    write_file(tmp.path / "m.txt", "root = data\ntarget_length = 1\n");
    CHECK_THROWS_WITH_AS(ingest(parse_manifest((tmp.path / "m.txt").string())),
                         doctest::Contains("Tz"), std::runtime_error);
}

TEST_CASE("ingest rejects classes with zero samples") {
    TempDir tmp("grid_empty_class_test");
    fs::create_directories(tmp.path / "data" / "empty");
    write_file(tmp.path / "m.txt", "root = data\n");
    CHECK_THROWS_WITH_AS(ingest(parse_manifest((tmp.path / "m.txt").string())),
                         doctest::Contains("zero samples"), std::runtime_error);
}

TEST_CASE("discovered class names follow the public dataset order") {
    TempDir tmp("grid_order_test");
    const char* names[] = {"dry_peas",  "rice",      "wheat_flour",
                           "clay_granules", "oat_flakes", "potting_gravel",
                           "sunflower_seeds", "breadcrumbs", "macaroni",
                           "fine_sugar", "cat_litter"};
    const std::string row = "time,Fx,Fy,Fz,Tx,Ty,Tz\n0,1,2,3,4,5,6\n";
    for (const char* name : names)
        write_file(tmp.path / "data" / name / "r.csv", row);
    write_file(tmp.path / "m.txt", "root = data\ntarget_length = 1\n");
    const Dataset ds = ingest(parse_manifest((tmp.path / "m.txt").string()));
    REQUIRE(ds.classes.size() == 11);
    for (std::size_t k = 0; k < 11; ++k) CHECK(ds.classes[k] == names[k]);
}

TEST_CASE("dataset container round-trips bit-exactly") {
    const auto synth = generate_dataset(3, 4, 1.0, 55);
    const std::string path = "/tmp/grid_dataset_roundtrip.bin";
    save_dataset(synth.dataset, path);
    const Dataset back = load_dataset(path);
    CHECK(back.classes == synth.dataset.classes);
    REQUIRE(back.samples.size() == synth.dataset.samples.size());
    for (std::size_t i = 0; i < back.samples.size(); ++i) {
        CHECK(back.samples[i].label == synth.dataset.samples[i].label);
        CHECK(back.samples[i].source_id == synth.dataset.samples[i].source_id);
        for (std::size_t c = 0; c < kNumChannels; ++c)
            CHECK(back.samples[i].signal.channels[c] ==
                  synth.dataset.samples[i].signal.channels[c]);
    }

    // load_dataset_any sniffs containers vs manifests.
    const Dataset sniffed = load_dataset_any(path);
    CHECK(sniffed.samples.size() == back.samples.size());
}

TEST_CASE("a model container is not accepted as a dataset") {
    const auto synth = generate_dataset(2, 3, 1.0, 57);
    const std::string path = "/tmp/grid_kind_mismatch.bin";
    save_dataset(synth.dataset, path);
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("kind"),
                         std::runtime_error);
}
