#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sparsegen/dataset.hpp"
#include "sparsegen/util.hpp"

using namespace sparsegen;
using testutil::TempDir;

TEST_CASE("load_dataset: empty file gives an empty list") {
    TempDir dir("ds");
    write_file(dir.file("d.jsonl"), "");
    CHECK(load_dataset(dir.file("d.jsonl")).empty());
}

TEST_CASE("load_dataset: well-formed lines load in file order") {
    TempDir dir("ds");
    // Expected values written out by hand, independently of the writer path.
    write_file(dir.file("d.jsonl"),
               "{\"id\":\"a\",\"input\":\"one plus one\",\"output\":\"2\"}\n"
               "{\"id\":\"b\",\"input\":\"two plus two\",\"output\":\"4\"}\n"
               "{\"id\":\"c\",\"input\":\"three\",\"output\":\"3\"}\n");
    auto ds = load_dataset(dir.file("d.jsonl"));
    REQUIRE(ds.size() == 3);
    CHECK(ds[0].id == "a");
    CHECK(ds[0].input == "one plus one");
    CHECK(ds[0].output == "2");
    CHECK(ds[1].id == "b");
    CHECK(ds[2].id == "c");
    CHECK(ds[2].output == "3");
}

TEST_CASE("load_dataset: missing field names the line") {
    TempDir dir("ds");
    write_file(dir.file("d.jsonl"),
               "{\"id\":\"a\",\"input\":\"x\",\"output\":\"y\"}\n"
               "{\"id\":\"b\",\"input\":\"x\"}\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("d.jsonl")), "line 2: missing field output",
                         ConfigError);
}

TEST_CASE("load_dataset: malformed JSON names the line") {
    TempDir dir("ds");
    write_file(dir.file("d.jsonl"), "{\"id\":\"a\",\"input\":\"x\",\"output\":\"y\"}\nnot json\n");
    try {
        load_dataset(dir.file("d.jsonl"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("load_dataset: duplicate ids are rejected by name") {
    TempDir dir("ds");
    write_file(dir.file("d.jsonl"),
               "{\"id\":\"dup\",\"input\":\"x\",\"output\":\"y\"}\n"
               "{\"id\":\"dup\",\"input\":\"z\",\"output\":\"w\"}\n");
    CHECK_THROWS_WITH_AS(load_dataset(dir.file("d.jsonl")), "duplicate id: dup", ConfigError);
}

TEST_CASE("load_dataset: missing ids become row-<line>, empty input rejected") {
    TempDir dir("ds");
    write_file(dir.file("d.jsonl"),
               "{\"input\":\"x\",\"output\":\"y\"}\n"
               "{\"input\":\"z\",\"output\":\"w\"}\n");
    auto ds = load_dataset(dir.file("d.jsonl"));
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].id == "row-1");
    CHECK(ds[1].id == "row-2");

    write_file(dir.file("e.jsonl"), "{\"input\":\"\",\"output\":\"y\"}\n");
    CHECK_THROWS_AS(load_dataset(dir.file("e.jsonl")), ConfigError);
}

namespace {

SyntheticExample sample_synthetic(int i) {
    SyntheticExample ex;
    ex.id = "gen-" + std::to_string(i);
    ex.question = "What is " + std::to_string(i) + " plus " + std::to_string(i) + "?";
    ex.answer = "Adding the two values gives " + std::to_string(2 * i) + ".";
    ex.final_answer = std::to_string(2 * i);
    if (i % 2 == 0) {
        ex.provenance.region_id = "r" + std::to_string(i);
        ex.provenance.seed_ids = {"s1", "s2"};
        ex.provenance.method = GenerationMethod::embed_sdg;
        ex.provenance.decoded_text = "decoded " + std::to_string(i);
    } else {
        ex.provenance.seed_ids = {"s1"};
        ex.provenance.method = GenerationMethod::random_baseline;
    }
    return ex;
}

}  // namespace

TEST_CASE("save_dataset: empty list writes an empty file and returns 0") {
    TempDir dir("ds");
    CHECK(save_dataset({}, dir.file("out.jsonl")) == 0);
    CHECK(read_file(dir.file("out.jsonl")).empty());
}

TEST_CASE("save_dataset round-trips field by field") {
    TempDir dir("ds");
    std::vector<SyntheticExample> xs;
    for (int i = 0; i < 7; ++i) xs.push_back(sample_synthetic(i));
    CHECK(save_dataset(xs, dir.file("out.jsonl")) == 7);
    auto back = load_synthetic(dir.file("out.jsonl"));
    REQUIRE(back.size() == xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
        CHECK(back[i].id == xs[i].id);
        CHECK(back[i].question == xs[i].question);
        CHECK(back[i].answer == xs[i].answer);
        CHECK(back[i].final_answer == xs[i].final_answer);
        CHECK(back[i].provenance.region_id == xs[i].provenance.region_id);
        CHECK(back[i].provenance.seed_ids == xs[i].provenance.seed_ids);
        CHECK(back[i].provenance.method == xs[i].provenance.method);
        CHECK(back[i].provenance.decoded_text == xs[i].provenance.decoded_text);
    }
}

TEST_CASE("save_dataset is deterministic and writes one line per record") {
    TempDir dir("ds");
    std::vector<SyntheticExample> xs;
    for (int i = 0; i < 500; ++i) xs.push_back(sample_synthetic(i));
    save_dataset(xs, dir.file("a.jsonl"));
    save_dataset(xs, dir.file("b.jsonl"));
    std::string a = read_file(dir.file("a.jsonl"));
    CHECK(a == read_file(dir.file("b.jsonl")));
    CHECK(std::count(a.begin(), a.end(), '\n') == 500);
}

TEST_CASE("save_dataset enforces the record invariants") {
    TempDir dir("ds");
    SyntheticExample bad = sample_synthetic(2);
    bad.provenance.seed_ids = {"only-one"};  // embed_sdg needs two
    CHECK_THROWS_AS(save_dataset({bad}, dir.file("out.jsonl")), ConfigError);

    SyntheticExample empty_q = sample_synthetic(3);
    empty_q.question.clear();
    CHECK_THROWS_AS(save_dataset({empty_q}, dir.file("out.jsonl")), ConfigError);
}
