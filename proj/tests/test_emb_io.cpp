#include <bit>

#include "doctest.h"
#include "helpers.hpp"
#include "sparsegen/emb_io.hpp"
#include "sparsegen/providers.hpp"
#include "sparsegen/util.hpp"

using namespace sparsegen;
using testutil::TempDir;

namespace {

bool bit_equal(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<uint32_t>(a[i]) != std::bit_cast<uint32_t>(b[i])) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("EMB1 round-trips bit-exactly, including 1x1 edge shapes") {
    Rng rng(23);
    std::vector<TokenizedEmbedding> records;
    records.push_back(testutil::random_embedding(rng, "", 1, 1));  // empty id is legal
    records.push_back(testutil::random_embedding(rng, "one-dim", 1, 9));
    records.push_back(testutil::random_embedding(rng, "one-token", 17, 1));
    for (int i = 0; i < 20; ++i) {
        records.push_back(testutil::random_embedding(rng, "r" + std::to_string(i),
                                                     uint32_t(1 + rng.below(40)),
                                                     uint32_t(1 + rng.below(12)), false));
    }
    TempDir dir("emb");
    write_emb1(dir.file("x.emb"), records);
    auto back = read_emb1(dir.file("x.emb"));
    REQUIRE(back.size() == records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].example_id == records[i].example_id);
        CHECK(back[i].n_dim == records[i].n_dim);
        CHECK(back[i].m_tokens == records[i].m_tokens);
        CHECK(bit_equal(back[i].matrix, records[i].matrix));
        CHECK(bit_equal(back[i].weights, records[i].weights));
    }
}

TEST_CASE("EMB1 header layout is exactly as documented") {
    TokenizedEmbedding te;
    te.example_id = "ab";
    te.n_dim = 1;
    te.m_tokens = 1;
    te.matrix = {1.0f};
    te.weights = {0.5f};
    std::string bytes = emb1_encode({te});
    // magic, count=1, id_len=2, "ab", n_dim=1, m=1, 1.0f, 0.5f
    REQUIRE(bytes.size() == 4 + 4 + 4 + 2 + 4 + 4 + 4 + 4);
    CHECK(bytes.substr(0, 4) == "EMB1");
    CHECK(uint8_t(bytes[4]) == 1);
    CHECK(uint8_t(bytes[8]) == 2);
    CHECK(bytes.substr(12, 2) == "ab");
    const uint32_t one_f32 = std::bit_cast<uint32_t>(1.0f);
    CHECK(uint8_t(bytes[22]) == ((one_f32 >> 0) & 0xff));
    CHECK(uint8_t(bytes[25]) == ((one_f32 >> 24) & 0xff));
}

TEST_CASE("EMB1 rejects corrupt input") {
    CHECK_THROWS_AS(emb1_decode("XXXX"), IoError);
    TokenizedEmbedding te;
    te.example_id = "a";
    te.n_dim = 2;
    te.m_tokens = 2;
    te.matrix = {1, 2, 3, 4};
    te.weights = {0.5f, 0.5f};
    std::string good = emb1_encode({te});
    CHECK_THROWS_AS(emb1_decode(good.substr(0, good.size() - 3)), IoError);
    CHECK_THROWS_AS(emb1_decode(good + "zz"), IoError);
}

TEST_CASE("file provider serves records in example order") {
    Rng rng(5);
    std::vector<TokenizedEmbedding> records = {
        testutil::random_embedding(rng, "a", 6, 3),
        testutil::random_embedding(rng, "b", 6, 5),
    };
    TempDir dir("emb");
    write_emb1(dir.file("x.emb"), records);

    FileEmbeddingProvider provider(dir.file("x.emb"));
    std::vector<Example> examples = {{"b", "text b", "out"}, {"a", "text a", "out"}};
    auto fetched = fetch_embeddings(provider, examples);
    REQUIRE(fetched.size() == 2);
    CHECK(fetched[0].example_id == "b");
    CHECK(fetched[1].example_id == "a");
    CHECK(bit_equal(fetched[0].matrix, records[1].matrix));

    std::vector<Example> missing = {{"zz", "text", "out"}};
    CHECK_THROWS_AS(fetch_embeddings(provider, missing), BackendError);
}

TEST_CASE("fetch_embeddings rejects inconsistent dimensionality") {
    Rng rng(6);
    std::vector<TokenizedEmbedding> records = {
        testutil::random_embedding(rng, "a", 6, 3),
        testutil::random_embedding(rng, "b", 7, 3),
    };
    TempDir dir("emb");
    write_emb1(dir.file("x.emb"), records);
    FileEmbeddingProvider provider(dir.file("x.emb"));
    std::vector<Example> examples = {{"a", "ta", "o"}, {"b", "tb", "o"}};
    CHECK_THROWS_AS(fetch_embeddings(provider, examples), BackendError);
}

TEST_CASE("fetch_embeddings retries transient failures and names the example") {
    struct Flaky : EmbeddingProvider {
        int calls = 0;
        TokenizedEmbedding embed(const Example& ex) override {
            ++calls;
            if (calls < 3) throw TransientBackendError("blip");
            Rng rng(1);
            return testutil::random_embedding(rng, ex.id, 4, 2);
        }
        std::string name() const override { return "flaky"; }
    };
    Flaky flaky;
    std::vector<Example> one = {{"only", "text", "out"}};
    FetchOptions opts;
    opts.parallelism = 1;
    opts.max_attempts = 3;
    auto got = fetch_embeddings(flaky, one, opts);
    CHECK(got.size() == 1);
    CHECK(flaky.calls == 3);

    struct Dead : EmbeddingProvider {
        TokenizedEmbedding embed(const Example&) override {
            throw TransientBackendError("down");
        }
        std::string name() const override { return "dead"; }
    };
    Dead dead;
    try {
        fetch_embeddings(dead, one, opts);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("only") != std::string::npos);
    }
}
