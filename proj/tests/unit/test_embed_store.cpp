#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "textaug/embed_store.hpp"
#include "textaug/errors.hpp"
#include "textaug/rng.hpp"

using namespace textaug;
using test_helpers::TempFile;
using test_helpers::fixture;

namespace {

EmbeddingStore toy_store() {
    return EmbeddingStore::load_word2vec(fixture("vectors_toy.txt"));
}

}  // namespace

TEST_SUITE("embed_store") {

TEST_CASE("loads the toy word2vec file") {
    auto store = toy_store();
    CHECK(store.dim() == 4);
    CHECK(store.vocab_size() == 5);
    CHECK(store.vector_of("alpha") == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("ragged rows are rejected with the line number") {
    TempFile f("ragged.txt", "alpha 1 0 0 0\nbeta 1 0 0\n");
    CHECK_THROWS_WITH_AS(EmbeddingStore::load_word2vec(f.path()), doctest::Contains("line 2"),
                         IngestError);
}

TEST_CASE("zero vectors are rejected at load") {
    TempFile f("zero.txt", "alpha 0 0 0\n");
    CHECK_THROWS_WITH_AS(EmbeddingStore::load_word2vec(f.path()), doctest::Contains("zero"),
                         IngestError);
}

TEST_CASE("duplicate words: last write wins, counted") {
    TempFile f("dup.txt", "alpha 1 0\nalpha 0 1\nbeta 1 1\n");
    auto store = EmbeddingStore::load_word2vec(f.path());
    CHECK(store.vocab_size() == 2);
    CHECK(store.duplicate_count() == 1);
    CHECK(store.vector_of("alpha") == std::vector<double>{0.0, 1.0});
}

TEST_CASE("cosine matches hand values") {
    CHECK(cosine({1, 0}, {1, 0}) == doctest::Approx(1.0));
    CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine({1, 2, 3}, {4, 5, 6}) == doctest::Approx(0.9746318).epsilon(1e-6));
    CHECK_THROWS_AS(cosine({0, 0}, {1, 0}), DomainError);
    CHECK_THROWS_AS(cosine({1, 0}, {1, 0, 0}), DomainError);
}

TEST_CASE("cosine is symmetric and scale invariant") {
    Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(6), b(6);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        double lambda = 0.25 + 4.0 * rng.next_double();
        CHECK(cosine(a, b) == doctest::Approx(cosine(b, a)).epsilon(1e-12));
        auto scaled = a;
        for (auto& x : scaled) x *= lambda;
        CHECK(cosine(scaled, b) == doctest::Approx(cosine(a, b)).epsilon(1e-9));
        CHECK(cosine(a, b) >= -1.0 - 1e-12);
        CHECK(cosine(a, b) <= 1.0 + 1e-12);
    }
}

TEST_CASE("top_n_neighbors matches a hand-computed order") {
    auto store = toy_store();
    auto top = top_n_neighbors(store, "alpha", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == "alef");  // nearly parallel
    CHECK(top[0].second == doctest::Approx(cosine(store.vector_of("alpha"),
                                                  store.vector_of("alef"))));
    CHECK(top[1].second <= top[0].second);
}

TEST_CASE("n larger than the vocabulary returns everyone else") {
    auto store = toy_store();
    auto top = top_n_neighbors(store, "alpha", 50);
    CHECK(top.size() == store.vocab_size() - 1);
    for (const auto& [w, s] : top) CHECK(w != "alpha");
}

TEST_CASE("identical vectors tie-break lexicographically") {
    TempFile f("tie.txt", "query 1 0\nzeta 0.5 0.5\napple 0.5 0.5\n");
    auto store = EmbeddingStore::load_word2vec(f.path());
    auto top = top_n_neighbors(store, "query", 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].first == "apple");
    CHECK(top[1].first == "zeta");
}

TEST_CASE("top_n_neighbors equals a brute-force scan") {
    auto store = EmbeddingStore::load_word2vec(fixture("vectors_fixture.txt"));
    const std::string query = "knee";
    auto got = top_n_neighbors(store, query, 10);

    std::vector<std::pair<std::string, double>> brute;
    for (const auto& w : store.vocabulary()) {
        if (w == query) continue;
        brute.emplace_back(w, cosine(store.vector_of(query), store.vector_of(w)));
    }
    std::stable_sort(brute.begin(), brute.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    brute.resize(10);
    REQUIRE(got.size() == brute.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].first == brute[i].first);
        CHECK(got[i].second == doctest::Approx(brute[i].second).epsilon(1e-12));
    }
}

TEST_CASE("out-of-vocabulary queries fail") {
    auto store = toy_store();
    CHECK_THROWS_AS(top_n_neighbors(store, "missing", 3), DomainError);
}

TEST_CASE("lookup is case-folded with exact-case preference") {
    TempFile f("case.txt", "Apple 1 0\napple 0 1\nBanana 1 1\n");
    auto store = EmbeddingStore::load_word2vec(f.path());
    CHECK(*store.resolve("Apple") == "Apple");
    CHECK(*store.resolve("apple") == "apple");
    CHECK(*store.resolve("Banana") == "Banana");
    CHECK(!store.resolve("banana").has_value());  // folding only lowercases
    CHECK(*store.resolve("APPLE") == "apple");
}

TEST_CASE("sentence_embed pools token vectors") {
    auto store = toy_store();
    CHECK(sentence_embed(store, "alpha") == store.vector_of("alpha"));
    auto mean = sentence_embed(store, "alpha beta");
    CHECK(mean == std::vector<double>{0.5, 0.5, 0.0, 0.0});
    CHECK_THROWS_AS(sentence_embed(store, "zzz qqq"), DomainError);
}

TEST_CASE("sentence_embed is exactly permutation invariant") {
    auto store = EmbeddingStore::load_word2vec(fixture("vectors_fixture.txt"));
    auto a = sentence_embed(store, "my knee hurts when i bend it");
    auto b = sentence_embed(store, "it bend i when hurts knee my");
    CHECK(a == b);
}

TEST_CASE("precomputed sentence vectors win over pooling") {
    auto store = toy_store();
    TempFile f("sent.jsonl", R"({"id":"s1","vector":[9,9,9,9]})"
                             "\n");
    store.merge_sentence_jsonl(f.path());
    CHECK(sentence_embed(store, "alpha beta", "s1") == std::vector<double>{9, 9, 9, 9});
    CHECK(sentence_embed(store, "alpha beta", "s2") == std::vector<double>{0.5, 0.5, 0, 0});
    // id present but all tokens OOV still works through the file vector
    CHECK(sentence_embed(store, "zzz", "s1") == std::vector<double>{9, 9, 9, 9});
}

}  // TEST_SUITE
