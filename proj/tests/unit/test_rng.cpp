#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "textaug/rng.hpp"

using namespace textaug;

TEST_SUITE("rng") {

TEST_CASE("same key replays the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive depends on the key, not on draws already made") {
    Rng a(7);
    Rng b(7);
    (void)b.next_u64();
    (void)b.next_u64();
    CHECK(a.derive("tag").next_u64() == b.derive("tag").next_u64());
    CHECK(a.derive("tag").next_u64() != a.derive("other").next_u64());
    CHECK(a.derive("x", "1").next_u64() != a.derive("x", "2").next_u64());
}

TEST_CASE("below stays in range") {
    Rng rng(3);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{17}, std::size_t{1000}}) {
        for (int i = 0; i < 200; ++i) CHECK(rng.below(n) < n);
    }
    CHECK_THROWS(rng.below(0));
}

TEST_CASE("next_double lies in [0, 1)") {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        double x = rng.next_double();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("choose returns k distinct indices below n") {
    Rng rng(5);
    auto picks = rng.choose(20, 8);
    CHECK(picks.size() == 8);
    std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 8);
    for (auto p : picks) CHECK(p < 20);
    CHECK_THROWS(rng.choose(3, 4));

    auto all = Rng(9).choose(6, 6);
    std::sort(all.begin(), all.end());
    CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("shuffle permutes") {
    std::vector<int> v{1, 2, 3, 4, 5, 6, 7, 8};
    auto orig = v;
    Rng rng(13);
    rng.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == orig);
}

TEST_CASE("normal draws have sane moments") {
    Rng rng(17);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double x = rng.normal();
        sum += x;
        sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
}

}  // TEST_SUITE
