#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "vid/errors.hpp"
#include "vid/sampler.hpp"

using namespace vid;

namespace {

SamplerConfig make_cfg(int l0, int inc_min, int inc_max) {
    SamplerConfig cfg;
    cfg.clip_len = l0;
    cfg.inc_min = inc_min;
    cfg.inc_max = inc_max;
    return cfg;
}

std::set<std::vector<int>> oracle_keys(const SamplerConfig& cfg, int raw_len) {
    std::set<std::vector<int>> keys;
    for (const auto& s : enumerate_valid(cfg, raw_len)) {
        s.validate(cfg, raw_len);
        keys.insert(sample_key(s));
    }
    return keys;
}

}  // namespace

TEST_CASE("smallest possible configuration yields exactly one sample") {
    const auto keys = oracle_keys(make_cfg(2, 1, 1), 3);
    REQUIRE(keys.size() == 1);
    CHECK(*keys.begin() == std::vector<int>({1, 3}));
}

TEST_CASE("oracle is empty below the minimum raw length") {
    CHECK(enumerate_valid(make_cfg(2, 1, 1), 2).empty());
    CHECK(enumerate_valid(make_cfg(16, 3, 10), 18).empty());
    CHECK(enumerate_valid(make_cfg(4, 2, 5), 5).empty());
}

TEST_CASE("oracle respects the tuple budget guard") {
    CHECK_THROWS_AS(enumerate_valid(make_cfg(16, 3, 10), 4000, 1000), std::length_error);
}

TEST_CASE("generate draws are sound and complete against the oracle") {
    const SamplerConfig cfg = make_cfg(3, 1, 2);
    const int raw_len = 6;
    const auto oracle = oracle_keys(cfg, raw_len);
    CHECK(!oracle.empty());

    std::set<std::vector<int>> seen;
    const RngStream master(17);
    for (int i = 0; i < 100000; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const auto key = sample_key(generate(cfg, raw_len, "v", r));
        CHECK(oracle.count(key) == 1);
        seen.insert(key);
    }
    CHECK(seen == oracle);
}

TEST_CASE("the oracle agrees with a hand count") {
    // l0=2, inc in [1,2], T=5: l1=l2=1, m1 in {1,2,3}, gap in {1,2}, end <= 5.
    // Pairs: (1,3) (1,4) (2,4) (2,5) (3,5) -> 5 samples.
    CHECK(oracle_keys(make_cfg(2, 1, 2), 5).size() == 5);
}

TEST_CASE("oracle/sampler equivalence over a small grid") {
    for (int l0 : {2, 3, 4}) {
        for (auto [lo, hi] : {std::pair<int, int>{1, 1}, {1, 2}, {3, 6}}) {
            const SamplerConfig cfg = make_cfg(l0, lo, hi);
            for (int raw_len = l0 + lo; raw_len <= l0 + hi + 3; ++raw_len) {
                const auto oracle = oracle_keys(cfg, raw_len);
                REQUIRE(!oracle.empty());
                std::set<std::vector<int>> seen;
                const RngStream master(static_cast<std::uint64_t>(l0 * 1000 + lo * 100 + hi * 10 + raw_len));
                const int draws = 4000 + 40 * static_cast<int>(oracle.size());
                for (int i = 0; i < draws; ++i) {
                    RngStream r = master.split(static_cast<std::uint64_t>(i));
                    const auto key = sample_key(generate(cfg, raw_len, "v", r));
                    CHECK(oracle.count(key) == 1);
                    seen.insert(key);
                }
                CHECK(seen.size() == oracle.size());
            }
        }
    }
}

TEST_CASE("oracle covers the k=3 generalization") {
    SamplerConfig cfg = make_cfg(6, 1, 2);
    cfg.num_subclips = 3;
    const auto oracle = oracle_keys(cfg, 12);
    CHECK(!oracle.empty());
    std::set<std::vector<int>> seen;
    const RngStream master(23);
    for (int i = 0; i < 60000; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const auto key = sample_key(generate(cfg, 12, "v", r));
        CHECK(oracle.count(key) == 1);
        seen.insert(key);
    }
    CHECK(seen == oracle);
}
