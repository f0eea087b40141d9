#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "support/stats.hpp"
#include "vid/errors.hpp"
#include "vid/sampler.hpp"

using namespace vid;

namespace {

SamplerConfig make_cfg(int l0, int inc_min, int inc_max, int k = 2) {
    SamplerConfig cfg;
    cfg.clip_len = l0;
    cfg.inc_min = inc_min;
    cfg.inc_max = inc_max;
    cfg.num_subclips = k;
    return cfg;
}

}  // namespace

TEST_CASE("select_location splits as expected") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    RngStream rng(0);
    bool saw_l1_5 = false;
    for (int i = 0; i < 2000 && !saw_l1_5; ++i) {
        const LocationSplit s = select_location(cfg, rng);
        CHECK(s.l1 >= 1);
        CHECK(s.l1 <= 15);
        CHECK(s.l1 + s.l2 == 16);
        CHECK(s.loc_label == s.l1 - 1);
        if (s.l1 == 5) {
            CHECK(s.l2 == 11);
            CHECK(s.loc_label == 4);
            saw_l1_5 = true;
        }
    }
    CHECK(saw_l1_5);
}

TEST_CASE("select_location with l0=2 has a single outcome") {
    const SamplerConfig cfg = make_cfg(2, 1, 1);
    RngStream rng(1);
    for (int i = 0; i < 20; ++i) {
        const LocationSplit s = select_location(cfg, rng);
        CHECK(s.l1 == 1);
        CHECK(s.l2 == 1);
        CHECK(s.loc_label == 0);
    }
}

TEST_CASE("select_location rejects l0 < 2") {
    SamplerConfig cfg = make_cfg(2, 1, 1);
    cfg.clip_len = 1;
    RngStream rng(0);
    CHECK_THROWS_AS(select_location(cfg, rng), ConfigError);
}

TEST_CASE("location label is uniform (chi-square)") {
    const SamplerConfig cfg = make_cfg(8, 1, 2);
    RngStream rng(123);
    std::vector<long> counts(7, 0);
    for (int i = 0; i < 100000; ++i) ++counts[static_cast<std::size_t>(select_location(cfg, rng).loc_label)];
    CHECK(testsupport::chi_square_uniform_pvalue(counts) > 0.01);
}

TEST_CASE("range_first reserves frames for the second sub-clip") {
    CHECK(range_first(make_cfg(16, 3, 10), 64, 11).lo == 1);
    CHECK(range_first(make_cfg(16, 3, 10), 64, 11).hi == 50);
    CHECK(range_first(make_cfg(12, 3, 10), 16, 4).hi == 9);  // 16 - 3 - 4
}

TEST_CASE("range_first at the tightest feasible video forces one placement") {
    // T = l0 + inc_min with l1 = 1, l2 = l0 - 1
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const IndexRange r = range_first(cfg, 19, 15);
    CHECK(r.lo == 1);
    CHECK(r.hi == 1);
    RngStream rng(0);
    const SubClipPlan p = sample_first(r, 1, rng);
    CHECK(p.start == 1);
    CHECK(p.length == 1);
}

TEST_CASE("range_first reports an infeasible raw video") {
    CHECK_THROWS_AS(range_first(make_cfg(16, 3, 10), 18, 11), InfeasibleError);
}

TEST_CASE("sample_first places within the range") {
    const IndexRange r{1, 50};
    RngStream rng(7);
    bool saw_start_10 = false;
    for (int i = 0; i < 5000; ++i) {
        const SubClipPlan p = sample_first(r, 5, rng);
        CHECK(p.start >= 1);
        CHECK(p.last() <= 50);
        CHECK(p.frame_indices().size() == 5);
        if (p.start == 10) {
            const auto idx = p.frame_indices();
            CHECK(idx.front() == 10);
            CHECK(idx.back() == 14);
            saw_start_10 = true;
        }
    }
    CHECK(saw_start_10);
}

TEST_CASE("sample_first forced placement and infeasible range") {
    RngStream rng(0);
    const SubClipPlan p = sample_first({1, 5}, 5, rng);
    CHECK(p.start == 1);
    CHECK_THROWS_AS(sample_first({1, 4}, 5, rng), InfeasibleError);
}

TEST_CASE("sample_first start is uniform (chi-square)") {
    RngStream rng(99);
    std::vector<long> counts(8, 0);  // starts 1..8 for range [1,10], l1=3
    for (int i = 0; i < 100000; ++i)
        ++counts[static_cast<std::size_t>(sample_first({1, 10}, 3, rng).start - 1)];
    CHECK(testsupport::chi_square_uniform_pvalue(counts) > 0.01);
}

TEST_CASE("range_second bounds") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const IndexRange t2 = range_second(cfg, 64, 14, 11);
    CHECK(t2.lo == 18);
    CHECK(t2.hi == 35);
    // start interval [18, 25]
    RngStream rng(0);
    std::set<int> starts;
    for (int i = 0; i < 5000; ++i) starts.insert(sample_second(t2, 11, rng).start);
    CHECK(*starts.begin() == 18);
    CHECK(*starts.rbegin() == 25);
}

TEST_CASE("range_second forced placement at the video end") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const IndexRange t2 = range_second(cfg, 18, 14, 1);
    RngStream rng(0);
    for (int i = 0; i < 10; ++i) CHECK(sample_second(t2, 1, rng).start == 18);
}

TEST_CASE("range_second start interval covers exactly the admissible gaps") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const IndexRange t2 = range_second(cfg, 100, 5, 2);
    RngStream rng(4);
    std::set<int> gaps;
    for (int i = 0; i < 20000; ++i) {
        const SubClipPlan p = sample_second(t2, 2, rng);
        CHECK(p.start >= 9);
        CHECK(p.start <= 16);
        gaps.insert(p.start - 5 - 1);
    }
    CHECK(gaps == std::set<int>({3, 4, 5, 6, 7, 8, 9, 10}));
}

TEST_CASE("range_second rejects an over-late first sub-clip") {
    CHECK_THROWS_AS(range_second(make_cfg(16, 3, 10), 20, 14, 4), InfeasibleError);
}

TEST_CASE("assemble computes skipped-frame gap and labels") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const SubClipPlan first{10, 5};   // ends at 14
    const SubClipPlan second{20, 11};  // gap = 20 - 14 - 1 = 5
    const IncoherentSample s = assemble("v", first, second, cfg);
    CHECK(s.inc_len(cfg) == 5);
    CHECK(s.len_label() == 2);
    CHECK(s.loc_label() == 4);
    CHECK(s.total_len == 16);
    s.validate(cfg, 64);
}

TEST_CASE("assemble boundary gaps give extreme length labels") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const SubClipPlan first{1, 5};  // m1 = 5
    CHECK(assemble("v", first, {5 + 3 + 1, 11}, cfg).len_label() == 0);
    CHECK(assemble("v", first, {5 + 10 + 1, 11}, cfg).len_label() == 7);
}

TEST_CASE("assemble rejects bad plans") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    CHECK_THROWS_AS(assemble("v", {10, 5}, {12, 11}, cfg), InfeasibleError);  // overlap
    CHECK_THROWS_AS(assemble("v", {10, 5}, {16, 11}, cfg), InfeasibleError);  // gap 1 < inc_min
    CHECK_THROWS_AS(assemble("v", {10, 5}, {26, 11}, cfg), InfeasibleError);  // gap 11 > inc_max
    CHECK_THROWS_AS(assemble("v", {10, 5}, {20, 4}, cfg), InfeasibleError);   // lengths != l0
}

TEST_CASE("generate satisfies every invariant across draws") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const RngStream master(2024);
    for (int i = 0; i < 10000; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const IncoherentSample s = generate(cfg, 64, "v", r);
        s.validate(cfg, 64);
        const auto idx = s.frame_indices();
        for (std::size_t j = 1; j < idx.size(); ++j) CHECK(idx[j] > idx[j - 1]);
    }
}

TEST_CASE("generate near the minimum raw length never errors") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const RngStream master(5);
    for (int i = 0; i < 20000; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const IncoherentSample s = generate(cfg, 19, "v", r);
        s.validate(cfg, 19);
        CHECK(s.inc_len(cfg) >= 3);
        CHECK(s.inc_len(cfg) <= 10);
    }
}

TEST_CASE("generate rejects a too-short raw video") {
    RngStream rng(0);
    CHECK_THROWS_AS(generate(make_cfg(16, 3, 10), 18, "v", rng), InfeasibleError);
}

TEST_CASE("generate is deterministic given the seed") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    RngStream a(77), b(77);
    for (int i = 0; i < 200; ++i) {
        const IncoherentSample sa = generate(cfg, 48, "v", a);
        const IncoherentSample sb = generate(cfg, 48, "v", b);
        CHECK(sample_key(sa) == sample_key(sb));
    }
}

TEST_CASE("location label stays uniform through generate, regardless of T") {
    const SamplerConfig cfg = make_cfg(8, 1, 2);
    for (int raw_len : {9, 12, 40}) {
        RngStream rng(static_cast<std::uint64_t>(raw_len));
        std::vector<long> counts(7, 0);
        for (int i = 0; i < 100000; ++i)
            ++counts[static_cast<std::size_t>(generate(cfg, raw_len, "v", rng).loc_label())];
        CHECK(testsupport::chi_square_uniform_pvalue(counts) > 0.01);
    }
}

TEST_CASE("every length label is reachable when T >= l0 + inc_max") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    RngStream rng(31);
    std::set<int> labels;
    for (int i = 0; i < 50000; ++i) labels.insert(generate(cfg, 26, "v", rng).len_label());
    CHECK(labels == std::set<int>({0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST_CASE("generate supports more than two sub-clips") {
    const SamplerConfig cfg = make_cfg(12, 2, 4, 3);
    const RngStream master(8);
    for (int i = 0; i < 5000; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const IncoherentSample s = generate(cfg, 40, "v", r);
        s.validate(cfg, 40);
        CHECK(s.subclips.size() == 3);
        CHECK(s.loc_labels.size() == 2);
    }
}

TEST_CASE("plan lines round-trip") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    RngStream rng(3);
    for (int i = 0; i < 100; ++i) {
        const IncoherentSample s = generate(cfg, 64, "vid7", rng);
        const std::string line = to_plan_line(s, cfg);
        const IncoherentSample back = parse_plan_line(line);
        CHECK(back.source_id == s.source_id);
        CHECK(sample_key(back) == sample_key(s));
        CHECK(back.loc_labels == s.loc_labels);
        CHECK(back.len_labels == s.len_labels);
    }
}

TEST_CASE("plan line golden value") {
    const SamplerConfig cfg = make_cfg(16, 3, 10);
    const IncoherentSample s = assemble("vid0", {10, 5}, {20, 11}, cfg);
    CHECK(to_plan_line(s, cfg) == "vid0,16,2,4,2,10-14,20-30");
}

TEST_CASE("malformed plan lines are rejected") {
    CHECK_THROWS_AS(parse_plan_line("vid0,16,2,4"), FormatError);
    CHECK_THROWS_AS(parse_plan_line("vid0,16,2,4,2,1014,20-30"), FormatError);
    CHECK_THROWS_AS(parse_plan_line("vid0,16,x,4,2,10-14,20-30"), FormatError);
}
