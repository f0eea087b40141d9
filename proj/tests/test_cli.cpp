#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support/dataset.hpp"
#include "vid/cli.hpp"
#include "vid/sampler.hpp"
#include "vid/video.hpp"

using namespace vid;
using vid::testsupport::ScratchDir;

namespace {

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("sample subcommand emits invariant-satisfying plan lines") {
    std::string out;
    const int code = run({"sample", "--T", "64", "--l0", "16", "--inc-min", "3", "--inc-max", "10",
                          "--seed", "7", "--n", "3"},
                         &out);
    CHECK(code == 0);
    const auto lines = lines_of(out);
    REQUIRE(lines.size() == 3);
    SamplerConfig cfg;
    cfg.clip_len = 16;
    cfg.inc_min = 3;
    cfg.inc_max = 10;
    for (const auto& line : lines) {
        const IncoherentSample s = parse_plan_line(line);
        s.validate(cfg, 64);
    }
}

TEST_CASE("sample is deterministic per seed") {
    std::string a, b, c;
    run({"sample", "--T", "40", "--seed", "5", "--n", "4"}, &a);
    run({"sample", "--T", "40", "--seed", "5", "--n", "4"}, &b);
    run({"sample", "--T", "40", "--seed", "6", "--n", "4"}, &c);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("unknown flags produce usage text and a nonzero exit") {
    std::string out, err;
    const int code = run({"sample", "--T", "64", "--bogus"}, &out, &err);
    CHECK(code != 0);
    CHECK((out + err).find("--bogus") != std::string::npos);
    CHECK((out + err).find("--help") != std::string::npos);

    std::string help;
    CHECK(run({"--help"}, &help) == 0);
    CHECK(help.find("Usage") != std::string::npos);
    for (const char* sub : {"gen-data", "sample", "pretrain", "grad-check", "probe", "retrieve", "ablate"})
        CHECK(help.find(sub) != std::string::npos);
}

TEST_CASE("missing subcommand fails") {
    std::string out, err;
    CHECK(run({}, &out, &err) != 0);
}

TEST_CASE("infeasible sample request reports an error") {
    std::string out, err;
    const int code = run({"sample", "--T", "10", "--l0", "16"}, &out, &err);
    CHECK(code != 0);
    CHECK(err.find("error") != std::string::npos);
}

TEST_CASE("gen-data writes readable videos and manifests") {
    ScratchDir tmp("vidclidata");
    std::string out;
    const int code = run({"gen-data", "--out", tmp.path.string(), "--classes", "4", "--videos", "8",
                          "--test-videos", "4", "--frames", "20", "--height", "16", "--width", "16",
                          "--seed", "3"},
                         &out);
    CHECK(code == 0);
    const auto train = read_manifest(tmp.path / "manifest.txt");
    const auto test = read_manifest(tmp.path / "manifest_test.txt");
    REQUIRE(train.size() == 8);
    REQUIRE(test.size() == 4);
    const VideoTensor v = read_video(train[0].path);
    CHECK(v.t == 20);
    CHECK(v.h == 16);
    CHECK(v.w == 16);
    // classes cycle
    CHECK(train[0].class_id == 0);
    CHECK(train[5].class_id == 1);
}

TEST_CASE("gen-data is deterministic per seed") {
    ScratchDir a("vidclia"), b("vidclib");
    run({"gen-data", "--out", a.path.string(), "--videos", "2", "--frames", "12", "--seed", "9"});
    run({"gen-data", "--out", b.path.string(), "--videos", "2", "--frames", "12", "--seed", "9"});
    const VideoTensor va = read_video(read_manifest(a.path / "manifest.txt")[0].path);
    const VideoTensor vb = read_video(read_manifest(b.path / "manifest.txt")[0].path);
    CHECK(va == vb);
}

TEST_CASE("grad-check subcommand passes and prints per-op lines") {
    std::string out;
    const int code = run({"grad-check", "--seed", "3"}, &out);
    CHECK(code == 0);
    CHECK(out.find("conv3d") != std::string::npos);
    CHECK(out.find("icl_loss") != std::string::npos);
    CHECK(out.find("FAIL") == std::string::npos);
}
