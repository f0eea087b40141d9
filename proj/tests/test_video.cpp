#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "vid/errors.hpp"
#include "vid/video.hpp"

using namespace vid;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("vidtest_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

VideoTensor ramp_video(int t, int h, int w, int c) {
    VideoTensor v = VideoTensor::make_u8(t, h, w, c);
    for (std::size_t i = 0; i < v.u8.size(); ++i) v.u8[i] = static_cast<std::uint8_t>(i * 7 % 251);
    return v;
}

}  // namespace

TEST_CASE("VIDT round trip is bit-identical") {
    TempDir tmp;
    const VideoTensor v = ramp_video(4, 8, 8, 3);
    write_video(v, tmp.path / "a.vidt");
    CHECK(read_video(tmp.path / "a.vidt") == v);
}

TEST_CASE("VIDT round trips the minimal tensor") {
    TempDir tmp;
    const VideoTensor v = ramp_video(1, 1, 1, 1);
    write_video(v, tmp.path / "m.vidt");
    CHECK(read_video(tmp.path / "m.vidt") == v);
}

TEST_CASE("VIDT round trips f32 payloads") {
    TempDir tmp;
    VideoTensor v = VideoTensor::make_f32(2, 3, 4, 1);
    for (std::size_t i = 0; i < v.f32.size(); ++i) v.f32[i] = static_cast<float>(i) / 24.0f;
    write_video(v, tmp.path / "f.vidt");
    CHECK(read_video(tmp.path / "f.vidt") == v);
}

TEST_CASE("truncated payload is rejected") {
    TempDir tmp;
    const VideoTensor v = ramp_video(4, 8, 8, 3);
    write_video(v, tmp.path / "t.vidt");
    // chop off the last byte
    const auto full = fs::file_size(tmp.path / "t.vidt");
    fs::resize_file(tmp.path / "t.vidt", full - 1);
    CHECK_THROWS_AS(read_video(tmp.path / "t.vidt"), FormatError);
}

TEST_CASE("bad magic and version are rejected") {
    TempDir tmp;
    {
        std::ofstream os(tmp.path / "bad.vidt", std::ios::binary);
        os << "NOPE" << std::string(64, '\0');
    }
    CHECK_THROWS_AS(read_video(tmp.path / "bad.vidt"), FormatError);
    {
        const VideoTensor v = ramp_video(1, 2, 2, 1);
        write_video(v, tmp.path / "ver.vidt");
        std::fstream f(tmp.path / "ver.vidt", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(4);
        f.put(9);  // unsupported version
    }
    CHECK_THROWS_AS(read_video(tmp.path / "ver.vidt"), FormatError);
}

TEST_CASE("manifest round trips and resolves relative paths") {
    TempDir tmp;
    write_manifest(tmp.path / "m.txt", {{"videos/a.vidt", 3, 48}, {"videos/b.vidt", 1, 32}});
    const auto entries = read_manifest(tmp.path / "m.txt");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].path == (tmp.path / "videos/a.vidt").string());
    CHECK(entries[0].class_id == 3);
    CHECK(entries[0].frames == 48);
    CHECK(entries[1].class_id == 1);
}

TEST_CASE("constant-velocity path before any reflection") {
    const auto path = simulate_path({0.0, 0.0}, {0.0, 1.0}, 4, 0.0, 100.0, 0.0, 100.0);
    REQUIRE(path.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(path[static_cast<std::size_t>(i)].first == doctest::Approx(0.0));
        CHECK(path[static_cast<std::size_t>(i)].second == doctest::Approx(static_cast<double>(i)));
    }
}

TEST_CASE("reflection flips the velocity at the wall") {
    // Start one pixel from the wall, moving toward it with speed 2.
    const auto path = simulate_path({0.0, 9.0}, {0.0, 2.0}, 3, 0.0, 100.0, 0.0, 10.0);
    CHECK(path[0].second == doctest::Approx(9.0));
    CHECK(path[1].second == doctest::Approx(9.0));  // 11 reflects to 9
    CHECK(path[2].second == doctest::Approx(7.0));  // moving away after the bounce
}

TEST_CASE("gen_synthetic is deterministic and respects the spec") {
    SyntheticSpec spec;
    spec.frames = 6;
    spec.noise_std = 3.0;
    RngStream a(4), b(4);
    const VideoTensor va = gen_synthetic(spec, 2, a);
    const VideoTensor vb = gen_synthetic(spec, 2, b);
    CHECK(va == vb);
    CHECK(va.t == 6);
    CHECK(va.h == 32);
    CHECK(va.w == 32);
    CHECK(va.c == 1);
}

TEST_CASE("classes differ in shape or speed") {
    SyntheticSpec spec;
    CHECK(spec.class_shape(0) == spec.class_shape(4));
    CHECK(spec.class_speed(0) != spec.class_speed(4));
    CHECK(spec.class_shape(1) != spec.class_shape(0));
    CHECK(spec.class_speed(1) == spec.class_speed(2));
}

TEST_CASE("oversized shapes are rejected") {
    SyntheticSpec spec;
    spec.height = 8;
    spec.width = 8;
    spec.shape_radius = 4.0;
    RngStream rng(0);
    CHECK_THROWS_AS(gen_synthetic(spec, 0, rng), ConfigError);
}

TEST_CASE("class id must be within range") {
    SyntheticSpec spec;
    RngStream rng(0);
    CHECK_THROWS_AS(gen_synthetic(spec, 8, rng), ConfigError);
}

TEST_CASE("gather_frames picks the requested frames") {
    const VideoTensor v = ramp_video(6, 2, 2, 1);
    const VideoTensor g = gather_frames(v, {2, 5, 6});
    CHECK(g.t == 3);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 2; ++x) {
            CHECK(g.at_u8(0, y, x, 0) == v.at_u8(1, y, x, 0));
            CHECK(g.at_u8(1, y, x, 0) == v.at_u8(4, y, x, 0));
            CHECK(g.at_u8(2, y, x, 0) == v.at_u8(5, y, x, 0));
        }
    CHECK_THROWS_AS(gather_frames(v, {0}), ShapeError);
    CHECK_THROWS_AS(gather_frames(v, {7}), ShapeError);
}
