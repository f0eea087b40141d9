#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vid/augment.hpp"
#include "vid/errors.hpp"
#include "vid/rng.hpp"

using namespace vid;

namespace {

VideoTensor colour_video(int t = 3, int h = 6, int w = 6) {
    VideoTensor v = VideoTensor::make_f32(t, h, w, 3);
    RngStream rng(50);
    for (auto& x : v.f32) x = static_cast<float>(rng.uniform_real(0.1, 0.9));
    return v;
}

bool close(const VideoTensor& a, const VideoTensor& b, float tol = 1e-6f) {
    if (a.t != b.t || a.h != b.h || a.w != b.w || a.c != b.c) return false;
    for (std::size_t i = 0; i < a.f32.size(); ++i)
        if (std::abs(a.f32[i] - b.f32[i]) > tol) return false;
    return true;
}

AugmentConfig neutral_cfg() {
    AugmentConfig cfg;
    cfg.brightness = {1.0, 1.0};
    cfg.contrast = {1.0, 1.0};
    cfg.saturation = {1.0, 1.0};
    cfg.hue = {0.0, 0.0};
    cfg.crop_h = 6;
    cfg.crop_w = 6;
    return cfg;
}

}  // namespace

TEST_CASE("neutral jitter factors are the identity") {
    const VideoTensor v = colour_video();
    RngStream rng(1);
    CHECK(close(jitter(v, neutral_cfg(), rng), v));
}

TEST_CASE("disabled jitter is the identity even with wide ranges") {
    const VideoTensor v = colour_video();
    AugmentConfig cfg;  // default wide ranges
    cfg.enabled = false;
    RngStream rng(1);
    CHECK(close(jitter(v, cfg, rng), v));
}

TEST_CASE("jitter factors are shared across frames of a clip") {
    // A clip with identical frames must stay frame-identical after jitter.
    VideoTensor v = VideoTensor::make_f32(4, 5, 5, 3);
    RngStream fill(3);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            for (int c = 0; c < 3; ++c) {
                const float val = static_cast<float>(fill.uniform_real(0.2, 0.8));
                for (int t = 0; t < 4; ++t) v.at_f32(t, y, x, c) = val;
            }
    AugmentConfig cfg;
    cfg.crop_h = cfg.crop_w = 5;
    RngStream rng(8);
    const VideoTensor j = jitter(v, cfg, rng);
    for (int t = 1; t < 4; ++t)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x)
                for (int c = 0; c < 3; ++c)
                    CHECK(j.at_f32(t, y, x, c) == doctest::Approx(j.at_f32(0, y, x, c)));
}

TEST_CASE("jitter output stays in the unit range") {
    const VideoTensor v = colour_video();
    AugmentConfig cfg;
    const RngStream master(12);
    for (int i = 0; i < 20; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const VideoTensor j = jitter(v, cfg, r);
        for (float x : j.f32) {
            CHECK(x >= 0.0f);
            CHECK(x <= 1.0f);
        }
    }
}

TEST_CASE("hue and saturation leave single-channel clips unchanged") {
    VideoTensor v = VideoTensor::make_f32(2, 4, 4, 1);
    RngStream fill(9);
    for (auto& x : v.f32) x = static_cast<float>(fill.uniform_real(0.0, 1.0));
    AugmentConfig cfg = neutral_cfg();
    cfg.saturation = {0.3, 0.3};
    cfg.hue = {0.15, 0.15};
    RngStream rng(2);
    CHECK(close(jitter(v, cfg, rng), v));
}

TEST_CASE("forced hflip is an involution") {
    const VideoTensor v = colour_video();
    CHECK(close(hflip_forced(hflip_forced(v)), v));
}

TEST_CASE("hflip honours the probability") {
    const VideoTensor v = colour_video();
    AugmentConfig cfg = neutral_cfg();
    cfg.flip_prob = 0.0;
    RngStream rng(4);
    CHECK(close(hflip(v, cfg, rng), v));
    cfg.flip_prob = 1.0;
    CHECK(close(hflip(v, cfg, rng), hflip_forced(v)));
}

TEST_CASE("full-size crop is the identity") {
    const VideoTensor v = colour_video(2, 8, 8);
    AugmentConfig cfg = neutral_cfg();
    cfg.crop_h = cfg.crop_w = 8;
    RngStream rng(6);
    CHECK(close(crop(v, cfg, rng), v));
}

TEST_CASE("crop cuts the requested window") {
    const VideoTensor v = colour_video(2, 8, 8);
    const VideoTensor c = center_crop(v, 4, 6);
    CHECK(c.h == 4);
    CHECK(c.w == 6);
    CHECK(c.t == 2);
    CHECK(c.c == 3);
    CHECK(c.at_f32(1, 0, 0, 2) == v.at_f32(1, 2, 1, 2));
}

TEST_CASE("crop larger than the frame is rejected") {
    const VideoTensor v = colour_video(2, 8, 8);
    AugmentConfig cfg = neutral_cfg();
    cfg.crop_h = 9;
    RngStream rng(0);
    CHECK_THROWS_AS(crop(v, cfg, rng), ShapeError);
    CHECK_THROWS_AS(center_crop(v, 4, 9), ShapeError);
}

TEST_CASE("augmentations preserve frame count and channels") {
    const VideoTensor v = colour_video(5, 10, 12);
    AugmentConfig cfg;
    cfg.crop_h = 7;
    cfg.crop_w = 9;
    const RngStream master(21);
    for (int i = 0; i < 10; ++i) {
        RngStream r = master.split(static_cast<std::uint64_t>(i));
        const VideoTensor out = prepare_train_clip(v, cfg, r);
        CHECK(out.t == 5);
        CHECK(out.c == 3);
        CHECK(out.h == 7);
        CHECK(out.w == 9);
    }
}

TEST_CASE("normalize maps u8 and unit floats onto the centered range") {
    VideoTensor v = VideoTensor::make_u8(1, 1, 2, 1);
    v.u8 = {0, 255};
    const VideoTensor n = normalize(v);
    CHECK(n.range == ValueRange::Centered);
    CHECK(n.f32[0] == doctest::Approx(-0.5));
    CHECK(n.f32[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(normalize(n), ConfigError);
}

TEST_CASE("per-frame mode draws fresh factors per frame") {
    VideoTensor v = VideoTensor::make_f32(6, 4, 4, 3);
    for (auto& x : v.f32) x = 0.5f;
    AugmentConfig cfg;
    cfg.per_frame = true;
    cfg.contrast = {1.0, 1.0};
    cfg.saturation = {1.0, 1.0};
    cfg.hue = {0.0, 0.0};
    RngStream rng(14);
    const VideoTensor j = jitter(v, cfg, rng);
    bool any_diff = false;
    for (int t = 1; t < 6; ++t) any_diff = any_diff || j.at_f32(t, 0, 0, 0) != j.at_f32(0, 0, 0, 0);
    CHECK(any_diff);
}
