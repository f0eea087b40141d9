#include "vid/augment.hpp"

#include <algorithm>
#include <cmath>

#include "vid/errors.hpp"

namespace vid {

void AugmentConfig::validate() const {
    auto check = [](const std::array<double, 2>& r, const char* name) {
        if (r[0] > r[1]) throw ConfigError(std::string("augment: empty ") + name + " range");
    };
    check(brightness, "brightness");
    check(contrast, "contrast");
    check(saturation, "saturation");
    check(hue, "hue");
    if (crop_h < 1 || crop_w < 1) throw ConfigError("augment: crop size must be positive");
    if (flip_prob < 0.0 || flip_prob > 1.0) throw ConfigError("augment: flip_prob must be in [0,1]");
}

VideoTensor to_float(const VideoTensor& v) {
    v.validate();
    if (v.dtype == Dtype::F32) return v;
    VideoTensor out = VideoTensor::make_f32(v.t, v.h, v.w, v.c, ValueRange::Unit);
    for (std::size_t i = 0; i < v.u8.size(); ++i) out.f32[i] = static_cast<float>(v.u8[i]) / 255.0f;
    return out;
}

namespace {

struct JitterFactors {
    double brightness, contrast, saturation, hue;
};

JitterFactors draw_factors(const AugmentConfig& cfg, RngStream& rng) {
    return {rng.uniform_real(cfg.brightness[0], cfg.brightness[1]),
            rng.uniform_real(cfg.contrast[0], cfg.contrast[1]),
            rng.uniform_real(cfg.saturation[0], cfg.saturation[1]),
            rng.uniform_real(cfg.hue[0], cfg.hue[1])};
}

float clamp01(double x) {
    return static_cast<float>(std::clamp(x, 0.0, 1.0));
}

// Rotation of RGB space about the gray axis (1,1,1)/sqrt(3) by angle theta.
void hue_matrix(double theta, double m[3][3]) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double a = 1.0 / 3.0;
    const double b = std::sqrt(1.0 / 3.0);
    m[0][0] = c + (1 - c) * a;
    m[0][1] = a * (1 - c) - b * s;
    m[0][2] = a * (1 - c) + b * s;
    m[1][0] = a * (1 - c) + b * s;
    m[1][1] = c + (1 - c) * a;
    m[1][2] = a * (1 - c) - b * s;
    m[2][0] = a * (1 - c) - b * s;
    m[2][1] = a * (1 - c) + b * s;
    m[2][2] = c + (1 - c) * a;
}

void jitter_frame(VideoTensor& v, int f, const JitterFactors& jf) {
    const int hw = v.h * v.w;
    const std::size_t base = static_cast<std::size_t>(f) * hw * v.c;

    // brightness
    for (int i = 0; i < hw * v.c; ++i) v.f32[base + i] = clamp01(v.f32[base + i] * jf.brightness);

    // contrast, blended around the frame's gray mean
    double mean = 0.0;
    if (v.c == 3) {
        for (int i = 0; i < hw; ++i) {
            const std::size_t p = base + static_cast<std::size_t>(i) * 3;
            mean += 0.299 * v.f32[p] + 0.587 * v.f32[p + 1] + 0.114 * v.f32[p + 2];
        }
    } else {
        for (int i = 0; i < hw; ++i) mean += v.f32[base + i];
    }
    mean /= hw;
    for (int i = 0; i < hw * v.c; ++i)
        v.f32[base + i] = clamp01((v.f32[base + i] - mean) * jf.contrast + mean);

    if (v.c != 3) return;

    // saturation: blend toward per-pixel luminance
    for (int i = 0; i < hw; ++i) {
        const std::size_t p = base + static_cast<std::size_t>(i) * 3;
        const double gray = 0.299 * v.f32[p] + 0.587 * v.f32[p + 1] + 0.114 * v.f32[p + 2];
        for (int ch = 0; ch < 3; ++ch)
            v.f32[p + ch] = clamp01(gray + (v.f32[p + ch] - gray) * jf.saturation);
    }

    // hue rotation
    if (jf.hue != 0.0) {
        double m[3][3];
        hue_matrix(jf.hue * 2.0 * 3.14159265358979323846, m);
        for (int i = 0; i < hw; ++i) {
            const std::size_t p = base + static_cast<std::size_t>(i) * 3;
            const double r = v.f32[p], g = v.f32[p + 1], b = v.f32[p + 2];
            v.f32[p] = clamp01(m[0][0] * r + m[0][1] * g + m[0][2] * b);
            v.f32[p + 1] = clamp01(m[1][0] * r + m[1][1] * g + m[1][2] * b);
            v.f32[p + 2] = clamp01(m[2][0] * r + m[2][1] * g + m[2][2] * b);
        }
    }
}

}  // namespace

VideoTensor jitter(const VideoTensor& v, const AugmentConfig& cfg, RngStream& rng) {
    cfg.validate();
    VideoTensor out = to_float(v);
    if (!cfg.enabled) return out;
    if (out.range == ValueRange::Centered) throw ConfigError("jitter: expects unit-range input");
    if (cfg.per_frame) {
        for (int f = 0; f < out.t; ++f) jitter_frame(out, f, draw_factors(cfg, rng));
    } else {
        const JitterFactors jf = draw_factors(cfg, rng);
        for (int f = 0; f < out.t; ++f) jitter_frame(out, f, jf);
    }
    return out;
}

namespace {

VideoTensor crop_at(const VideoTensor& v, int y0, int x0, int ch_, int cw) {
    VideoTensor out = (v.dtype == Dtype::U8) ? VideoTensor::make_u8(v.t, ch_, cw, v.c)
                                             : VideoTensor::make_f32(v.t, ch_, cw, v.c, v.range);
    for (int f = 0; f < v.t; ++f)
        for (int y = 0; y < ch_; ++y)
            for (int x = 0; x < cw; ++x)
                for (int ch = 0; ch < v.c; ++ch) {
                    if (v.dtype == Dtype::U8)
                        out.at_u8(f, y, x, ch) = v.at_u8(f, y0 + y, x0 + x, ch);
                    else
                        out.at_f32(f, y, x, ch) = v.at_f32(f, y0 + y, x0 + x, ch);
                }
    return out;
}

}  // namespace

VideoTensor crop(const VideoTensor& v, const AugmentConfig& cfg, RngStream& rng) {
    cfg.validate();
    v.validate();
    if (cfg.crop_h > v.h || cfg.crop_w > v.w) throw ShapeError("crop: crop size larger than frame");
    const int y0 = static_cast<int>(rng.uniform_int(0, v.h - cfg.crop_h));
    const int x0 = static_cast<int>(rng.uniform_int(0, v.w - cfg.crop_w));
    return crop_at(v, y0, x0, cfg.crop_h, cfg.crop_w);
}

VideoTensor center_crop(const VideoTensor& v, int crop_h, int crop_w) {
    v.validate();
    if (crop_h > v.h || crop_w > v.w) throw ShapeError("center_crop: crop size larger than frame");
    return crop_at(v, (v.h - crop_h) / 2, (v.w - crop_w) / 2, crop_h, crop_w);
}

VideoTensor hflip_forced(const VideoTensor& v) {
    v.validate();
    VideoTensor out = v;
    for (int f = 0; f < v.t; ++f)
        for (int y = 0; y < v.h; ++y)
            for (int x = 0; x < v.w; ++x)
                for (int ch = 0; ch < v.c; ++ch) {
                    if (v.dtype == Dtype::U8)
                        out.at_u8(f, y, x, ch) = v.at_u8(f, y, v.w - 1 - x, ch);
                    else
                        out.at_f32(f, y, x, ch) = v.at_f32(f, y, v.w - 1 - x, ch);
                }
    return out;
}

VideoTensor hflip(const VideoTensor& v, const AugmentConfig& cfg, RngStream& rng) {
    cfg.validate();
    return rng.bernoulli(cfg.flip_prob) ? hflip_forced(v) : v;
}

VideoTensor normalize(const VideoTensor& v) {
    v.validate();
    if (v.range == ValueRange::Centered) throw ConfigError("normalize: input already centered");
    VideoTensor out = VideoTensor::make_f32(v.t, v.h, v.w, v.c, ValueRange::Centered);
    double mean = 0.0;
    if (v.dtype == Dtype::U8) {
        for (std::size_t i = 0; i < v.u8.size(); ++i) {
            out.f32[i] = static_cast<float>(v.u8[i]) / 255.0f;
            mean += out.f32[i];
        }
    } else {
        for (std::size_t i = 0; i < v.f32.size(); ++i) {
            out.f32[i] = v.f32[i];
            mean += out.f32[i];
        }
    }
    // Zero-mean per clip; values span at most one unit either way.
    mean /= static_cast<double>(out.f32.size());
    for (float& x : out.f32) x -= static_cast<float>(mean);
    return out;
}

VideoTensor prepare_train_clip(const VideoTensor& clip, const AugmentConfig& cfg, RngStream& rng) {
    return normalize(hflip(crop(jitter(clip, cfg, rng), cfg, rng), cfg, rng));
}

VideoTensor prepare_eval_clip(const VideoTensor& clip, int crop_h, int crop_w) {
    return normalize(center_crop(clip, crop_h, crop_w));
}

}  // namespace vid
