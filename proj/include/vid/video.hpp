#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vid/rng.hpp"

namespace vid {

enum class Dtype : std::uint8_t { U8 = 0, F32 = 1 };

// Declared value range of the stored samples.
enum class ValueRange : std::uint8_t { U8Range = 0, Unit = 1, Centered = 2 };

// Dense frame sequence, T x H x W x C row-major. Exactly one of the two
// payload vectors is active, selected by dtype.
struct VideoTensor {
    int t = 0, h = 0, w = 0, c = 0;
    Dtype dtype = Dtype::U8;
    ValueRange range = ValueRange::U8Range;
    std::vector<std::uint8_t> u8;
    std::vector<float> f32;

    static VideoTensor make_u8(int t, int h, int w, int c);
    static VideoTensor make_f32(int t, int h, int w, int c, ValueRange range = ValueRange::Unit);

    std::size_t size() const { return static_cast<std::size_t>(t) * h * w * c; }
    std::size_t offset(int ti, int y, int x, int ch) const {
        return ((static_cast<std::size_t>(ti) * h + y) * w + x) * c + ch;
    }

    std::uint8_t& at_u8(int ti, int y, int x, int ch) { return u8[offset(ti, y, x, ch)]; }
    std::uint8_t at_u8(int ti, int y, int x, int ch) const { return u8[offset(ti, y, x, ch)]; }
    float& at_f32(int ti, int y, int x, int ch) { return f32[offset(ti, y, x, ch)]; }
    float at_f32(int ti, int y, int x, int ch) const { return f32[offset(ti, y, x, ch)]; }

    void validate() const;
};

bool operator==(const VideoTensor& a, const VideoTensor& b);

// VIDT container: magic "VIDT", version byte, little-endian u32 dims T,H,W,C,
// dtype byte, raw row-major payload.
void write_video(const VideoTensor& v, const std::filesystem::path& path);
VideoTensor read_video(const std::filesystem::path& path);

// Dataset manifest: one `path,class_id,T` row per video. Relative paths are
// resolved against the manifest's directory on read.
struct ManifestEntry {
    std::string path;
    int class_id = 0;
    int frames = 0;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

enum class ShapeKind { Square, Disc, Triangle, Cross };

// Synthetic moving-shape videos: one shape per video, constant velocity with
// reflective boundaries, so skipping g frames produces a positional jump of
// g * speed. Class identity = (shape kind, speed tier); both cycle through
// shape_kinds, with speed multiplied per completed cycle.
struct SyntheticSpec {
    int num_classes = 8;
    int frames = 48;
    int height = 32;
    int width = 32;
    int channels = 1;
    std::vector<ShapeKind> shape_kinds{ShapeKind::Square, ShapeKind::Disc, ShapeKind::Triangle,
                                       ShapeKind::Cross};
    double base_speed = 1.6;   // pixels per frame for the first speed tier
    double shape_radius = 4.0; // half-extent in pixels
    double noise_std = 5.0;    // additive Gaussian noise, u8 units
    std::uint64_t seed = 0;

    double class_speed(int class_id) const;
    ShapeKind class_shape(int class_id) const;
};

// Constant-velocity path with reflection at lo/hi (positions stay inside
// [lo, hi]; velocity flips sign at each bounce).
std::vector<std::pair<double, double>> simulate_path(std::pair<double, double> start,
                                                     std::pair<double, double> velocity, int frames,
                                                     double lo_y, double hi_y, double lo_x, double hi_x);

VideoTensor gen_synthetic(const SyntheticSpec& spec, int class_id, RngStream& rng);

// Gather 1-based frame indices into a new clip (same H, W, C).
VideoTensor gather_frames(const VideoTensor& v, const std::vector<int>& indices);

}  // namespace vid
