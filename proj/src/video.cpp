#include "vid/video.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vid/errors.hpp"

namespace vid {

VideoTensor VideoTensor::make_u8(int t, int h, int w, int c) {
    VideoTensor v;
    v.t = t;
    v.h = h;
    v.w = w;
    v.c = c;
    v.dtype = Dtype::U8;
    v.range = ValueRange::U8Range;
    v.u8.assign(v.size(), 0);
    return v;
}

VideoTensor VideoTensor::make_f32(int t, int h, int w, int c, ValueRange range) {
    VideoTensor v;
    v.t = t;
    v.h = h;
    v.w = w;
    v.c = c;
    v.dtype = Dtype::F32;
    v.range = range;
    v.f32.assign(v.size(), 0.0f);
    return v;
}

void VideoTensor::validate() const {
    if (t < 1 || h < 1 || w < 1) throw ShapeError("video: dimensions must be positive");
    if (c != 1 && c != 3) throw ShapeError("video: channel count must be 1 or 3");
    const std::size_t n = size();
    if (dtype == Dtype::U8 && u8.size() != n) throw ShapeError("video: u8 payload size mismatch");
    if (dtype == Dtype::F32 && f32.size() != n) throw ShapeError("video: f32 payload size mismatch");
}

bool operator==(const VideoTensor& a, const VideoTensor& b) {
    return a.t == b.t && a.h == b.h && a.w == b.w && a.c == b.c && a.dtype == b.dtype &&
           a.range == b.range && a.u8 == b.u8 && a.f32 == b.f32;
}

namespace {

constexpr char kVidtMagic[4] = {'V', 'I', 'D', 'T'};
constexpr std::uint8_t kVidtVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("VIDT: malformed header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_video(const VideoTensor& v, const std::filesystem::path& path) {
    v.validate();
    if (v.range == ValueRange::Centered)
        throw FormatError("VIDT: centered tensors are transient and not storable");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("VIDT: cannot open for writing: " + path.string());
    os.write(kVidtMagic, 4);
    os.put(static_cast<char>(kVidtVersion));
    put_u32(os, static_cast<std::uint32_t>(v.t));
    put_u32(os, static_cast<std::uint32_t>(v.h));
    put_u32(os, static_cast<std::uint32_t>(v.w));
    put_u32(os, static_cast<std::uint32_t>(v.c));
    os.put(static_cast<char>(v.dtype));
    if (v.dtype == Dtype::U8) {
        os.write(reinterpret_cast<const char*>(v.u8.data()), static_cast<std::streamsize>(v.u8.size()));
    } else {
        os.write(reinterpret_cast<const char*>(v.f32.data()),
                 static_cast<std::streamsize>(v.f32.size() * sizeof(float)));
    }
    if (!os) throw FormatError("VIDT: write failed: " + path.string());
}

VideoTensor read_video(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("VIDT: cannot open: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kVidtMagic, 4) != 0)
        throw FormatError("VIDT: malformed header (bad magic)");
    const int version = is.get();
    if (version == EOF) throw FormatError("VIDT: malformed header (missing version)");
    if (version != kVidtVersion) throw FormatError("VIDT: unsupported version " + std::to_string(version));
    const auto t = get_u32(is), h = get_u32(is), w = get_u32(is), c = get_u32(is);
    const int dt = is.get();
    if (dt == EOF) throw FormatError("VIDT: malformed header (missing dtype)");
    if (dt != 0 && dt != 1) throw FormatError("VIDT: malformed header (unknown dtype)");
    if (t < 1 || h < 1 || w < 1 || (c != 1 && c != 3)) throw FormatError("VIDT: malformed header (bad dims)");

    const std::size_t n = static_cast<std::size_t>(t) * h * w * c;
    VideoTensor v = (dt == 0) ? VideoTensor::make_u8(static_cast<int>(t), static_cast<int>(h),
                                                     static_cast<int>(w), static_cast<int>(c))
                              : VideoTensor::make_f32(static_cast<int>(t), static_cast<int>(h),
                                                      static_cast<int>(w), static_cast<int>(c));
    const std::size_t payload = (dt == 0) ? n : n * sizeof(float);
    const auto body_start = is.tellg();
    is.seekg(0, std::ios::end);
    const std::size_t available = static_cast<std::size_t>(is.tellg() - body_start);
    if (available != payload)
        throw FormatError("VIDT: truncated payload (expected " + std::to_string(payload) + " bytes, found " +
                          std::to_string(available) + ")");
    is.seekg(body_start);
    if (dt == 0) {
        is.read(reinterpret_cast<char*>(v.u8.data()), static_cast<std::streamsize>(payload));
    } else {
        is.read(reinterpret_cast<char*>(v.f32.data()), static_cast<std::streamsize>(payload));
    }
    if (!is) throw FormatError("VIDT: truncated payload");
    return v;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream os(path);
    if (!os) throw FormatError("manifest: cannot open for writing: " + path.string());
    for (const auto& e : entries) os << e.path << ',' << e.class_id << ',' << e.frames << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("manifest: cannot open: " + path.string());
    const auto dir = path.parent_path();
    std::vector<ManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string p, cls, frames;
        if (!std::getline(ls, p, ',') || !std::getline(ls, cls, ',') || !std::getline(ls, frames))
            throw FormatError("manifest: malformed line " + std::to_string(lineno));
        ManifestEntry e;
        std::filesystem::path vp(p);
        e.path = (vp.is_absolute() ? vp : dir / vp).string();
        try {
            e.class_id = std::stoi(cls);
            e.frames = std::stoi(frames);
        } catch (const std::exception&) {
            throw FormatError("manifest: malformed line " + std::to_string(lineno));
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

double SyntheticSpec::class_speed(int class_id) const {
    const int kinds = static_cast<int>(shape_kinds.size());
    return base_speed * (1.0 + class_id / kinds);
}

ShapeKind SyntheticSpec::class_shape(int class_id) const {
    return shape_kinds[static_cast<std::size_t>(class_id) % shape_kinds.size()];
}

std::vector<std::pair<double, double>> simulate_path(std::pair<double, double> start,
                                                     std::pair<double, double> velocity, int frames,
                                                     double lo_y, double hi_y, double lo_x, double hi_x) {
    std::vector<std::pair<double, double>> path;
    path.reserve(static_cast<std::size_t>(frames));
    double y = start.first, x = start.second;
    double vy = velocity.first, vx = velocity.second;
    auto reflect = [](double& p, double& v, double lo, double hi) {
        // Degenerate axis (shape as wide as the frame): pin to the midpoint.
        if (hi <= lo) {
            p = lo;
            v = 0.0;
            return;
        }
        while (p < lo || p > hi) {
            if (p < lo) {
                p = 2 * lo - p;
                v = -v;
            } else {
                p = 2 * hi - p;
                v = -v;
            }
        }
    };
    reflect(y, vy, lo_y, hi_y);
    reflect(x, vx, lo_x, hi_x);
    for (int f = 0; f < frames; ++f) {
        path.emplace_back(y, x);
        y += vy;
        x += vx;
        reflect(y, vy, lo_y, hi_y);
        reflect(x, vx, lo_x, hi_x);
    }
    return path;
}

namespace {

bool inside_shape(ShapeKind kind, double dy, double dx, double r) {
    switch (kind) {
        case ShapeKind::Square:
            return std::abs(dy) <= r && std::abs(dx) <= r;
        case ShapeKind::Disc:
            return dy * dy + dx * dx <= r * r;
        case ShapeKind::Triangle:
            // Apex at the top, base of width 2r at the bottom.
            return dy >= -r && dy <= r && std::abs(dx) <= (dy + r) * 0.5;
        case ShapeKind::Cross:
            return (std::abs(dx) <= r / 3.0 && std::abs(dy) <= r) ||
                   (std::abs(dy) <= r / 3.0 && std::abs(dx) <= r);
    }
    return false;
}

}  // namespace

VideoTensor gen_synthetic(const SyntheticSpec& spec, int class_id, RngStream& rng) {
    if (class_id < 0 || class_id >= spec.num_classes)
        throw ConfigError("gen_synthetic: class_id out of range");
    if (spec.channels != 1 && spec.channels != 3)
        throw ConfigError("gen_synthetic: channels must be 1 or 3");
    const double r = spec.shape_radius;
    if (2 * r + 1 > spec.height || 2 * r + 1 > spec.width)
        throw ConfigError("gen_synthetic: shape larger than the frame");

    const double speed = spec.class_speed(class_id);
    const ShapeKind kind = spec.class_shape(class_id);

    // Class-independent per-video appearance: shape size, background and
    // foreground brightness all vary, so static appearance alone identifies
    // the class only weakly; the per-class motion statistics stay exact.
    const double radius = std::max(1.5, r + rng.uniform_real(-1.0, 1.0));
    const double bg = rng.uniform_real(25.0, 65.0);
    const double fg_level = rng.uniform_real(170.0, 235.0);

    const double lo_y = radius, hi_y = spec.height - 1 - radius;
    const double lo_x = radius, hi_x = spec.width - 1 - radius;
    const double sy = rng.uniform_real(lo_y, hi_y);
    const double sx = rng.uniform_real(lo_x, hi_x);
    const double angle = rng.uniform_real(0.0, 2.0 * 3.14159265358979323846);
    const auto path = simulate_path({sy, sx}, {speed * std::sin(angle), speed * std::cos(angle)},
                                    spec.frames, lo_y, hi_y, lo_x, hi_x);

    // Per-video tint keeps colour uninformative about the class.
    double tint[3] = {1.0, 1.0, 1.0};
    if (spec.channels == 3)
        for (double& ch : tint) ch = rng.uniform_real(0.6, 1.0);

    VideoTensor v = VideoTensor::make_u8(spec.frames, spec.height, spec.width, spec.channels);
    for (int f = 0; f < spec.frames; ++f) {
        const auto [cy, cx] = path[static_cast<std::size_t>(f)];
        for (int y = 0; y < spec.height; ++y) {
            for (int x = 0; x < spec.width; ++x) {
                const bool fg = inside_shape(kind, y - cy, x - cx, radius);
                for (int ch = 0; ch < spec.channels; ++ch) {
                    double val = fg ? bg + (fg_level - bg) * tint[ch] : bg;
                    if (spec.noise_std > 0.0) val += rng.normal(0.0, spec.noise_std);
                    v.at_u8(f, y, x, ch) =
                        static_cast<std::uint8_t>(std::clamp(std::lround(val), 0L, 255L));
                }
            }
        }
    }
    return v;
}

VideoTensor gather_frames(const VideoTensor& v, const std::vector<int>& indices) {
    v.validate();
    VideoTensor out = (v.dtype == Dtype::U8)
                          ? VideoTensor::make_u8(static_cast<int>(indices.size()), v.h, v.w, v.c)
                          : VideoTensor::make_f32(static_cast<int>(indices.size()), v.h, v.w, v.c, v.range);
    const std::size_t frame = static_cast<std::size_t>(v.h) * v.w * v.c;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const int fi = indices[i];
        if (fi < 1 || fi > v.t) throw ShapeError("gather_frames: index out of range");
        const std::size_t src = static_cast<std::size_t>(fi - 1) * frame;
        if (v.dtype == Dtype::U8) {
            std::copy_n(v.u8.begin() + static_cast<std::ptrdiff_t>(src), frame, out.u8.begin() + static_cast<std::ptrdiff_t>(i * frame));
        } else {
            std::copy_n(v.f32.begin() + static_cast<std::ptrdiff_t>(src), frame, out.f32.begin() + static_cast<std::ptrdiff_t>(i * frame));
        }
    }
    return out;
}

}  // namespace vid
