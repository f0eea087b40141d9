#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vid/rng.hpp"
#include "vid/video.hpp"

namespace vid::testsupport {

// Small synthetic dataset on disk; manifest at dir/manifest.txt.
inline std::vector<vid::ManifestEntry> write_dataset(const std::filesystem::path& dir,
                                                     const vid::SyntheticSpec& spec, int videos,
                                                     std::uint64_t seed,
                                                     const std::string& manifest_name = "manifest.txt") {
    std::filesystem::create_directories(dir / "videos");
    std::vector<vid::ManifestEntry> manifest;
    const vid::RngStream master(seed);
    for (int i = 0; i < videos; ++i) {
        const int cls = i % spec.num_classes;
        vid::RngStream r = master.split(static_cast<std::uint64_t>(i));
        const vid::VideoTensor v = vid::gen_synthetic(spec, cls, r);
        const std::string rel = "videos/v" + std::to_string(i) + ".vidt";
        vid::write_video(v, dir / rel);
        manifest.push_back({rel, cls, v.t});
    }
    vid::write_manifest(dir / manifest_name, manifest);
    return vid::read_manifest(dir / manifest_name);
}

struct ScratchDir {
    std::filesystem::path path;
    explicit ScratchDir(const std::string& tag)
        : path(std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~ScratchDir() { std::filesystem::remove_all(path); }
};

}  // namespace vid::testsupport
