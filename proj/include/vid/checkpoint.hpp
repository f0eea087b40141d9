#pragma once

#include <cstdint>
#include <filesystem>

#include "vid/optim.hpp"

namespace vid {

// VIDC checkpoint: magic "VIDC", version byte, u64 step, then a named tensor
// table holding every parameter and, prefixed with "m:", its momentum buffer.
// Payloads are raw little-endian doubles; round trips are bit-exact.
void save_checkpoint(const std::filesystem::path& path, const ParamStore& store, std::uint64_t step);

struct Checkpoint {
    ParamStore store;
    std::uint64_t step = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vid
