#include "vid/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "vid/errors.hpp"

namespace vid {

namespace {

constexpr char kMagic[4] = {'V', 'I', 'D', 'C'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
    put_u32(os, static_cast<std::uint32_t>(v));
    put_u32(os, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("VIDC: truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t get_u64(std::istream& is) {
    const std::uint64_t lo = get_u32(is);
    const std::uint64_t hi = get_u32(is);
    return lo | (hi << 32);
}

void put_entry(std::ostream& os, const std::string& name, const Tensor& t) {
    put_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    os.put(static_cast<char>(t.ndim()));
    for (int d : t.shape) put_u32(os, static_cast<std::uint32_t>(d));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

std::pair<std::string, Tensor> get_entry(std::istream& is) {
    const std::uint32_t name_len = get_u32(is);
    if (name_len > 4096) throw FormatError("VIDC: implausible name length");
    std::string name(name_len, '\0');
    if (!is.read(name.data(), name_len)) throw FormatError("VIDC: truncated entry name");
    const int ndim = is.get();
    if (ndim == EOF || ndim < 1 || ndim > 8) throw FormatError("VIDC: bad tensor rank");
    std::vector<int> shape;
    for (int i = 0; i < ndim; ++i) shape.push_back(static_cast<int>(get_u32(is)));
    Tensor t(shape);
    if (!is.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(double))))
        throw FormatError("VIDC: truncated payload for " + name);
    return {std::move(name), std::move(t)};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ParamStore& store, std::uint64_t step) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("VIDC: cannot open for writing: " + path.string());
    os.write(kMagic, 4);
    os.put(static_cast<char>(kVersion));
    put_u64(os, step);
    put_u32(os, static_cast<std::uint32_t>(2 * store.size()));
    for (int i = 0; i < store.size(); ++i) {
        put_entry(os, store.name(i), store.value(i));
        put_entry(os, "m:" + store.name(i), store.velocity(i));
    }
    if (!os) throw FormatError("VIDC: write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("VIDC: cannot open: " + path.string());
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("VIDC: bad magic");
    const int version = is.get();
    if (version != kVersion) throw FormatError("VIDC: unsupported version");

    Checkpoint ck;
    ck.step = get_u64(is);
    const std::uint32_t entries = get_u32(is);
    std::map<std::string, Tensor> momentum;
    for (std::uint32_t i = 0; i < entries; ++i) {
        auto [name, tensor] = get_entry(is);
        if (name.rfind("m:", 0) == 0) {
            momentum.emplace(name.substr(2), std::move(tensor));
        } else {
            ck.store.add(name, std::move(tensor));
        }
    }
    for (int i = 0; i < ck.store.size(); ++i) {
        auto it = momentum.find(ck.store.name(i));
        if (it == momentum.end()) throw FormatError("VIDC: missing momentum for " + ck.store.name(i));
        if (!it->second.same_shape(ck.store.value(i)))
            throw FormatError("VIDC: momentum shape mismatch for " + ck.store.name(i));
        ck.store.velocity(i) = std::move(it->second);
    }
    return ck;
}

}  // namespace vid
