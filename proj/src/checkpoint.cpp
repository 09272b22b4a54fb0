#include "fewb/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace fewb::nets {

namespace {

constexpr char kMagic[5] = {'F', 'E', 'W', 'B', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, AgentNetworks& nets) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, sizeof kMagic);
    auto params = nets.all_parameters();
    write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (Parameter* p : params) {
        write_u32(os, static_cast<std::uint32_t>(p->name.size()));
        os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        const auto& shape = p->value.shape();
        write_u32(os, static_cast<std::uint32_t>(shape.size()));
        for (auto d : shape) write_u64(os, d);
        for (real v : p->value.values()) {
            const double d = static_cast<double>(v);
            os.write(reinterpret_cast<const char*>(&d), sizeof d);
        }
    }
    if (!os) throw IoError("short write on checkpoint: " + path);
}

void load_checkpoint(const std::string& path, AgentNetworks& nets) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[5] = {};
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw CheckpointError("checkpoint version mismatch (bad magic): " + path);
    const std::uint32_t count = read_u32(is);
    auto params = nets.all_parameters();
    if (count != params.size())
        throw CheckpointError("checkpoint has " + std::to_string(count) +
                              " parameters, networks expect " +
                              std::to_string(params.size()));
    for (Parameter* p : params) {
        const std::uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is || name != p->name)
            throw CheckpointError("checkpoint parameter order mismatch: expected " +
                                  p->name + ", found " + name);
        const std::uint32_t rank = read_u32(is);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(read_u64(is));
        if (shape != p->value.shape())
            throw CheckpointError("checkpoint shape mismatch for " + p->name);
        auto& vals = p->value.values();
        for (auto& v : vals) {
            double d = 0;
            is.read(reinterpret_cast<char*>(&d), sizeof d);
            v = static_cast<real>(d);
        }
        if (!is) throw CheckpointError("truncated checkpoint: " + path);
    }
}

}  // namespace fewb::nets
