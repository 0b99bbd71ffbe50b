#include "mtscgan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace mtscgan::ckpt {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blocks are written as native little-endian f64");

const Tensor& Checkpoint::block(const std::string& name) const {
    for (const auto& [n, t] : blocks)
        if (n == name) return t;
    throw TensorError("checkpoint: no block named '" + name + "'");
}

bool Checkpoint::has_block(const std::string& name) const {
    for (const auto& [n, t] : blocks)
        if (n == name) return true;
    return false;
}

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw TensorError("checkpoint: truncated file " + path);
    return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TensorError("checkpoint: cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const std::string cfg = c.config.dump();
    write_u64(out, cfg.size());
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    write_u64(out, c.blocks.size());
    for (const auto& [name, t] : c.blocks) {
        write_u64(out, name.size());
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(out, t.rank());
        for (std::size_t i = 0; i < t.rank(); ++i) write_u64(out, t.dim(i));
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
    if (!out) throw TensorError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TensorError("checkpoint: cannot open " + path);
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw TensorError("checkpoint: " + path + " is not a checkpoint file");
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    if (!in || version != kVersion)
        throw TensorError("checkpoint: unsupported format version " +
                          std::to_string(version) + " in " + path);
    Checkpoint c;
    const std::uint64_t cfg_len = read_u64(in, path);
    std::string cfg(cfg_len, '\0');
    in.read(cfg.data(), static_cast<std::streamsize>(cfg_len));
    if (!in) throw TensorError("checkpoint: truncated file " + path);
    try {
        c.config = nlohmann::json::parse(cfg);
    } catch (const nlohmann::json::exception& e) {
        throw TensorError("checkpoint: bad config block in " + path + ": " +
                          e.what());
    }
    const std::uint64_t n_blocks = read_u64(in, path);
    for (std::uint64_t b = 0; b < n_blocks; ++b) {
        const std::uint64_t name_len = read_u64(in, path);
        std::string name(name_len, '\0');
        in.read(name.data(), static_cast<std::streamsize>(name_len));
        const std::uint64_t rank = read_u64(in, path);
        Shape shape(rank);
        for (auto& d : shape) d = read_u64(in, path);
        std::vector<double> values(shape_numel(shape));
        in.read(reinterpret_cast<char*>(values.data()),
                static_cast<std::streamsize>(values.size() * sizeof(double)));
        if (!in) throw TensorError("checkpoint: truncated file " + path);
        c.blocks.emplace_back(std::move(name),
                              Tensor(std::move(shape), std::move(values)));
    }
    return c;
}

}  // namespace mtscgan::ckpt
