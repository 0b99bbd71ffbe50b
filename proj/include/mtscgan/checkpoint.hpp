#pragma once

// Versioned binary container: magic, format version, a JSON config block,
// then named little-endian float64 parameter blocks. Round trips are
// bit-exact.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtscgan/tensor.hpp"

namespace mtscgan::ckpt {

inline constexpr char kMagic[8] = {'M', 'T', 'S', 'C', 'G', 'A', 'N', '\0'};
inline constexpr std::uint32_t kVersion = 1;

struct Checkpoint {
    nlohmann::json config;
    std::vector<std::pair<std::string, Tensor>> blocks;

    const Tensor& block(const std::string& name) const;
    bool has_block(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mtscgan::ckpt
