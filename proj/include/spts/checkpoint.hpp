#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spts::train {

struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

// Binary layout: magic "SPTSCKPT", u32 LE version, u64 LE config-JSON byte
// length + UTF-8 JSON, u32 LE tensor count, then per tensor: u16 LE name
// length + name, u8 rank, rank x u64 LE dims, raw little-endian f32 data.
struct Checkpoint {
    static constexpr uint32_t kVersion = 1;
    uint32_t version = kVersion;
    std::string config_json;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace spts::train
