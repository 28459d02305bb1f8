#include "spts/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace spts::train {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'T', 'S', 'C', 'K', 'P', 'T'};

template <class T>
void put_le(std::ofstream& f, T v) {
    unsigned char buf[sizeof(T)];
    for (size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    f.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::ifstream& f, const std::string& path) {
    unsigned char buf[sizeof(T)];
    f.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (f.gcount() != sizeof(T)) throw std::runtime_error(path + ": truncated checkpoint");
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    // Write to a temp file and rename, so an interrupted save never leaves a
    // half-written checkpoint at the target path.
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + tmp);
        f.write(kMagic, sizeof(kMagic));
        put_le<uint32_t>(f, ckpt.version);
        put_le<uint64_t>(f, ckpt.config_json.size());
        f.write(ckpt.config_json.data(), static_cast<std::streamsize>(ckpt.config_json.size()));
        put_le<uint32_t>(f, static_cast<uint32_t>(ckpt.tensors.size()));
        for (const auto& t : ckpt.tensors) {
            put_le<uint16_t>(f, static_cast<uint16_t>(t.name.size()));
            f.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
            f.put(static_cast<char>(t.shape.size()));
            size_t numel = 1;
            for (int d : t.shape) {
                put_le<uint64_t>(f, static_cast<uint64_t>(d));
                numel *= static_cast<size_t>(d);
            }
            if (numel != t.data.size())
                throw std::logic_error("checkpoint tensor '" + t.name + "' shape/data mismatch");
            static_assert(sizeof(float) == 4);
            f.write(reinterpret_cast<const char*>(t.data.data()),
                    static_cast<std::streamsize>(t.data.size() * 4));
        }
        if (!f) throw std::runtime_error("write failed: " + tmp);
    }
    std::remove(path.c_str());
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move checkpoint into place: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[8];
    f.read(magic, 8);
    if (f.gcount() != 8 || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path + ": not a SPTSCKPT checkpoint");
    Checkpoint ckpt;
    ckpt.version = get_le<uint32_t>(f, path);
    if (ckpt.version != Checkpoint::kVersion)
        throw std::runtime_error(path + ": unsupported checkpoint version " +
                                 std::to_string(ckpt.version));
    const auto json_len = get_le<uint64_t>(f, path);
    ckpt.config_json.resize(json_len);
    f.read(ckpt.config_json.data(), static_cast<std::streamsize>(json_len));
    if (f.gcount() != static_cast<std::streamsize>(json_len))
        throw std::runtime_error(path + ": truncated checkpoint");
    const auto count = get_le<uint32_t>(f, path);
    ckpt.tensors.resize(count);
    for (auto& t : ckpt.tensors) {
        const auto name_len = get_le<uint16_t>(f, path);
        t.name.resize(name_len);
        f.read(t.name.data(), name_len);
        const int rank = f.get();
        if (rank < 0) throw std::runtime_error(path + ": truncated checkpoint");
        size_t numel = 1;
        for (int i = 0; i < rank; ++i) {
            const auto d = get_le<uint64_t>(f, path);
            t.shape.push_back(static_cast<int>(d));
            numel *= static_cast<size_t>(d);
        }
        t.data.resize(numel);
        f.read(reinterpret_cast<char*>(t.data.data()),
               static_cast<std::streamsize>(numel * 4));
        if (f.gcount() != static_cast<std::streamsize>(numel * 4))
            throw std::runtime_error(path + ": truncated checkpoint");
    }
    return ckpt;
}

}  // namespace spts::train
