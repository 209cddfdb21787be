#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pmuevent/dense.hpp"
#include "pmuevent/errors.hpp"

namespace pmuevent {

// Versioned binary parameter container:
//   magic "PMUEVCKP", u32 version,
//   u32 meta count, { u32 key length, key bytes, f64 value },
//   u32 section count, { u32 name length, name bytes, u32 layer count,
//     { u32 fan_in, u32 fan_out, u8 activation, f64 weights row-major, f64 bias } }
// All integers and doubles are little-endian. Doubles are stored bit-exact,
// so save/load round-trips and repeated runs are byte-identical.

struct Checkpoint {
    std::map<std::string, double> meta;                    // ordered -> deterministic bytes
    std::vector<std::pair<std::string, DenseStack>> sections;

    const DenseStack& section(const std::string& name) const {
        for (const auto& s : sections)
            if (s.first == name) return s.second;
        throw IoError("checkpoint: missing section '" + name + "'");
    }
    double meta_value(const std::string& key) const {
        auto it = meta.find(key);
        if (it == meta.end()) throw IoError("checkpoint: missing meta key '" + key + "'");
        return it->second;
    }
};

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'P', 'M', 'U', 'E', 'V', 'C', 'K', 'P'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void put_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

inline void put_f64(std::ostream& os, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(b, 8);
}

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

inline std::string get_string(std::istream& is) {
    std::uint32_t n = get_u32(is);
    if (n > (1u << 20)) throw IoError("checkpoint: implausible string length");
    std::string s(n, '\0');
    if (n && !is.read(s.data(), n)) throw IoError("checkpoint: truncated file");
    return s;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write(detail::kCheckpointMagic, 8);
    detail::put_u32(os, detail::kCheckpointVersion);
    detail::put_u32(os, static_cast<std::uint32_t>(ckpt.meta.size()));
    for (const auto& [key, value] : ckpt.meta) {
        detail::put_string(os, key);
        detail::put_f64(os, value);
    }
    detail::put_u32(os, static_cast<std::uint32_t>(ckpt.sections.size()));
    for (const auto& [name, stack] : ckpt.sections) {
        detail::put_string(os, name);
        detail::put_u32(os, static_cast<std::uint32_t>(stack.size()));
        for (const auto& layer : stack) {
            detail::put_u32(os, static_cast<std::uint32_t>(layer.fan_in()));
            detail::put_u32(os, static_cast<std::uint32_t>(layer.fan_out()));
            os.put(static_cast<char>(layer.activation));
            for (double w : layer.weights.data) detail::put_f64(os, w);
            for (double b : layer.bias) detail::put_f64(os, b);
        }
    }
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, detail::kCheckpointMagic, 8) != 0)
        throw IoError("not a checkpoint file: " + path);
    const std::uint32_t version = detail::get_u32(is);
    if (version != detail::kCheckpointVersion)
        throw IoError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint ckpt;
    const std::uint32_t n_meta = detail::get_u32(is);
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string key = detail::get_string(is);
        ckpt.meta[key] = detail::get_f64(is);
    }
    const std::uint32_t n_sections = detail::get_u32(is);
    for (std::uint32_t s = 0; s < n_sections; ++s) {
        std::string name = detail::get_string(is);
        const std::uint32_t n_layers = detail::get_u32(is);
        DenseStack stack;
        for (std::uint32_t li = 0; li < n_layers; ++li) {
            const std::uint32_t fan_in = detail::get_u32(is);
            const std::uint32_t fan_out = detail::get_u32(is);
            int act = is.get();
            if (act < 0 || act > 4) throw IoError("checkpoint: bad activation code");
            DenseLayer layer;
            layer.activation = static_cast<Activation>(act);
            layer.weights = RealMatrix(fan_out, fan_in);
            layer.bias.assign(fan_out, 0.0);
            for (double& w : layer.weights.data) w = detail::get_f64(is);
            for (double& b : layer.bias) b = detail::get_f64(is);
            stack.push_back(std::move(layer));
        }
        ckpt.sections.emplace_back(std::move(name), std::move(stack));
    }
    return ckpt;
}

}  // namespace pmuevent
