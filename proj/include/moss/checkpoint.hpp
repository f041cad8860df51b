#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "moss/adam.hpp"
#include "moss/nn.hpp"

namespace moss {

struct ArrayRecord {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<float> data;
};

/// Versioned parameter container: a JSON header (format version, config
/// hashes, step, rng state, array directory) followed by the named float32
/// arrays as raw little-endian bytes. save -> load -> save is byte-identical.
struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;
    static constexpr char kMagic[9] = "MOSSCKP1";

    std::uint64_t config_hash = 0;
    std::uint64_t arch_hash = 0;
    std::string config_json;
    std::uint64_t global_step = 0;
    std::string rng_state;
    std::map<std::string, std::int64_t> counters;
    std::vector<ArrayRecord> arrays;  // sorted by name

    void add_array(const std::string& name, std::vector<std::size_t> shape,
                   std::span<const float> data);
    const ArrayRecord& array(const std::string& name) const;
    bool has_array(const std::string& name) const;

    void save(const std::filesystem::path& path) const;
    static Checkpoint load(const std::filesystem::path& path);
};

/// Strict refuses any config-hash mismatch (resume path); AllowCompatible
/// accepts a different config as long as the architecture hash matches
/// (finetune/eval path).
enum class LoadPolicy { Strict, AllowCompatible };

void check_compatibility(const Checkpoint& ckpt, std::uint64_t expected_config_hash,
                         std::uint64_t expected_arch_hash, LoadPolicy policy);

/// Flattens an MLP's layers into "<prefix>/layer<i>/weight|bias" arrays.
void pack_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp<float>& net);
void unpack_mlp(const Checkpoint& ckpt, const std::string& prefix, Mlp<float>& net);

/// Adam moments as "<prefix>/m|v/layer<i>/weight|bias" plus a step counter.
void pack_adam(Checkpoint& ckpt, const std::string& prefix, const AdamState<float>& state);
void unpack_adam(const Checkpoint& ckpt, const std::string& prefix, AdamState<float>& state);

}  // namespace moss
