#include "moss/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "moss/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace moss {

namespace {

using nlohmann::json;

json header_json(const Checkpoint& ckpt) {
    json arrays = json::array();
    std::uint64_t offset = 0;
    for (const auto& a : ckpt.arrays) {
        arrays.push_back(json{{"name", a.name},
                              {"shape", a.shape},
                              {"offset", offset},
                              {"count", a.data.size()}});
        offset += a.data.size() * sizeof(float);
    }
    return json{{"format_version", Checkpoint::kFormatVersion},
                {"config_hash", ckpt.config_hash},
                {"arch_hash", ckpt.arch_hash},
                {"config", json::parse(ckpt.config_json.empty() ? "{}" : ckpt.config_json)},
                {"global_step", ckpt.global_step},
                {"rng_state", ckpt.rng_state},
                {"counters", ckpt.counters},
                {"arrays", arrays}};
}

}  // namespace

void Checkpoint::add_array(const std::string& name, std::vector<std::size_t> shape,
                           std::span<const float> data) {
    std::size_t expected = 1;
    for (std::size_t s : shape) expected *= s;
    if (expected != data.size())
        throw Error(ErrorCode::InvalidArgument, "checkpoint: shape does not match data size");
    ArrayRecord record{name, std::move(shape), {data.begin(), data.end()}};
    auto pos = std::lower_bound(arrays.begin(), arrays.end(), record.name,
                                [](const ArrayRecord& a, const std::string& n) {
                                    return a.name < n;
                                });
    if (pos != arrays.end() && pos->name == record.name)
        throw Error(ErrorCode::InvalidArgument, "checkpoint: duplicate array '" + record.name +
                                                    "'");
    arrays.insert(pos, std::move(record));
}

const ArrayRecord& Checkpoint::array(const std::string& name) const {
    auto pos = std::lower_bound(arrays.begin(), arrays.end(), name,
                                [](const ArrayRecord& a, const std::string& n) {
                                    return a.name < n;
                                });
    if (pos == arrays.end() || pos->name != name)
        throw Error(ErrorCode::State, "checkpoint: missing array '" + name + "'");
    return *pos;
}

bool Checkpoint::has_array(const std::string& name) const {
    auto pos = std::lower_bound(arrays.begin(), arrays.end(), name,
                                [](const ArrayRecord& a, const std::string& n) {
                                    return a.name < n;
                                });
    return pos != arrays.end() && pos->name == name;
}

void Checkpoint::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "checkpoint: cannot open " + path.string());

    const std::string header = header_json(*this).dump();
    out.write(kMagic, 8);
    const std::uint64_t header_len = header.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof header_len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& a : arrays)
        out.write(reinterpret_cast<const char*>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(float)));
    if (!out) throw Error(ErrorCode::Io, "checkpoint: write failed for " + path.string());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "checkpoint: cannot open " + path.string());

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw Error(ErrorCode::State, "checkpoint: bad magic in " + path.string());
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof header_len);
    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw Error(ErrorCode::State, "checkpoint: truncated header");

    json j;
    try {
        j = json::parse(header);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::State, std::string("checkpoint: corrupt header: ") + e.what());
    }

    Checkpoint ckpt;
    try {
        const std::uint32_t version = j.at("format_version").get<std::uint32_t>();
        if (version != kFormatVersion)
            throw Error(ErrorCode::State,
                        "checkpoint: unsupported format version " + std::to_string(version));
        ckpt.config_hash = j.at("config_hash").get<std::uint64_t>();
        ckpt.arch_hash = j.at("arch_hash").get<std::uint64_t>();
        ckpt.config_json = j.at("config").dump(2);
        ckpt.global_step = j.at("global_step").get<std::uint64_t>();
        ckpt.rng_state = j.at("rng_state").get<std::string>();
        ckpt.counters = j.at("counters").get<std::map<std::string, std::int64_t>>();
        for (const auto& a : j.at("arrays")) {
            ArrayRecord record;
            record.name = a.at("name").get<std::string>();
            record.shape = a.at("shape").get<std::vector<std::size_t>>();
            record.data.resize(a.at("count").get<std::size_t>());
            ckpt.arrays.push_back(std::move(record));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::State, std::string("checkpoint: malformed header: ") + e.what());
    }

    for (auto& a : ckpt.arrays) {
        in.read(reinterpret_cast<char*>(a.data.data()),
                static_cast<std::streamsize>(a.data.size() * sizeof(float)));
        if (!in) throw Error(ErrorCode::State, "checkpoint: truncated array data");
    }
    return ckpt;
}

void check_compatibility(const Checkpoint& ckpt, std::uint64_t expected_config_hash,
                         std::uint64_t expected_arch_hash, LoadPolicy policy) {
    if (ckpt.arch_hash != expected_arch_hash)
        throw Error(ErrorCode::State,
                    "checkpoint: architecture mismatch (skill/hidden dims or encoding differ)");
    if (policy == LoadPolicy::Strict && ckpt.config_hash != expected_config_hash)
        throw Error(ErrorCode::State,
                    "checkpoint: config hash mismatch; load with the compatible policy to "
                    "override");
}

void pack_mlp(Checkpoint& ckpt, const std::string& prefix, const Mlp<float>& net) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& layer = net.layers[l];
        const std::string base = prefix + "/layer" + std::to_string(l);
        ckpt.add_array(base + "/weight", {layer.weight.rows(), layer.weight.cols()},
                       {layer.weight.data(), layer.weight.size()});
        ckpt.add_array(base + "/bias", {layer.bias.size()}, layer.bias);
    }
}

void unpack_mlp(const Checkpoint& ckpt, const std::string& prefix, Mlp<float>& net) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        auto& layer = net.layers[l];
        const std::string base = prefix + "/layer" + std::to_string(l);
        const ArrayRecord& w = ckpt.array(base + "/weight");
        if (w.shape != std::vector<std::size_t>{layer.weight.rows(), layer.weight.cols()})
            throw Error(ErrorCode::State, "checkpoint: shape mismatch for " + base + "/weight");
        std::copy(w.data.begin(), w.data.end(), layer.weight.data());
        const ArrayRecord& b = ckpt.array(base + "/bias");
        if (b.data.size() != layer.bias.size())
            throw Error(ErrorCode::State, "checkpoint: shape mismatch for " + base + "/bias");
        std::copy(b.data.begin(), b.data.end(), layer.bias.begin());
    }
}

void pack_adam(Checkpoint& ckpt, const std::string& prefix, const AdamState<float>& state) {
    for (std::size_t l = 0; l < state.m.weight.size(); ++l) {
        const std::string base = prefix + "/layer" + std::to_string(l);
        ckpt.add_array(base + "/m_weight",
                       {state.m.weight[l].rows(), state.m.weight[l].cols()},
                       {state.m.weight[l].data(), state.m.weight[l].size()});
        ckpt.add_array(base + "/v_weight",
                       {state.v.weight[l].rows(), state.v.weight[l].cols()},
                       {state.v.weight[l].data(), state.v.weight[l].size()});
        ckpt.add_array(base + "/m_bias", {state.m.bias[l].size()}, state.m.bias[l]);
        ckpt.add_array(base + "/v_bias", {state.v.bias[l].size()}, state.v.bias[l]);
    }
    ckpt.counters[prefix + "/step"] = state.step;
}

void unpack_adam(const Checkpoint& ckpt, const std::string& prefix, AdamState<float>& state) {
    for (std::size_t l = 0; l < state.m.weight.size(); ++l) {
        const std::string base = prefix + "/layer" + std::to_string(l);
        auto copy_matrix = [&](const std::string& name, Matrix<float>& dst) {
            const ArrayRecord& a = ckpt.array(name);
            if (a.data.size() != dst.size())
                throw Error(ErrorCode::State, "checkpoint: shape mismatch for " + name);
            std::copy(a.data.begin(), a.data.end(), dst.data());
        };
        copy_matrix(base + "/m_weight", state.m.weight[l]);
        copy_matrix(base + "/v_weight", state.v.weight[l]);
        const ArrayRecord& mb = ckpt.array(base + "/m_bias");
        std::copy(mb.data.begin(), mb.data.end(), state.m.bias[l].begin());
        const ArrayRecord& vb = ckpt.array(base + "/v_bias");
        std::copy(vb.data.begin(), vb.data.end(), state.v.bias[l].begin());
    }
    const auto it = ckpt.counters.find(prefix + "/step");
    if (it == ckpt.counters.end())
        throw Error(ErrorCode::State, "checkpoint: missing counter " + prefix + "/step");
    state.step = it->second;
}

}  // namespace moss
