#include "eegaug/net.hpp"

#include "eegaug/binio.hpp"

#include <cstring>
#include <fstream>

namespace eegaug {

namespace {
constexpr char kCkptMagic[4] = {'C', 'K', 'P', 'T'};
}

void save_checkpoint(const std::string& path, const std::vector<std::string>& names,
                     const std::vector<Tensor>& params) {
    if (names.size() != params.size())
        throw std::invalid_argument("save_checkpoint: name/parameter count mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_checkpoint: cannot write " + path);
    out.write(kCkptMagic, 4);
    binio::write_u32(out, 1);
    binio::write_u32(out, static_cast<uint32_t>(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        binio::write_u32(out, static_cast<uint32_t>(names[i].size()));
        out.write(names[i].data(), static_cast<long>(names[i].size()));
        binio::write_u32(out, static_cast<uint32_t>(params[i].rank()));
        for (int e : params[i].shape()) binio::write_u32(out, static_cast<uint32_t>(e));
        for (long k = 0; k < params[i].size(); ++k) binio::write_f64(out, params[i][k]);
    }
}

std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCkptMagic, 4) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    const uint32_t version = binio::read_u32(in);
    if (version != 1)
        throw std::runtime_error("load_checkpoint: unsupported version " +
                                 std::to_string(version));
    const uint32_t n = binio::read_u32(in);
    std::vector<std::pair<std::string, Tensor>> out;
    for (uint32_t i = 0; i < n; ++i) {
        const uint32_t len = binio::read_u32(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        const uint32_t rank = binio::read_u32(in);
        std::vector<int> shape(rank);
        for (auto& e : shape) e = static_cast<int>(binio::read_u32(in));
        Tensor t(shape);
        for (long k = 0; k < t.size(); ++k) t[k] = binio::read_f64(in);
        if (!in) throw std::runtime_error("load_checkpoint: truncated at " + name);
        out.emplace_back(std::move(name), std::move(t));
    }
    return out;
}

}  // namespace eegaug
