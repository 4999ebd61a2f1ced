#include "hermite/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hermite/common.hpp"

namespace hermite::ckpt {

namespace {

constexpr const char* kMagic = "HERMCKPT1";

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is defined as little-endian float64");

} // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : arrays)
        if (n == name) return &t;
    return nullptr;
}

void save(const std::string& path, const Checkpoint& ckpt) {
    nlohmann::json header;
    header["meta"] = ckpt.meta;
    header["arrays"] = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& [name, tensor] : ckpt.arrays) {
        nlohmann::json entry;
        entry["name"] = name;
        entry["shape"] = tensor.shape();
        entry["offset"] = offset;
        entry["count"] = tensor.numel();
        header["arrays"].push_back(entry);
        offset += tensor.numel() * sizeof(double);
    }
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing", 0);
    out << kMagic << '\n' << header_text.size() << '\n' << header_text << '\n';
    for (const auto& [name, tensor] : ckpt.arrays)
        out.write(reinterpret_cast<const char*>(tensor.data()),
                  static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
    if (!out) throw FormatError(path + ": write failed", offset);
}

Checkpoint load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open", 0);
    std::string magic;
    std::getline(in, magic);
    if (magic != kMagic) throw FormatError(path + ": bad checkpoint magic", 0);
    std::string len_line;
    std::getline(in, len_line);
    std::size_t header_len = 0;
    try {
        header_len = static_cast<std::size_t>(std::stoull(len_line));
    } catch (const std::exception&) {
        throw FormatError(path + ": bad header length", magic.size() + 1);
    }
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (static_cast<std::size_t>(in.gcount()) != header_len)
        throw FormatError(path + ": truncated header", magic.size() + 1 + len_line.size() + 1);
    in.get(); // newline after header

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::parse_error& err) {
        throw FormatError(path + ": unparsable header: " + err.what(), 0);
    }

    Checkpoint ckpt;
    if (header.contains("meta"))
        ckpt.meta = header["meta"].get<std::map<std::string, std::string>>();
    const std::size_t data_start = static_cast<std::size_t>(in.tellg());
    for (const auto& entry : header["arrays"]) {
        const std::string name = entry["name"].get<std::string>();
        const auto shape = entry["shape"].get<std::vector<std::size_t>>();
        const std::size_t offset = entry["offset"].get<std::size_t>();
        const std::size_t count = entry["count"].get<std::size_t>();
        if (count != Tensor::count(shape))
            throw FormatError(path + ": array '" + name + "' count/shape mismatch",
                              data_start + offset);
        Tensor t(shape);
        in.seekg(static_cast<std::streamoff>(data_start + offset));
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
            throw FormatError(path + ": truncated payload for array '" + name + "'",
                              data_start + offset);
        ckpt.arrays.emplace_back(name, std::move(t));
    }
    return ckpt;
}

} // namespace hermite::ckpt
