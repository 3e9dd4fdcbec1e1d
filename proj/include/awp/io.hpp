#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "awp/matrix.hpp"
#include "awp/projections.hpp"

namespace awp {

// AWPT tensor container: magic "AWPT", little-endian u32 version (= 1),
// u8 dtype (0 = float32, 1 = float64, 2 = packed bitmask), u8 ndim (= 2),
// u64 per-dimension sizes, then the row-major payload. Bitmask payloads pack
// entry (r, c) into bit (r·cols + c), LSB-first within each byte.

inline constexpr std::array<std::uint8_t, 4> kAwptMagic{0x41, 0x57, 0x50, 0x54};
inline constexpr std::uint32_t kAwptVersion = 1;

enum class Dtype : std::uint8_t { f32 = 0, f64 = 1, bitmask = 2 };

namespace detail {

inline void put_bytes(std::string& out, const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
}

inline void put_u32le(std::string& out, std::uint32_t v) {
    std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                         static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
    put_bytes(out, b, 4);
}

inline void put_u64le(std::string& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    put_bytes(out, b, 8);
}

class ByteReader {
public:
    ByteReader(const std::string& buf, const std::string& path) : buf_(buf), path_(path) {}

    void read(void* dst, std::size_t n) {
        if (pos_ + n > buf_.size()) {
            throw config_error("AWPT file truncated: " + path_);
        }
        std::memcpy(dst, buf_.data() + pos_, n);
        pos_ += n;
    }

    std::uint8_t u8() {
        std::uint8_t v;
        read(&v, 1);
        return v;
    }
    std::uint32_t u32le() {
        std::uint8_t b[4];
        read(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    std::uint64_t u64le() {
        std::uint8_t b[8];
        read(b, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    const std::string& buf_;
    std::string path_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open file: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return buf;
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot create file: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw config_error("short write: " + path);
}

inline std::string awpt_header(Dtype dtype, index_t rows, index_t cols) {
    std::string out;
    put_bytes(out, kAwptMagic.data(), kAwptMagic.size());
    put_u32le(out, kAwptVersion);
    out.push_back(static_cast<char>(dtype));
    out.push_back(static_cast<char>(2));  // ndim
    put_u64le(out, static_cast<std::uint64_t>(rows));
    put_u64le(out, static_cast<std::uint64_t>(cols));
    return out;
}

struct AwptHeader {
    Dtype dtype;
    index_t rows;
    index_t cols;
};

inline AwptHeader parse_awpt_header(ByteReader& r, const std::string& path) {
    std::array<std::uint8_t, 4> magic{};
    r.read(magic.data(), magic.size());
    if (magic != kAwptMagic) throw config_error("not an AWPT file: " + path);
    const std::uint32_t version = r.u32le();
    if (version != kAwptVersion) {
        throw config_error("unsupported AWPT version " + std::to_string(version) + ": " + path);
    }
    const std::uint8_t dtype = r.u8();
    if (dtype > 2) {
        throw config_error("unsupported AWPT dtype " + std::to_string(dtype) + ": " + path);
    }
    const std::uint8_t ndim = r.u8();
    if (ndim != 2) {
        throw config_error("unsupported AWPT rank " + std::to_string(ndim) +
                           " (only 2-D tensors): " + path);
    }
    const std::uint64_t rows = r.u64le();
    const std::uint64_t cols = r.u64le();
    if (rows > (1ull << 32) || cols > (1ull << 32)) {
        throw config_error("AWPT dimensions implausibly large: " + path);
    }
    return {static_cast<Dtype>(dtype), static_cast<index_t>(rows), static_cast<index_t>(cols)};
}

}  // namespace detail

template <typename T>
constexpr Dtype dtype_of() {
    return sizeof(T) == 4 ? Dtype::f32 : Dtype::f64;
}

template <typename T>
void save_awpt(const std::string& path, const Matrix<T>& m) {
    std::string out = detail::awpt_header(dtype_of<T>(), m.rows(), m.cols());
    detail::put_bytes(out, m.data().data(), m.data().size() * sizeof(T));
    detail::write_file(path, out);
}

inline void save_awpt(const std::string& path, const SparsityMask& mask) {
    std::string out = detail::awpt_header(Dtype::bitmask, mask.rows, mask.cols);
    const std::size_t total = static_cast<std::size_t>(mask.rows) * static_cast<std::size_t>(mask.cols);
    std::string payload((total + 7) / 8, '\0');
    for (std::size_t b = 0; b < total; ++b) {
        if (mask.keep[b]) payload[b / 8] = static_cast<char>(payload[b / 8] | (1u << (b % 8)));
    }
    out += payload;
    detail::write_file(path, out);
}

inline Dtype peek_awpt_dtype(const std::string& path) {
    const std::string buf = detail::read_file(path);
    detail::ByteReader r(buf, path);
    return detail::parse_awpt_header(r, path).dtype;
}

/// Load a float matrix; the file's dtype must match T exactly. Entries are
/// verified finite.
template <typename T>
Matrix<T> load_awpt(const std::string& path) {
    const std::string buf = detail::read_file(path);
    detail::ByteReader r(buf, path);
    const auto hdr = detail::parse_awpt_header(r, path);
    if (hdr.dtype != dtype_of<T>()) {
        throw config_error("AWPT dtype mismatch (expected " +
                           std::string(dtype_of<T>() == Dtype::f32 ? "float32" : "float64") +
                           "): " + path);
    }
    const std::size_t count =
        static_cast<std::size_t>(hdr.rows) * static_cast<std::size_t>(hdr.cols);
    if (r.remaining() != count * sizeof(T)) {
        throw config_error("AWPT payload size mismatch: " + path);
    }
    std::vector<T> data(count);
    r.read(data.data(), count * sizeof(T));
    Matrix<T> m(hdr.rows, hdr.cols, std::move(data));
    if (!m.all_finite()) throw config_error("AWPT tensor contains non-finite entries: " + path);
    return m;
}

inline SparsityMask load_awpt_mask(const std::string& path) {
    const std::string buf = detail::read_file(path);
    detail::ByteReader r(buf, path);
    const auto hdr = detail::parse_awpt_header(r, path);
    if (hdr.dtype != Dtype::bitmask) throw config_error("AWPT file is not a bitmask: " + path);
    const std::size_t total =
        static_cast<std::size_t>(hdr.rows) * static_cast<std::size_t>(hdr.cols);
    if (r.remaining() != (total + 7) / 8) {
        throw config_error("AWPT bitmask payload size mismatch: " + path);
    }
    std::vector<std::uint8_t> payload((total + 7) / 8);
    if (!payload.empty()) r.read(payload.data(), payload.size());
    SparsityMask mask(hdr.rows, hdr.cols);
    for (std::size_t b = 0; b < total; ++b) {
        if (payload[b / 8] & (1u << (b % 8))) {
            mask.keep[b] = 1;
            ++mask.row_counts[b / static_cast<std::size_t>(hdr.cols)];
        }
    }
    return mask;
}

/// QuantGrid <-> JSON: {bits, group_size, scales[][], zero_points[][],
/// offsets[][]}. Offsets carry the reconstruction value for constant
/// (scale = 0) groups.
inline nlohmann::json grid_to_json(const QuantGrid& grid) {
    nlohmann::json j;
    j["bits"] = grid.bits;
    j["group_size"] = grid.group_size;
    j["rows"] = grid.rows;
    j["cols"] = grid.cols;
    const index_t n_groups = grid.n_groups();
    nlohmann::json scales = nlohmann::json::array();
    nlohmann::json zps = nlohmann::json::array();
    nlohmann::json offsets = nlohmann::json::array();
    for (index_t i = 0; i < grid.rows; ++i) {
        nlohmann::json srow = nlohmann::json::array();
        nlohmann::json zrow = nlohmann::json::array();
        nlohmann::json orow = nlohmann::json::array();
        for (index_t g = 0; g < n_groups; ++g) {
            const std::size_t s = static_cast<std::size_t>(grid.slot(i, g));
            srow.push_back(grid.scales[s]);
            zrow.push_back(grid.zero_points[s]);
            orow.push_back(grid.offsets[s]);
        }
        scales.push_back(std::move(srow));
        zps.push_back(std::move(zrow));
        offsets.push_back(std::move(orow));
    }
    j["scales"] = std::move(scales);
    j["zero_points"] = std::move(zps);
    j["offsets"] = std::move(offsets);
    return j;
}

inline QuantGrid grid_from_json(const nlohmann::json& j) {
    QuantGrid grid;
    grid.bits = j.at("bits").get<int>();
    grid.group_size = j.at("group_size").get<index_t>();
    grid.rows = j.at("rows").get<index_t>();
    grid.cols = j.at("cols").get<index_t>();
    const index_t n_groups = grid.n_groups();
    const auto& scales = j.at("scales");
    const auto& zps = j.at("zero_points");
    const auto& offsets = j.at("offsets");
    if (static_cast<index_t>(scales.size()) != grid.rows) {
        throw config_error("quant grid JSON: scales row count mismatch");
    }
    grid.scales.resize(static_cast<std::size_t>(grid.rows * n_groups));
    grid.zero_points.resize(static_cast<std::size_t>(grid.rows * n_groups));
    grid.offsets.resize(static_cast<std::size_t>(grid.rows * n_groups));
    for (index_t i = 0; i < grid.rows; ++i) {
        for (index_t g = 0; g < n_groups; ++g) {
            const std::size_t s = static_cast<std::size_t>(grid.slot(i, g));
            grid.scales[s] = scales.at(i).at(g).get<double>();
            grid.zero_points[s] = zps.at(i).at(g).get<int>();
            grid.offsets[s] = offsets.at(i).at(g).get<double>();
        }
    }
    return grid;
}

namespace detail {

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

}  // namespace detail

}  // namespace awp
