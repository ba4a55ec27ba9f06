#pragma once

// Raw field dumps: a header of four 64-bit little-endian values
// (dim as int64, n per dim as int64, box_len as float64, time as float64)
// followed by each field as n^dim float64 values in row-major order.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "besovflow/errors.hpp"
#include "besovflow/field.hpp"

namespace besovflow {

namespace detail {

template <class T>
void write_le(std::ostream& os, T v) {
    static_assert(sizeof(T) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

template <class T>
T read_le(std::istream& is) {
    unsigned char buf[8];
    if (!is.read(reinterpret_cast<char*>(buf), 8)) throw ConfigError("dump: truncated file");
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    T v;
    std::memcpy(&v, &bits, 8);
    return v;
}

} // namespace detail

inline void write_dump(const std::filesystem::path& path, double time, const std::vector<Field>& fields) {
    if (fields.empty()) throw ConfigError("dump: no fields");
    const Grid& g = fields.front().grid();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("dump: cannot open " + path.string());
    detail::write_le<std::int64_t>(os, g.dim);
    detail::write_le<std::int64_t>(os, g.n);
    detail::write_le<double>(os, g.box_len);
    detail::write_le<double>(os, time);
    for (const auto& f : fields) {
        for (double v : f.values()) detail::write_le<double>(os, v);
    }
}

struct Dump {
    Grid grid;
    double time = 0.0;
    std::vector<Field> fields;
};

inline Dump read_dump(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("dump: cannot open " + path.string());
    Dump d;
    d.grid.dim = static_cast<int>(detail::read_le<std::int64_t>(is));
    d.grid.n = static_cast<int>(detail::read_le<std::int64_t>(is));
    d.grid.box_len = detail::read_le<double>(is);
    d.time = detail::read_le<double>(is);
    d.grid.validate();
    const auto bytes = std::filesystem::file_size(path) - 32;
    const auto per_field = d.grid.size() * 8;
    if (bytes % per_field != 0) throw ConfigError("dump: payload is not a whole number of fields");
    for (std::size_t k = 0; k < bytes / per_field; ++k) {
        std::vector<double> v(d.grid.size());
        for (auto& x : v) x = detail::read_le<double>(is);
        d.fields.emplace_back(d.grid, std::move(v));
    }
    return d;
}

} // namespace besovflow
