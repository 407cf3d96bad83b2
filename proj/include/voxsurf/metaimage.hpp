#ifndef VOXSURF_METAIMAGE_HPP
#define VOXSURF_METAIMAGE_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "volume.hpp"

namespace voxsurf {

using AnyVolume = std::variant<Volume<std::uint8_t>, Volume<std::uint16_t>,
                               Volume<std::uint32_t>, Volume<double>>;

namespace detail {

inline const char* met_name(ElementType t) {
    switch (t) {
        case ElementType::U8: return "MET_UCHAR";
        case ElementType::U16: return "MET_USHORT";
        case ElementType::U32: return "MET_UINT";
        case ElementType::F64: return "MET_DOUBLE";
    }
    return "?";
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

template <typename T>
void swap_bytes_in_place(std::vector<T>& data) {
    if constexpr (sizeof(T) > 1) {
        for (T& v : data) {
            auto bytes = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
            std::reverse(bytes.begin(), bytes.end());
            v = std::bit_cast<T>(bytes);
        }
    }
}

template <typename T>
Volume<T> read_raw(const VolumeMeta& meta, const std::filesystem::path& raw_path,
                   bool msb) {
    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) throw std::runtime_error("metaimage: cannot open raw file " + raw_path.string());
    Volume<T> vol(meta);
    const std::uintmax_t want = vol.data.size() * sizeof(T);
    std::uintmax_t have = std::filesystem::file_size(raw_path);
    if (have != want) {
        std::ostringstream msg;
        msg << "metaimage: DimSize mismatch: raw file " << raw_path.filename().string()
            << " holds " << have << " bytes, header implies " << want;
        throw std::runtime_error(msg.str());
    }
    raw.read(reinterpret_cast<char*>(vol.data.data()), static_cast<std::streamsize>(want));
    if (!raw) throw std::runtime_error("metaimage: short read from " + raw_path.string());
    if (msb == (std::endian::native == std::endian::little))
        swap_bytes_in_place(vol.data);
    return vol;
}

}  // namespace detail

/// Write a volume as a MetaImage header (.mhd) plus companion .raw file,
/// little-endian. Re-reading yields a bit-exact copy.
template <typename T>
void write_metaimage(const Volume<T>& vol, const std::filesystem::path& path) {
    vol.meta.validate();
    std::filesystem::path raw_path = path;
    raw_path.replace_extension(".raw");

    std::ofstream hdr(path);
    if (!hdr) throw std::runtime_error("metaimage: cannot open " + path.string());
    hdr << "ObjectType = Image\n";
    hdr << "NDims = " << vol.meta.ndims << "\n";
    hdr << "BinaryData = True\n";
    hdr << "BinaryDataByteOrderMSB = False\n";
    hdr << "DimSize =";
    for (int a = 0; a < vol.meta.ndims; ++a) hdr << " " << vol.meta.dims[a];
    hdr << "\nElementSpacing =";
    for (int a = 0; a < vol.meta.ndims; ++a)
        hdr << " " << detail::format_double(vol.meta.spacing[a]);
    hdr << "\nElementType = " << detail::met_name(element_type_of<T>()) << "\n";
    hdr << "ElementDataFile = " << raw_path.filename().string() << "\n";
    if (!hdr) throw std::runtime_error("metaimage: write failed for " + path.string());
    hdr.close();

    std::vector<T> buf;
    const std::vector<T>* out = &vol.data;
    if constexpr (sizeof(T) > 1) {
        if (std::endian::native != std::endian::little) {
            buf = vol.data;
            detail::swap_bytes_in_place(buf);
            out = &buf;
        }
    }
    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw std::runtime_error("metaimage: cannot open " + raw_path.string());
    raw.write(reinterpret_cast<const char*>(out->data()),
              static_cast<std::streamsize>(out->size() * sizeof(T)));
    if (!raw) throw std::runtime_error("metaimage: write failed for " + raw_path.string());
}

/// Read a MetaImage volume; element type is taken from the header.
inline AnyVolume read_metaimage(const std::filesystem::path& path) {
    std::ifstream hdr(path);
    if (!hdr) throw std::runtime_error("metaimage: cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(hdr, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::runtime_error(std::string("metaimage: missing key ") + key);
        return it->second;
    };

    VolumeMeta meta;
    meta.ndims = std::stoi(need("NDims"));
    if (meta.ndims != 2 && meta.ndims != 3)
        throw std::runtime_error("metaimage: unsupported NDims " + need("NDims"));
    {
        std::istringstream ds(need("DimSize"));
        for (int a = 0; a < meta.ndims; ++a)
            if (!(ds >> meta.dims[a]))
                throw std::runtime_error("metaimage: malformed DimSize");
        if (meta.ndims == 2) meta.dims[2] = 1;
    }
    if (auto it = kv.find("ElementSpacing"); it != kv.end()) {
        std::istringstream sp(it->second);
        for (int a = 0; a < meta.ndims; ++a)
            if (!(sp >> meta.spacing[a]))
                throw std::runtime_error("metaimage: malformed ElementSpacing");
    }
    meta.validate();

    bool msb = false;
    for (const char* key : {"BinaryDataByteOrderMSB", "ElementByteOrderMSB"})
        if (auto it = kv.find(key); it != kv.end()) msb = (it->second == "True");

    const std::string& data_file = need("ElementDataFile");
    std::filesystem::path raw_path = path.parent_path() / data_file;

    const std::string& et = need("ElementType");
    if (et == "MET_UCHAR") return detail::read_raw<std::uint8_t>(meta, raw_path, msb);
    if (et == "MET_USHORT") return detail::read_raw<std::uint16_t>(meta, raw_path, msb);
    if (et == "MET_UINT") return detail::read_raw<std::uint32_t>(meta, raw_path, msb);
    if (et == "MET_DOUBLE") return detail::read_raw<double>(meta, raw_path, msb);
    throw std::runtime_error("metaimage: unsupported ElementType " + et);
}

/// Read a MetaImage and require a specific element type.
template <typename T>
Volume<T> read_metaimage_as(const std::filesystem::path& path) {
    AnyVolume any = read_metaimage(path);
    if (auto* v = std::get_if<Volume<T>>(&any)) return std::move(*v);
    throw std::runtime_error("metaimage: " + path.string() + " does not hold element type " +
                             std::string(element_type_name(element_type_of<T>())));
}

/// Export one axis-aligned slice as a binary PGM (P5, 8-bit).
/// normalize maps [min, max] linearly onto [0, 255] (constant fields map
/// to 0); otherwise values are rounded and clamped to [0, 255].
template <typename T>
void write_slice_pgm(const Volume<T>& vol, int axis, std::int64_t slice_index,
                     bool normalize, const std::filesystem::path& path) {
    // axis 2 on a 2D grid is allowed: slice 0 along z is the whole image
    if (axis < 0 || axis > 2)
        throw std::invalid_argument("write_slice_pgm: axis out of range");
    if (slice_index < 0 || slice_index >= vol.meta.dims[axis])
        throw std::out_of_range("write_slice_pgm: slice index out of bounds");

    const int ax_u = axis == 0 ? 1 : 0;           // horizontal axis of the image
    const int ax_v = axis == 2 ? 1 : 2;           // vertical axis of the image
    const std::int64_t w = vol.meta.dims[ax_u];
    const std::int64_t h = vol.meta.dims[ax_v];

    double lo = 0.0, hi = 0.0;
    if (normalize) {
        lo = std::numeric_limits<double>::infinity();
        hi = -std::numeric_limits<double>::infinity();
        for (const T& v : vol.data) {
            double d = static_cast<double>(v);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    }
    const double scale = (normalize && hi > lo) ? 255.0 / (hi - lo) : 0.0;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("pgm: cannot open " + path.string());
    out << "P5\n" << w << " " << h << "\n255\n";
    std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
    VoxelIndex idx;
    auto coord = [&](int a) -> std::int64_t& { return a == 0 ? idx.x : (a == 1 ? idx.y : idx.z); };
    coord(axis) = slice_index;
    for (std::int64_t v = 0; v < h; ++v) {
        coord(ax_v) = v;
        for (std::int64_t u = 0; u < w; ++u) {
            coord(ax_u) = u;
            double val = static_cast<double>(vol.at(idx.x, idx.y, idx.z));
            double mapped = normalize ? (val - lo) * scale : val;
            mapped = std::clamp(std::round(mapped), 0.0, 255.0);
            row[static_cast<std::size_t>(u)] = static_cast<std::uint8_t>(mapped);
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(w));
    }
    if (!out) throw std::runtime_error("pgm: write failed for " + path.string());
}

}  // namespace voxsurf

#endif  // VOXSURF_METAIMAGE_HPP
