#ifndef VOXSURF_VOLUME_HPP
#define VOXSURF_VOLUME_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace voxsurf {

enum class ElementType { U8, U16, U32, F64 };

inline const char* element_type_name(ElementType t) {
    switch (t) {
        case ElementType::U8: return "U8";
        case ElementType::U16: return "U16";
        case ElementType::U32: return "U32";
        case ElementType::F64: return "F64";
    }
    return "?";
}

template <typename T>
constexpr ElementType element_type_of() {
    if constexpr (std::is_same_v<T, std::uint8_t>) return ElementType::U8;
    else if constexpr (std::is_same_v<T, std::uint16_t>) return ElementType::U16;
    else if constexpr (std::is_same_v<T, std::uint32_t>) return ElementType::U32;
    else {
        static_assert(std::is_same_v<T, double>, "unsupported element type");
        return ElementType::F64;
    }
}

/// Grid geometry: 2D or 3D, per-axis voxel counts and physical spacing.
/// 2D grids are stored with dims[2] == 1 so indexing code is uniform;
/// ndims controls file I/O and which axes count as borders.
struct VolumeMeta {
    int ndims = 3;
    std::array<std::int64_t, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};

    VolumeMeta() = default;

    static VolumeMeta grid2d(std::int64_t nx, std::int64_t ny, double sx = 1.0, double sy = 1.0) {
        VolumeMeta m;
        m.ndims = 2;
        m.dims = {nx, ny, 1};
        m.spacing = {sx, sy, 1.0};
        return m;
    }
    static VolumeMeta grid3d(std::int64_t nx, std::int64_t ny, std::int64_t nz,
                             double sx = 1.0, double sy = 1.0, double sz = 1.0) {
        VolumeMeta m;
        m.ndims = 3;
        m.dims = {nx, ny, nz};
        m.spacing = {sx, sy, sz};
        return m;
    }

    void validate() const {
        if (ndims != 2 && ndims != 3)
            throw std::invalid_argument("VolumeMeta: ndims must be 2 or 3");
        for (int a = 0; a < ndims; ++a) {
            if (dims[a] < 1)
                throw std::invalid_argument("VolumeMeta: dims must be >= 1");
            if (!(spacing[a] > 0.0))
                throw std::invalid_argument("VolumeMeta: spacing must be > 0");
        }
        if (ndims == 2 && dims[2] != 1)
            throw std::invalid_argument("VolumeMeta: 2D volume requires dims[2] == 1");
        // product must fit the addressable range
        std::int64_t n = 1;
        for (int a = 0; a < 3; ++a) {
            if (dims[a] != 0 && n > std::numeric_limits<std::int64_t>::max() / dims[a])
                throw std::invalid_argument("VolumeMeta: voxel count overflows");
            n *= dims[a];
        }
    }

    std::int64_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

    /// Physical volume (area in 2D) of one voxel.
    double voxel_volume() const {
        double v = spacing[0] * spacing[1];
        if (ndims == 3) v *= spacing[2];
        return v;
    }

    bool same_grid(const VolumeMeta& o) const {
        return ndims == o.ndims && dims == o.dims && spacing == o.spacing;
    }

    bool operator==(const VolumeMeta& o) const = default;
};

/// Integer voxel coordinates. z is ignored for 2D grids.
struct VoxelIndex {
    std::int64_t x = 0, y = 0, z = 0;
    bool operator==(const VoxelIndex&) const = default;
};

inline bool in_bounds(const VoxelIndex& i, const VolumeMeta& m) {
    return i.x >= 0 && i.x < m.dims[0] && i.y >= 0 && i.y < m.dims[1] &&
           i.z >= 0 && i.z < m.dims[2];
}

/// x-fastest flat index: x + nx*(y + ny*z).
inline std::int64_t linear_index(const VoxelIndex& i, const VolumeMeta& m) {
    if (!in_bounds(i, m)) throw std::out_of_range("linear_index: voxel out of bounds");
    return i.x + m.dims[0] * (i.y + m.dims[1] * i.z);
}

inline VoxelIndex unlinearize(std::int64_t flat, const VolumeMeta& m) {
    if (flat < 0 || flat >= m.voxel_count())
        throw std::out_of_range("unlinearize: flat index out of bounds");
    VoxelIndex i;
    i.x = flat % m.dims[0];
    flat /= m.dims[0];
    i.y = flat % m.dims[1];
    i.z = flat / m.dims[1];
    return i;
}

/// Dense N-d grid of scalars in x-fastest order.
template <typename T>
struct Volume {
    VolumeMeta meta;
    std::vector<T> data;

    Volume() = default;
    explicit Volume(const VolumeMeta& m, T fill = T{}) : meta(m) {
        meta.validate();
        data.assign(static_cast<std::size_t>(meta.voxel_count()), fill);
    }

    std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }

    T& operator[](std::int64_t flat) { return data[static_cast<std::size_t>(flat)]; }
    const T& operator[](std::int64_t flat) const { return data[static_cast<std::size_t>(flat)]; }

    T& at(std::int64_t x, std::int64_t y, std::int64_t z = 0) {
        return data[static_cast<std::size_t>(x + meta.dims[0] * (y + meta.dims[1] * z))];
    }
    const T& at(std::int64_t x, std::int64_t y, std::int64_t z = 0) const {
        return data[static_cast<std::size_t>(x + meta.dims[0] * (y + meta.dims[1] * z))];
    }

    bool operator==(const Volume&) const = default;
};

constexpr std::uint8_t kForeground = 255;
constexpr std::uint8_t kBackground = 0;

/// U8 volume with values in {0, 255}.
using BinaryMask = Volume<std::uint8_t>;
/// U32 volume of region labels; 0 = watershed line / unlabeled.
using LabelVolume = Volume<std::uint32_t>;
/// F64 volume of physical distances (or any scalar field).
using DistanceField = Volume<double>;
using GradientField = Volume<double>;

inline std::int64_t count_foreground(const BinaryMask& m) {
    std::int64_t n = 0;
    for (std::uint8_t v : m.data) n += (v != 0);
    return n;
}

inline BinaryMask complement(const BinaryMask& m) {
    BinaryMask out(m.meta);
    for (std::int64_t i = 0; i < m.size(); ++i)
        out[i] = m[i] ? kBackground : kForeground;
    return out;
}

}  // namespace voxsurf

#endif  // VOXSURF_VOLUME_HPP
