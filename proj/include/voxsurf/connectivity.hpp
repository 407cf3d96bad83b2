#ifndef VOXSURF_CONNECTIVITY_HPP
#define VOXSURF_CONNECTIVITY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "volume.hpp"

namespace voxsurf {

/// face = axis neighbors only (4 in 2D, 6 in 3D);
/// full = all adjacent including diagonals (8 in 2D, 26 in 3D).
enum class Connectivity { face, full };

struct NeighborOffset {
    std::int64_t dx, dy, dz;
    std::int64_t dflat;  // offset in flat index space for a given grid
};

/// Neighbor offsets in raster order of the offset vector (z, then y, then x).
/// The fixed order is what makes scan-order tie-breaking deterministic.
inline std::vector<NeighborOffset> neighbor_offsets(const VolumeMeta& meta, Connectivity conn) {
    std::vector<NeighborOffset> out;
    const int zlo = meta.ndims == 3 ? -1 : 0;
    const int zhi = meta.ndims == 3 ? 1 : 0;
    for (int dz = zlo; dz <= zhi; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                int manhattan = (dx != 0) + (dy != 0) + (dz != 0);
                if (conn == Connectivity::face && manhattan != 1) continue;
                out.push_back({dx, dy, dz, dx + meta.dims[0] * (dy + meta.dims[1] * static_cast<std::int64_t>(dz))});
            }
    return out;
}

/// True when idx + offset stays inside the grid (checked per axis, not in
/// flat space, so scanline wrap-around is rejected).
inline bool offset_in_bounds(const VoxelIndex& idx, const NeighborOffset& o, const VolumeMeta& m) {
    std::int64_t x = idx.x + o.dx, y = idx.y + o.dy, z = idx.z + o.dz;
    return x >= 0 && x < m.dims[0] && y >= 0 && y < m.dims[1] && z >= 0 && z < m.dims[2];
}

}  // namespace voxsurf

#endif  // VOXSURF_CONNECTIVITY_HPP
