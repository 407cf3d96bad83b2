#ifndef VOXSURF_MASKPREP_HPP
#define VOXSURF_MASKPREP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

#include "connectivity.hpp"
#include "threading.hpp"
#include "volume.hpp"

namespace voxsurf {

// ---------------------------------------------------------------------------
// Thresholding
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void minmax(const Volume<T>& v, double& lo, double& hi) {
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (const T& x : v.data) {
        double d = static_cast<double>(x);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
}

/// Otsu split of a histogram: the bucket index k maximizing between-class
/// variance for the partition {<= k} vs {> k}; ties go to the smallest k.
inline int otsu_split(const std::vector<std::int64_t>& hist) {
    const int bins = static_cast<int>(hist.size());
    double total = 0.0, total_mean = 0.0;
    for (int b = 0; b < bins; ++b) {
        total += static_cast<double>(hist[b]);
        total_mean += static_cast<double>(hist[b]) * b;
    }
    double w0 = 0.0, sum0 = 0.0, best = -1.0;
    int best_k = 0;
    for (int k = 0; k + 1 < bins; ++k) {
        w0 += static_cast<double>(hist[k]);
        sum0 += static_cast<double>(hist[k]) * k;
        double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        double mu0 = sum0 / w0, mu1 = (total_mean - sum0) / w1;
        double variance = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (variance > best) {
            best = variance;
            best_k = k;
        }
    }
    return best_k;
}

template <typename T, typename Visit>
void for_each_in_box(const Volume<T>& v, const std::array<std::int64_t, 3>& b0,
                     const std::array<std::int64_t, 3>& b1, Visit&& visit) {
    for (std::int64_t z = b0[2]; z < b1[2]; ++z)
        for (std::int64_t y = b0[1]; y < b1[1]; ++y)
            for (std::int64_t x = b0[0]; x < b1[0]; ++x) visit(v.at(x, y, z));
}

/// Otsu threshold of the values inside a sub-box; nan when degenerate.
template <typename T>
double otsu_of_box(const Volume<T>& v, const std::array<std::int64_t, 3>& b0,
                   const std::array<std::int64_t, 3>& b1, int bins) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for_each_in_box(v, b0, b1, [&](const T& x) {
        double d = static_cast<double>(x);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    });
    if (!(hi > lo)) return std::numeric_limits<double>::quiet_NaN();
    std::vector<std::int64_t> hist(static_cast<std::size_t>(bins), 0);
    const double scale = bins / (hi - lo);
    for_each_in_box(v, b0, b1, [&](const T& x) {
        auto b = static_cast<std::int64_t>((static_cast<double>(x) - lo) * scale);
        hist[static_cast<std::size_t>(std::clamp<std::int64_t>(b, 0, bins - 1))]++;
    });
    int k = otsu_split(hist);
    return lo + (k + 1) * ((hi - lo) / bins);
}

}  // namespace detail

/// Global Otsu threshold over a bins-bucket histogram of [min, max].
/// Foreground is defined as values strictly greater than the threshold.
template <typename T>
double otsu_threshold(const Volume<T>& gray, int bins = 256) {
    if (bins < 2) throw std::invalid_argument("otsu_threshold: bins must be >= 2");
    std::array<std::int64_t, 3> b0{0, 0, 0};
    double t = detail::otsu_of_box(gray, b0, gray.meta.dims, bins);
    if (std::isnan(t)) throw std::domain_error("degenerate histogram");
    return t;
}

template <typename T>
BinaryMask threshold_mask(const Volume<T>& gray, double threshold) {
    BinaryMask out(gray.meta);
    parallel_chunks(gray.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            out[i] = static_cast<double>(gray[i]) > threshold ? kForeground : kBackground;
    });
    return out;
}

/// Per-tile Otsu thresholds on a regular tiling, interpolated multilinearly
/// between tile centers (clamped at the borders). A tile whose histogram is
/// degenerate inherits the global Otsu threshold.
template <typename T>
BinaryMask adaptive_otsu(const Volume<T>& gray, std::array<std::int64_t, 3> window_dims,
                         int bins = 256) {
    const VolumeMeta& m = gray.meta;
    if (m.ndims == 2) window_dims[2] = 1;
    std::array<std::int64_t, 3> n_tiles;
    for (int a = 0; a < 3; ++a) {
        if (window_dims[a] < 1 || window_dims[a] > m.dims[a])
            throw std::invalid_argument("adaptive_otsu: window must be in [1, dims] per axis");
        n_tiles[a] = (m.dims[a] + window_dims[a] - 1) / window_dims[a];
    }

    const double global = otsu_threshold(gray, bins);  // degenerate image throws here

    // Tile thresholds and tile-center coordinates per axis.
    std::array<std::vector<double>, 3> centers;
    for (int a = 0; a < 3; ++a)
        for (std::int64_t t = 0; t < n_tiles[a]; ++t) {
            std::int64_t start = t * window_dims[a];
            std::int64_t end = std::min(m.dims[a], start + window_dims[a]);
            centers[a].push_back(0.5 * static_cast<double>(start + end - 1));
        }

    const std::int64_t total_tiles = n_tiles[0] * n_tiles[1] * n_tiles[2];
    std::vector<double> tile_t(static_cast<std::size_t>(total_tiles));
    parallel_chunks(total_tiles, [&](std::int64_t tb, std::int64_t te) {
        for (std::int64_t t = tb; t < te; ++t) {
            std::int64_t tx = t % n_tiles[0];
            std::int64_t ty = (t / n_tiles[0]) % n_tiles[1];
            std::int64_t tz = t / (n_tiles[0] * n_tiles[1]);
            std::array<std::int64_t, 3> b0{tx * window_dims[0], ty * window_dims[1], tz * window_dims[2]};
            std::array<std::int64_t, 3> b1{std::min(m.dims[0], b0[0] + window_dims[0]),
                                           std::min(m.dims[1], b0[1] + window_dims[1]),
                                           std::min(m.dims[2], b0[2] + window_dims[2])};
            double v = detail::otsu_of_box(gray, b0, b1, bins);
            tile_t[static_cast<std::size_t>(t)] = std::isnan(v) ? global : v;
        }
    });

    // Per-axis interpolation segment: tile pair (i, i+1) and fraction.
    auto segment = [&](int a, std::int64_t coord, std::int64_t& i, double& frac) {
        const auto& c = centers[a];
        double x = static_cast<double>(coord);
        if (c.size() == 1 || x <= c.front()) { i = 0; frac = 0.0; return; }
        if (x >= c.back()) { i = static_cast<std::int64_t>(c.size()) - 2; frac = 1.0; return; }
        std::int64_t hi = static_cast<std::int64_t>(std::upper_bound(c.begin(), c.end(), x) - c.begin());
        i = hi - 1;
        frac = (x - c[static_cast<std::size_t>(i)]) /
               (c[static_cast<std::size_t>(hi)] - c[static_cast<std::size_t>(i)]);
    };

    BinaryMask out(m);
    parallel_chunks(m.voxel_count(), [&](std::int64_t vb, std::int64_t ve) {
        std::int64_t prev_y = -1, prev_z = -1;
        std::int64_t iy = 0, iz = 0;
        double fy = 0.0, fz = 0.0;
        for (std::int64_t v = vb; v < ve; ++v) {
            std::int64_t x = v % m.dims[0];
            std::int64_t y = (v / m.dims[0]) % m.dims[1];
            std::int64_t z = v / (m.dims[0] * m.dims[1]);
            if (y != prev_y) { segment(1, y, iy, fy); prev_y = y; }
            if (z != prev_z) { segment(2, z, iz, fz); prev_z = z; }
            std::int64_t ix;
            double fx;
            segment(0, x, ix, fx);
            double acc = 0.0;
            for (int corner = 0; corner < 8; ++corner) {
                int cx = corner & 1, cy = (corner >> 1) & 1, cz = (corner >> 2) & 1;
                double w = (cx ? fx : 1.0 - fx) * (cy ? fy : 1.0 - fy) * (cz ? fz : 1.0 - fz);
                if (w == 0.0) continue;
                std::int64_t tx = std::min(ix + cx, n_tiles[0] - 1);
                std::int64_t ty = std::min(iy + cy, n_tiles[1] - 1);
                std::int64_t tz = std::min(iz + cz, n_tiles[2] - 1);
                acc += w * tile_t[static_cast<std::size_t>(tx + n_tiles[0] * (ty + n_tiles[1] * tz))];
            }
            out[v] = static_cast<double>(gray[v]) > acc ? kForeground : kBackground;
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Binary morphology
// ---------------------------------------------------------------------------

/// box = Chebyshev ball (cube of side 2r+1); cross = L1 ball, i.e. the
/// radius-r iterate of the face-neighbor element. Radius 0 is the identity.
struct StructuringElement {
    enum class Shape { box, cross };
    Shape shape = Shape::box;
    int radius = 1;
};

enum class MorphOp { erode, dilate, open, close };

namespace detail {

inline std::vector<std::array<std::int64_t, 3>> se_offsets(const StructuringElement& se, int ndims) {
    if (se.radius < 0) throw std::invalid_argument("StructuringElement: radius must be >= 0");
    std::vector<std::array<std::int64_t, 3>> out;
    const std::int64_t r = se.radius;
    const std::int64_t zr = ndims == 3 ? r : 0;
    for (std::int64_t dz = -zr; dz <= zr; ++dz)
        for (std::int64_t dy = -r; dy <= r; ++dy)
            for (std::int64_t dx = -r; dx <= r; ++dx) {
                if (se.shape == StructuringElement::Shape::cross &&
                    std::abs(dx) + std::abs(dy) + std::abs(dz) > r)
                    continue;
                out.push_back({dx, dy, dz});
            }
    return out;
}

/// erode_mode: all offsets must land on foreground (outside the volume is
/// background); otherwise any offset on foreground marks the voxel.
inline BinaryMask morph_basic(const BinaryMask& mask, bool erode_mode, const StructuringElement& se) {
    const VolumeMeta& m = mask.meta;
    auto offsets = se_offsets(se, m.ndims);
    BinaryMask out(m);
    parallel_chunks(m.voxel_count(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t v = b; v < e; ++v) {
            std::int64_t x = v % m.dims[0];
            std::int64_t y = (v / m.dims[0]) % m.dims[1];
            std::int64_t z = v / (m.dims[0] * m.dims[1]);
            bool result = erode_mode;
            for (const auto& o : offsets) {
                std::int64_t nx = x + o[0], ny = y + o[1], nz = z + o[2];
                bool inside = nx >= 0 && nx < m.dims[0] && ny >= 0 && ny < m.dims[1] &&
                              nz >= 0 && nz < m.dims[2];
                bool fg = inside && mask.at(nx, ny, nz) != 0;
                if (erode_mode && !fg) { result = false; break; }
                if (!erode_mode && fg) { result = true; break; }
            }
            out[v] = result ? kForeground : kBackground;
        }
    });
    return out;
}

}  // namespace detail

inline BinaryMask morph(const BinaryMask& mask, MorphOp op, const StructuringElement& se) {
    switch (op) {
        case MorphOp::erode: return detail::morph_basic(mask, true, se);
        case MorphOp::dilate: return detail::morph_basic(mask, false, se);
        case MorphOp::open:
            return detail::morph_basic(detail::morph_basic(mask, true, se), false, se);
        case MorphOp::close:
            return detail::morph_basic(detail::morph_basic(mask, false, se), true, se);
    }
    throw std::invalid_argument("morph: unknown operation");
}

// ---------------------------------------------------------------------------
// Components and holes
// ---------------------------------------------------------------------------

/// Label the maximal connected foreground sets 1..K, in raster-scan order of
/// each component's first-encountered voxel. Deterministic by construction.
inline LabelVolume connected_components(const BinaryMask& mask, Connectivity conn) {
    const VolumeMeta& m = mask.meta;
    LabelVolume labels(m, 0);
    auto offsets = neighbor_offsets(m, conn);
    std::vector<std::int64_t> stack;
    std::uint32_t next = 0;
    for (std::int64_t start = 0; start < m.voxel_count(); ++start) {
        if (mask[start] == 0 || labels[start] != 0) continue;
        ++next;
        labels[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            std::int64_t v = stack.back();
            stack.pop_back();
            VoxelIndex idx = unlinearize(v, m);
            for (const auto& o : offsets) {
                if (!offset_in_bounds(idx, o, m)) continue;
                std::int64_t n = v + o.dflat;
                if (mask[n] != 0 && labels[n] == 0) {
                    labels[n] = next;
                    stack.push_back(n);
                }
            }
        }
    }
    return labels;
}

/// Background components not connected to the volume border (under conn,
/// applied to the background) become foreground.
inline BinaryMask fill_holes(const BinaryMask& mask, Connectivity conn) {
    const VolumeMeta& m = mask.meta;
    auto offsets = neighbor_offsets(m, conn);
    std::vector<std::uint8_t> reached(static_cast<std::size_t>(m.voxel_count()), 0);
    std::vector<std::int64_t> stack;
    for (std::int64_t v = 0; v < m.voxel_count(); ++v) {
        if (mask[v] != 0 || reached[static_cast<std::size_t>(v)]) continue;
        VoxelIndex i = unlinearize(v, m);
        bool border = i.x == 0 || i.x == m.dims[0] - 1 || i.y == 0 || i.y == m.dims[1] - 1;
        if (m.ndims == 3) border = border || i.z == 0 || i.z == m.dims[2] - 1;
        if (!border) continue;
        reached[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
        while (!stack.empty()) {
            std::int64_t cur = stack.back();
            stack.pop_back();
            VoxelIndex idx = unlinearize(cur, m);
            for (const auto& o : offsets) {
                if (!offset_in_bounds(idx, o, m)) continue;
                std::int64_t n = cur + o.dflat;
                if (mask[n] == 0 && !reached[static_cast<std::size_t>(n)]) {
                    reached[static_cast<std::size_t>(n)] = 1;
                    stack.push_back(n);
                }
            }
        }
    }
    BinaryMask out = mask;
    for (std::int64_t v = 0; v < m.voxel_count(); ++v)
        if (mask[v] == 0 && !reached[static_cast<std::size_t>(v)]) out[v] = kForeground;
    return out;
}

/// Drop components smaller than min_voxels and renumber the survivors
/// 1..K' in raster order of first occurrence.
inline LabelVolume remove_small(const LabelVolume& labels, std::int64_t min_voxels) {
    if (min_voxels < 0) throw std::invalid_argument("remove_small: min_voxels must be >= 0");
    std::uint32_t max_label = 0;
    for (std::uint32_t v : labels.data) max_label = std::max(max_label, v);
    std::vector<std::int64_t> count(static_cast<std::size_t>(max_label) + 1, 0);
    for (std::uint32_t v : labels.data) count[v]++;

    std::vector<std::uint32_t> remap(static_cast<std::size_t>(max_label) + 1, 0);
    std::uint32_t next = 0;
    LabelVolume out(labels.meta, 0);
    std::vector<bool> seen(static_cast<std::size_t>(max_label) + 1, false);
    for (std::int64_t v = 0; v < labels.size(); ++v) {
        std::uint32_t l = labels[v];
        if (l == 0 || count[l] < min_voxels) continue;
        if (!seen[l]) {
            seen[l] = true;
            remap[l] = ++next;
        }
        out[v] = remap[l];
    }
    return out;
}

}  // namespace voxsurf

#endif  // VOXSURF_MASKPREP_HPP
