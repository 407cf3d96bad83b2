#ifndef VOXSURF_EDT_HPP
#define VOXSURF_EDT_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "threading.hpp"
#include "volume.hpp"

namespace voxsurf {

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// One lower-envelope pass along a line of squared distances.
/// f[j] is the best squared distance so far for the sample at position
/// j*step; entries of +inf mean "no site in this line yet". All arithmetic
/// stays in squared form, so for unit spacing every value is an exact
/// integer in double and only the final sqrt (done by the caller) rounds.
inline void envelope_line(const double* f, double* out, std::int64_t n, double step,
                          std::int64_t* hull, double* cross) {
    std::int64_t k = -1;
    for (std::int64_t q = 0; q < n; ++q) {
        if (f[q] == kInf) continue;
        if (k >= 0) {
            double qs = static_cast<double>(q) * step;
            double intersect;
            for (;;) {
                double vs = static_cast<double>(hull[k]) * step;
                intersect = ((f[q] + qs * qs) - (f[hull[k]] + vs * vs)) /
                            (2.0 * step * static_cast<double>(q - hull[k]));
                if (intersect > cross[k]) break;
                --k;  // cross[0] is -inf, so the loop always stops
            }
            ++k;
            hull[k] = q;
            cross[k] = intersect;
            cross[k + 1] = kInf;
        } else {
            k = 0;
            hull[0] = q;
            cross[0] = -kInf;
            cross[1] = kInf;
        }
    }
    if (k < 0) {
        for (std::int64_t q = 0; q < n; ++q) out[q] = kInf;
        return;
    }
    std::int64_t seg = 0;
    for (std::int64_t q = 0; q < n; ++q) {
        double qs = static_cast<double>(q) * step;
        while (cross[seg + 1] < qs) ++seg;
        double d = static_cast<double>(q - hull[seg]) * step;
        out[q] = d * d + f[hull[seg]];
    }
}

/// Apply envelope_line along one axis of a squared-distance volume,
/// parallel over the independent scanlines.
inline void edt_axis_pass(Volume<double>& d2, int axis) {
    const auto& dims = d2.meta.dims;
    const std::int64_t n = dims[axis];
    if (n <= 1) return;
    const double step = d2.meta.spacing[axis];

    std::int64_t stride, n_lines;
    switch (axis) {
        case 0: stride = 1; n_lines = dims[1] * dims[2]; break;
        case 1: stride = dims[0]; n_lines = dims[0] * dims[2]; break;
        default: stride = dims[0] * dims[1]; n_lines = dims[0] * dims[1]; break;
    }
    auto line_base = [&](std::int64_t line) -> std::int64_t {
        switch (axis) {
            case 0: return line * dims[0];
            case 1: return (line % dims[0]) + dims[0] * dims[1] * (line / dims[0]);
            default: return line;
        }
    };

    parallel_chunks(n_lines, [&](std::int64_t lb, std::int64_t le) {
        std::vector<double> f(static_cast<std::size_t>(n));
        std::vector<double> out(static_cast<std::size_t>(n));
        std::vector<std::int64_t> hull(static_cast<std::size_t>(n));
        std::vector<double> cross(static_cast<std::size_t>(n) + 1);
        for (std::int64_t line = lb; line < le; ++line) {
            const std::int64_t base = line_base(line);
            for (std::int64_t j = 0; j < n; ++j) f[static_cast<std::size_t>(j)] = d2[base + j * stride];
            envelope_line(f.data(), out.data(), n, step, hull.data(), cross.data());
            for (std::int64_t j = 0; j < n; ++j) d2[base + j * stride] = out[static_cast<std::size_t>(j)];
        }
    });
}

}  // namespace detail

/// Squared Euclidean distance (physical units) from each voxel center to
/// the nearest foreground voxel center. Exact: squared values for unit
/// spacing are integers.
inline Volume<double> distance_squared_to_set(const BinaryMask& mask) {
    mask.meta.validate();
    Volume<double> d2(mask.meta);
    bool any = false;
    for (std::int64_t i = 0; i < mask.size(); ++i) {
        bool fg = mask[i] != 0;
        any |= fg;
        d2[i] = fg ? 0.0 : detail::kInf;
    }
    if (!any) throw std::domain_error("class mask empty");
    for (int axis = 0; axis < mask.meta.ndims; ++axis) detail::edt_axis_pass(d2, axis);
    return d2;
}

/// Euclidean distance to the nearest foreground voxel center.
inline DistanceField distance_to_set(const BinaryMask& mask) {
    Volume<double> d = distance_squared_to_set(mask);
    parallel_chunks(d.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) d[i] = std::sqrt(d[i]);
    });
    return d;
}

/// Signed distance: positive outside the mask, negative inside, with
/// magnitude equal to the distance to the complementary set. Foreground
/// voxels adjacent to background carry -spacing, not 0.
inline DistanceField signed_distance(const BinaryMask& mask) {
    std::int64_t fg = count_foreground(mask);
    if (fg == 0) throw std::domain_error("class mask empty");
    if (fg == mask.size()) throw std::domain_error("signed_distance: mask is all foreground");
    DistanceField outside = distance_to_set(mask);
    DistanceField inside = distance_to_set(complement(mask));
    parallel_chunks(outside.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            if (mask[i]) outside[i] = -inside[i];
    });
    return outside;
}

}  // namespace voxsurf

#endif  // VOXSURF_EDT_HPP
