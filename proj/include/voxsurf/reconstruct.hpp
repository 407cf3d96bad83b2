#ifndef VOXSURF_RECONSTRUCT_HPP
#define VOXSURF_RECONSTRUCT_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "edt.hpp"
#include "gradient.hpp"
#include "maskprep.hpp"
#include "metaimage.hpp"
#include "volume.hpp"
#include "watershed.hpp"

namespace voxsurf {

struct LabelStats {
    std::uint32_t label = 0;
    std::int64_t voxels = 0;
    double physical_volume = 0.0;               // voxels * voxel volume
    std::array<double, 3> center_of_mass{};     // voxel units
};

struct ReconstructionResult {
    LabelVolume labels;
    BinaryMask boundary;          // inter-label interface voxels
    std::vector<LabelStats> stats;  // ascending by label
};

/// Voxels sitting on the interface between regions: any labeled voxel with a
/// differing nonzero-labeled neighbor, plus line voxels (label 0) adjacent
/// to two or more distinct labels.
inline BinaryMask extract_boundary(const LabelVolume& labels, Connectivity conn) {
    const VolumeMeta& m = labels.meta;
    auto offsets = neighbor_offsets(m, conn);
    BinaryMask out(m, kBackground);
    parallel_chunks(m.voxel_count(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t v = b; v < e; ++v) {
            VoxelIndex idx = unlinearize(v, m);
            const std::uint32_t own = labels[v];
            std::uint32_t first = 0;
            bool on_boundary = false;
            for (const auto& o : offsets) {
                if (!offset_in_bounds(idx, o, m)) continue;
                std::uint32_t nl = labels[v + o.dflat];
                if (nl == 0) continue;
                if (own != 0) {
                    if (nl != own) { on_boundary = true; break; }
                } else {
                    if (first == 0) first = nl;
                    else if (nl != first) { on_boundary = true; break; }
                }
            }
            if (on_boundary) out[v] = kForeground;
        }
    });
    return out;
}

inline std::vector<LabelStats> label_stats(const LabelVolume& labels) {
    const VolumeMeta& m = labels.meta;
    std::uint32_t max_label = 0;
    for (std::uint32_t v : labels.data) max_label = std::max(max_label, v);
    std::vector<LabelStats> acc(static_cast<std::size_t>(max_label) + 1);
    for (std::int64_t v = 0; v < labels.size(); ++v) {
        std::uint32_t l = labels[v];
        if (l == 0) continue;
        VoxelIndex idx = unlinearize(v, m);
        LabelStats& s = acc[l];
        s.voxels++;
        s.center_of_mass[0] += static_cast<double>(idx.x);
        s.center_of_mass[1] += static_cast<double>(idx.y);
        s.center_of_mass[2] += static_cast<double>(idx.z);
    }
    std::vector<LabelStats> out;
    const double vv = m.voxel_volume();
    for (std::uint32_t l = 1; l <= max_label; ++l) {
        LabelStats s = acc[l];
        if (s.voxels == 0) continue;
        s.label = l;
        s.physical_volume = static_cast<double>(s.voxels) * vv;
        for (double& c : s.center_of_mass) c /= static_cast<double>(s.voxels);
        out.push_back(s);
    }
    return out;
}

/// The full surface-reconstruction pipeline: connected components of the
/// interior class seed a watershed on the beta-weighted combination of the
/// two distance fields. One basin per interior component.
inline ReconstructionResult reconstruct_surfaces(const BinaryMask& c_interior,
                                                 const BinaryMask& c_surface, double beta,
                                                 const WatershedOptions& opts = {}) {
    if (!c_interior.meta.same_grid(c_surface.meta))
        throw std::invalid_argument("reconstruct_surfaces: class masks sit on different grids");
    if (count_foreground(c_interior) == 0)
        throw std::domain_error("interior class mask empty");
    if (count_foreground(c_surface) == 0)
        throw std::domain_error("surface class mask empty");
    GradientParams params{beta};
    params.validate();

    LabelVolume seeds = connected_components(c_interior, opts.connectivity);
    DistanceField d_interior = distance_to_set(c_interior);
    DistanceField d_surface = distance_to_set(c_surface);
    GradientField g = combine(d_interior, d_surface, params);

    ReconstructionResult result;
    result.labels = flood(g, seeds, opts);
    result.boundary = extract_boundary(result.labels, opts.connectivity);
    result.stats = label_stats(result.labels);
    return result;
}

// ---------------------------------------------------------------------------
// OBJ export
// ---------------------------------------------------------------------------

namespace detail {

struct CornerKey {
    std::int64_t x, y, z;
    bool operator==(const CornerKey&) const = default;
};

struct CornerHash {
    std::size_t operator()(const CornerKey& c) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int64_t v : {c.x, c.y, c.z}) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace detail

struct ObjSelector {
    bool all = true;
    std::uint32_t label = 0;
    static ObjSelector everything() { return {true, 0}; }
    static ObjSelector single(std::uint32_t id) { return {false, id}; }
};

/// Write the voxel-face surfaces of the selected labels as a Wavefront OBJ:
/// axis-aligned quads split into triangles, vertices at voxel-corner
/// physical coordinates, deduplicated; one "g label_<id>" group per label.
/// Faces separate a label from anything differently labeled, including the
/// volume exterior, so interior labels produce closed surfaces.
inline void export_obj(const LabelVolume& labels, const ObjSelector& sel,
                       const std::filesystem::path& path) {
    const VolumeMeta& m = labels.meta;
    std::vector<std::uint32_t> selected;
    {
        std::uint32_t max_label = 0;
        for (std::uint32_t v : labels.data) max_label = std::max(max_label, v);
        std::vector<bool> present(static_cast<std::size_t>(max_label) + 1, false);
        for (std::uint32_t v : labels.data)
            if (v != 0) present[v] = true;
        if (sel.all) {
            for (std::uint32_t l = 1; l <= max_label; ++l)
                if (present[l]) selected.push_back(l);
        } else {
            if (sel.label == 0 || sel.label > max_label || !present[sel.label])
                throw std::invalid_argument("export_obj: unknown label id");
            selected.push_back(sel.label);
        }
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_obj: cannot open " + path.string());
    out << "# voxel-face surface mesh\n";

    std::unordered_map<detail::CornerKey, std::int64_t, detail::CornerHash> corner_ids;
    std::vector<detail::CornerKey> corners;
    auto corner = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> std::int64_t {
        detail::CornerKey key{x, y, z};
        auto [it, inserted] = corner_ids.try_emplace(key, static_cast<std::int64_t>(corners.size()) + 1);
        if (inserted) corners.push_back(key);
        return it->second;
    };

    // The six face directions; each quad is wound counter-clockwise as seen
    // from outside the voxel. c[i] are corner offsets within the unit cube.
    struct FaceSpec {
        std::int64_t dx, dy, dz;
        std::array<std::array<std::int64_t, 3>, 4> c;
    };
    static const std::array<FaceSpec, 6> kFaces{{
        {-1, 0, 0, {{{0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {0, 1, 0}}}},
        {+1, 0, 0, {{{1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {1, 0, 1}}}},
        {0, -1, 0, {{{0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {0, 0, 1}}}},
        {0, +1, 0, {{{0, 1, 0}, {0, 1, 1}, {1, 1, 1}, {1, 1, 0}}}},
        {0, 0, -1, {{{0, 0, 0}, {0, 1, 0}, {1, 1, 0}, {1, 0, 0}}}},
        {0, 0, +1, {{{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}}},
    }};

    struct Tri {
        std::int64_t a, b, c;
    };
    std::vector<std::vector<Tri>> group_tris(selected.size());

    for (std::size_t gi = 0; gi < selected.size(); ++gi) {
        const std::uint32_t want = selected[gi];
        for (std::int64_t v = 0; v < m.voxel_count(); ++v) {
            if (labels[v] != want) continue;
            VoxelIndex i = unlinearize(v, m);
            for (const auto& f : kFaces) {
                std::int64_t nx = i.x + f.dx, ny = i.y + f.dy, nz = i.z + f.dz;
                bool inside = nx >= 0 && nx < m.dims[0] && ny >= 0 && ny < m.dims[1] &&
                              nz >= 0 && nz < m.dims[2];
                if (inside && labels.at(nx, ny, nz) == want) continue;
                std::array<std::int64_t, 4> q;
                for (int k = 0; k < 4; ++k)
                    q[static_cast<std::size_t>(k)] =
                        corner(i.x + f.c[static_cast<std::size_t>(k)][0],
                               i.y + f.c[static_cast<std::size_t>(k)][1],
                               i.z + f.c[static_cast<std::size_t>(k)][2]);
                group_tris[gi].push_back({q[0], q[1], q[2]});
                group_tris[gi].push_back({q[0], q[2], q[3]});
            }
        }
    }

    for (const auto& c : corners)
        out << "v " << detail::format_double(static_cast<double>(c.x) * m.spacing[0]) << " "
            << detail::format_double(static_cast<double>(c.y) * m.spacing[1]) << " "
            << detail::format_double(static_cast<double>(c.z) * m.spacing[2]) << "\n";
    for (std::size_t gi = 0; gi < selected.size(); ++gi) {
        out << "g label_" << selected[gi] << "\n";
        for (const Tri& t : group_tris[gi])
            out << "f " << t.a << " " << t.b << " " << t.c << "\n";
    }
    if (!out) throw std::runtime_error("export_obj: write failed for " + path.string());
}

}  // namespace voxsurf

#endif  // VOXSURF_RECONSTRUCT_HPP
