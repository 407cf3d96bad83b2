#ifndef VOXSURF_PHANTOM_HPP
#define VOXSURF_PHANTOM_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include "maskprep.hpp"
#include "reconstruct.hpp"
#include "threading.hpp"
#include "volume.hpp"

namespace voxsurf {

/// Everything needed to regenerate a phantom bit-identically.
struct PhantomSpec {
    enum class Generator { two_spheres, voronoi_cells, lobule_2d };
    Generator generator = Generator::two_spheres;
    VolumeMeta meta;
    std::vector<std::array<double, 3>> centers;        // two_spheres / lobule central veins
    std::vector<std::array<double, 3>> portal_points;  // lobule portal veins
    double radius = 4.0;                               // ball/disk radius, physical units
    int n_seeds = 8;                                   // voronoi_cells
    double min_seed_distance = 0.0;                    // 0 = auto
    std::uint64_t rng_seed = 1;
    double coverage = 1.0;                             // (0, 1] of surface voxels kept
};

struct PhantomOutput {
    BinaryMask c_interior;
    BinaryMask c_surface;
    LabelVolume ground_truth;
    bool has_ground_truth = false;
};

namespace detail {

// Uses only the raw mt19937_64 stream, which the standard pins down exactly,
// so outputs replay across standard libraries.
inline double canonical(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double dist2_physical(const VoxelIndex& v, const std::array<double, 3>& p,
                             const VolumeMeta& m) {
    double acc = 0.0;
    const double d0 = (static_cast<double>(v.x) - p[0]) * m.spacing[0];
    const double d1 = (static_cast<double>(v.y) - p[1]) * m.spacing[1];
    acc = d0 * d0 + d1 * d1;
    if (m.ndims == 3) {
        const double d2 = (static_cast<double>(v.z) - p[2]) * m.spacing[2];
        acc += d2 * d2;
    }
    return acc;
}

/// Rasterize a ball: voxel included iff its center lies within radius.
inline void paint_ball(BinaryMask& mask, const std::array<double, 3>& center, double radius,
                       bool& overlapped) {
    const VolumeMeta& m = mask.meta;
    const double r2 = radius * radius;
    std::array<std::int64_t, 3> lo, hi;
    for (int a = 0; a < 3; ++a) {
        if (a == 2 && m.ndims == 2) { lo[a] = 0; hi[a] = 0; continue; }
        lo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(center[a] - radius / m.spacing[a])));
        hi[a] = std::min<std::int64_t>(m.dims[a] - 1, static_cast<std::int64_t>(std::ceil(center[a] + radius / m.spacing[a])));
    }
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z)
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y)
            for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
                if (dist2_physical({x, y, z}, center, m) > r2) continue;
                std::uint8_t& cell = mask.at(x, y, z);
                if (cell != 0) overlapped = true;
                cell = kForeground;
            }
}

/// Drop surface voxels at random until roughly the coverage fraction is
/// left. Raster order + the pinned RNG make the result reproducible.
inline void thin_to_coverage(BinaryMask& mask, double coverage, std::mt19937_64& gen) {
    if (!(coverage > 0.0 && coverage <= 1.0))
        throw std::invalid_argument("phantom: coverage must be in (0, 1]");
    for (std::int64_t v = 0; v < mask.size(); ++v) {
        if (mask[v] == 0) continue;
        if (canonical(gen) >= coverage) mask[v] = kBackground;
    }
}

inline bool masks_intersect(const BinaryMask& a, const BinaryMask& b) {
    for (std::int64_t v = 0; v < a.size(); ++v)
        if (a[v] != 0 && b[v] != 0) return true;
    return false;
}

}  // namespace detail

/// Two balls as the interior class, the 1-voxel domain-boundary shell as the
/// surface class (thinned to the coverage fraction), ground truth labeled by
/// the nearer center (ties to the lower label).
inline PhantomOutput two_spheres(const PhantomSpec& spec) {
    const VolumeMeta& m = spec.meta;
    m.validate();
    if (spec.centers.size() != 2)
        throw std::invalid_argument("two_spheres: exactly two centers required");

    PhantomOutput out;
    out.c_interior = BinaryMask(m, kBackground);
    bool overlapped = false;
    for (const auto& c : spec.centers) detail::paint_ball(out.c_interior, c, spec.radius, overlapped);
    if (overlapped) throw std::invalid_argument("two_spheres: balls overlap");

    out.c_surface = BinaryMask(m, kBackground);
    for (std::int64_t v = 0; v < out.c_surface.size(); ++v) {
        VoxelIndex i = unlinearize(v, m);
        bool shell = i.x == 0 || i.x == m.dims[0] - 1 || i.y == 0 || i.y == m.dims[1] - 1;
        if (m.ndims == 3) shell = shell || i.z == 0 || i.z == m.dims[2] - 1;
        if (shell) out.c_surface[v] = kForeground;
    }
    std::mt19937_64 gen(spec.rng_seed);
    detail::thin_to_coverage(out.c_surface, spec.coverage, gen);
    if (detail::masks_intersect(out.c_interior, out.c_surface))
        throw std::invalid_argument("two_spheres: interior class touches the domain shell");

    out.ground_truth = LabelVolume(m, 0);
    parallel_chunks(m.voxel_count(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t v = b; v < e; ++v) {
            VoxelIndex i = unlinearize(v, m);
            double d0 = detail::dist2_physical(i, spec.centers[0], m);
            double d1 = detail::dist2_physical(i, spec.centers[1], m);
            out.ground_truth[v] = d1 < d0 ? 2 : 1;  // ties go to the lower label
        }
    });
    out.has_ground_truth = true;
    return out;
}

/// Voronoi mosaic: RNG-placed seeds with a minimum pairwise distance,
/// ground truth = nearest-seed labels, interior class = balls at the seeds,
/// surface class = the inter-label boundary thinned to the coverage fraction.
inline PhantomOutput voronoi_cells(const PhantomSpec& spec) {
    const VolumeMeta& m = spec.meta;
    m.validate();
    if (spec.n_seeds < 2) throw std::invalid_argument("voronoi_cells: n_seeds must be >= 2");

    double max_spacing = std::max(m.spacing[0], m.spacing[1]);
    if (m.ndims == 3) max_spacing = std::max(max_spacing, m.spacing[2]);
    const double min_dist = spec.min_seed_distance > 0.0
                                ? spec.min_seed_distance
                                : 2.0 * spec.radius + 6.0 * max_spacing;
    const double min_dist2 = min_dist * min_dist;

    std::mt19937_64 gen(spec.rng_seed);
    std::vector<std::array<double, 3>> seeds;
    const std::int64_t max_attempts = 10000 * static_cast<std::int64_t>(spec.n_seeds);
    for (std::int64_t attempt = 0; attempt < max_attempts &&
                                   seeds.size() < static_cast<std::size_t>(spec.n_seeds);
         ++attempt) {
        std::array<double, 3> p{0.0, 0.0, 0.0};
        for (int a = 0; a < m.ndims; ++a) {
            auto c = static_cast<std::int64_t>(detail::canonical(gen) * static_cast<double>(m.dims[a]));
            p[static_cast<std::size_t>(a)] = static_cast<double>(std::min(c, m.dims[a] - 1));
        }
        bool ok = true;
        for (const auto& q : seeds) {
            std::array<double, 3> diff{(p[0] - q[0]) * m.spacing[0], (p[1] - q[1]) * m.spacing[1],
                                       (p[2] - q[2]) * m.spacing[2]};
            if (diff[0] * diff[0] + diff[1] * diff[1] + diff[2] * diff[2] < min_dist2) {
                ok = false;
                break;
            }
        }
        if (ok) seeds.push_back(p);
    }
    if (seeds.size() < static_cast<std::size_t>(spec.n_seeds))
        throw std::runtime_error("voronoi_cells: cannot place seeds with the distance constraint");

    PhantomOutput out;
    out.ground_truth = LabelVolume(m, 0);
    parallel_chunks(m.voxel_count(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t v = b; v < e; ++v) {
            VoxelIndex i = unlinearize(v, m);
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t label = 1;
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                double d2 = detail::dist2_physical(i, seeds[s], m);
                if (d2 < best) {  // strict: ties stay with the lower index
                    best = d2;
                    label = static_cast<std::uint32_t>(s) + 1;
                }
            }
            out.ground_truth[v] = label;
        }
    });
    out.has_ground_truth = true;

    out.c_interior = BinaryMask(m, kBackground);
    bool overlapped = false;
    for (const auto& s : seeds) detail::paint_ball(out.c_interior, s, spec.radius, overlapped);
    if (overlapped) throw std::runtime_error("voronoi_cells: nucleus balls overlap");
    {
        LabelVolume cc = connected_components(out.c_interior, Connectivity::full);
        std::uint32_t n = 0;
        for (std::uint32_t v : cc.data) n = std::max(n, v);
        if (n != static_cast<std::uint32_t>(spec.n_seeds))
            throw std::runtime_error("voronoi_cells: nucleus balls merge into fewer components");
    }

    out.c_surface = extract_boundary(out.ground_truth, Connectivity::full);
    detail::thin_to_coverage(out.c_surface, spec.coverage, gen);
    if (detail::masks_intersect(out.c_interior, out.c_surface))
        throw std::runtime_error("voronoi_cells: nucleus balls touch the cell boundary");
    return out;
}

/// 2D lobule layout: central-vein disks as the interior class, portal-vein
/// disks as the surface class. Qualitative; no ground truth.
inline PhantomOutput lobule_2d(const PhantomSpec& spec) {
    const VolumeMeta& m = spec.meta;
    m.validate();
    if (m.ndims != 2) throw std::invalid_argument("lobule_2d: 2D grid required");
    if (spec.centers.empty() || spec.portal_points.empty())
        throw std::invalid_argument("lobule_2d: both vein point sets required");

    PhantomOutput out;
    out.c_interior = BinaryMask(m, kBackground);
    out.c_surface = BinaryMask(m, kBackground);
    bool overlap_within = false;
    for (const auto& c : spec.centers) detail::paint_ball(out.c_interior, c, spec.radius, overlap_within);
    for (const auto& c : spec.portal_points) detail::paint_ball(out.c_surface, c, spec.radius, overlap_within);
    if (detail::masks_intersect(out.c_interior, out.c_surface))
        throw std::invalid_argument("lobule_2d: central and portal disks overlap");
    return out;
}

inline PhantomOutput generate_phantom(const PhantomSpec& spec) {
    switch (spec.generator) {
        case PhantomSpec::Generator::two_spheres: return two_spheres(spec);
        case PhantomSpec::Generator::voronoi_cells: return voronoi_cells(spec);
        case PhantomSpec::Generator::lobule_2d: return lobule_2d(spec);
    }
    throw std::invalid_argument("generate_phantom: unknown generator");
}

inline const char* generator_name(PhantomSpec::Generator g) {
    switch (g) {
        case PhantomSpec::Generator::two_spheres: return "two_spheres";
        case PhantomSpec::Generator::voronoi_cells: return "voronoi_cells";
        case PhantomSpec::Generator::lobule_2d: return "lobule_2d";
    }
    return "?";
}

/// Sidecar recording the full spec, so any output can be replayed.
inline void write_phantom_spec(const PhantomSpec& spec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_phantom_spec: cannot open " + path.string());
    auto points = [&](const std::vector<std::array<double, 3>>& ps) {
        std::string s;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (i) s += ";";
            for (int a = 0; a < spec.meta.ndims; ++a) {
                if (a) s += ",";
                s += detail::format_double(ps[i][static_cast<std::size_t>(a)]);
            }
        }
        return s;
    };
    out << "generator = " << generator_name(spec.generator) << "\n";
    out << "ndims = " << spec.meta.ndims << "\n";
    out << "dims =";
    for (int a = 0; a < spec.meta.ndims; ++a) out << " " << spec.meta.dims[a];
    out << "\nspacing =";
    for (int a = 0; a < spec.meta.ndims; ++a)
        out << " " << detail::format_double(spec.meta.spacing[a]);
    out << "\nradius = " << detail::format_double(spec.radius) << "\n";
    out << "rng_seed = " << spec.rng_seed << "\n";
    out << "coverage = " << detail::format_double(spec.coverage) << "\n";
    switch (spec.generator) {
        case PhantomSpec::Generator::two_spheres:
            out << "centers = " << points(spec.centers) << "\n";
            break;
        case PhantomSpec::Generator::voronoi_cells:
            out << "n_seeds = " << spec.n_seeds << "\n";
            out << "min_seed_distance = " << detail::format_double(spec.min_seed_distance) << "\n";
            break;
        case PhantomSpec::Generator::lobule_2d:
            out << "central_veins = " << points(spec.centers) << "\n";
            out << "portal_veins = " << points(spec.portal_points) << "\n";
            break;
    }
    if (!out) throw std::runtime_error("write_phantom_spec: write failed for " + path.string());
}

}  // namespace voxsurf

#endif  // VOXSURF_PHANTOM_HPP
