#ifndef VOXSURF_WATERSHED_HPP
#define VOXSURF_WATERSHED_HPP

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include "connectivity.hpp"
#include "volume.hpp"

namespace voxsurf {

struct WatershedOptions {
    enum class SeedMode { from_minima, from_seeds };
    Connectivity connectivity = Connectivity::full;
    bool produce_lines = false;
    SeedMode seed_mode = SeedMode::from_minima;
};

/// Label the regional minima: maximal connected plateaus with no strictly
/// lower neighbor. Labels 1..K in raster order of each plateau's first voxel.
inline LabelVolume regional_minima(const GradientField& field, Connectivity conn) {
    const VolumeMeta& m = field.meta;
    auto offsets = neighbor_offsets(m, conn);
    LabelVolume labels(m, 0);
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(m.voxel_count()), 0);
    std::vector<std::int64_t> plateau, stack;
    std::uint32_t next = 0;

    for (std::int64_t start = 0; start < m.voxel_count(); ++start) {
        if (visited[static_cast<std::size_t>(start)]) continue;
        const double level = field[start];
        bool is_minimum = true;
        plateau.clear();
        stack.push_back(start);
        visited[static_cast<std::size_t>(start)] = 1;
        while (!stack.empty()) {
            std::int64_t v = stack.back();
            stack.pop_back();
            plateau.push_back(v);
            VoxelIndex idx = unlinearize(v, m);
            for (const auto& o : offsets) {
                if (!offset_in_bounds(idx, o, m)) continue;
                std::int64_t n = v + o.dflat;
                if (field[n] < level) {
                    is_minimum = false;
                } else if (field[n] == level && !visited[static_cast<std::size_t>(n)]) {
                    visited[static_cast<std::size_t>(n)] = 1;
                    stack.push_back(n);
                }
            }
        }
        if (is_minimum) {
            ++next;
            for (std::int64_t v : plateau) labels[v] = next;
        }
    }
    return labels;
}

namespace detail {

struct FloodEntry {
    double value;
    std::uint64_t seq;
    std::int64_t voxel;
    std::uint32_t label;
};

struct FloodOrder {
    bool operator()(const FloodEntry& a, const FloodEntry& b) const {
        if (a.value != b.value) return a.value > b.value;  // min-heap on value
        return a.seq > b.seq;                              // FIFO among equals
    }
};

}  // namespace detail

/// Priority flood from the seed labels. Non-seed voxels are finalized in
/// order of (field value ascending, enqueue sequence FIFO) and adopt the
/// label of the neighbor that first enqueued them. With produce_lines, a
/// voxel whose finalized neighbors span two or more distinct labels at pop
/// time becomes 0 instead and stops the front.
///
/// Each voxel is enqueued at most once: later enqueues would carry a later
/// sequence number for the same value, so they can never win the pop.
inline LabelVolume flood(const GradientField& field, const LabelVolume& seeds,
                         const WatershedOptions& opts) {
    const VolumeMeta& m = field.meta;
    if (!m.same_grid(seeds.meta))
        throw std::invalid_argument("flood: seeds sit on a different grid than the field");

    LabelVolume labels = seeds;
    auto offsets = neighbor_offsets(m, opts.connectivity);
    std::vector<std::uint8_t> queued(static_cast<std::size_t>(m.voxel_count()), 0);
    std::priority_queue<detail::FloodEntry, std::vector<detail::FloodEntry>, detail::FloodOrder> pq;
    std::uint64_t seq = 0;

    bool any_seed = false;
    for (std::int64_t v = 0; v < m.voxel_count(); ++v) {
        if (seeds[v] == 0) continue;
        any_seed = true;
        queued[static_cast<std::size_t>(v)] = 1;  // seeds are final
        VoxelIndex idx = unlinearize(v, m);
        for (const auto& o : offsets) {
            if (!offset_in_bounds(idx, o, m)) continue;
            std::int64_t n = v + o.dflat;
            if (labels[n] == 0 && !queued[static_cast<std::size_t>(n)]) {
                queued[static_cast<std::size_t>(n)] = 1;
                pq.push({field[n], seq++, n, seeds[v]});
            }
        }
    }
    if (!any_seed) throw std::domain_error("flood: seed labeling is empty");

    while (!pq.empty()) {
        detail::FloodEntry e = pq.top();
        pq.pop();
        VoxelIndex idx = unlinearize(e.voxel, m);

        // A nonzero label means the neighbor is a seed or already finalized;
        // line voxels are finalized with 0 and never count as a label.
        std::uint32_t out_label = e.label;
        if (opts.produce_lines) {
            std::uint32_t first = 0;
            for (const auto& o : offsets) {
                if (!offset_in_bounds(idx, o, m)) continue;
                std::uint32_t nl = labels[e.voxel + o.dflat];
                if (nl == 0) continue;
                if (first == 0) first = nl;
                else if (nl != first) { out_label = 0; break; }
            }
        }
        labels[e.voxel] = out_label;
        if (out_label == 0) continue;  // watershed lines do not propagate

        for (const auto& o : offsets) {
            if (!offset_in_bounds(idx, o, m)) continue;
            std::int64_t n = e.voxel + o.dflat;
            if (labels[n] == 0 && !queued[static_cast<std::size_t>(n)]) {
                queued[static_cast<std::size_t>(n)] = 1;
                pq.push({field[n], seq++, n, out_label});
            }
        }
    }
    return labels;
}

/// Unseeded watershed: flood from the regional minima. The basin count
/// equals the number of minima.
inline LabelVolume morphological_watershed(const GradientField& field, const WatershedOptions& opts) {
    LabelVolume minima = regional_minima(field, opts.connectivity);
    return flood(field, minima, opts);
}

}  // namespace voxsurf

#endif  // VOXSURF_WATERSHED_HPP
