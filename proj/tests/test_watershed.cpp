#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "voxsurf/threading.hpp"
#include "voxsurf/watershed.hpp"

using namespace voxsurf;

namespace {

GradientField field_1d(std::initializer_list<double> values) {
    GradientField f(VolumeMeta::grid2d(static_cast<std::int64_t>(values.size()), 1));
    std::int64_t x = 0;
    for (double v : values) f.at(x++, 0) = v;
    return f;
}

/// Plateau-free random field: a random permutation of n distinct values.
GradientField random_distinct_field(const VolumeMeta& m, std::mt19937_64& gen) {
    GradientField f(m);
    std::vector<double> vals(static_cast<std::size_t>(m.voxel_count()));
    std::iota(vals.begin(), vals.end(), 0.0);
    std::shuffle(vals.begin(), vals.end(), gen);
    for (std::int64_t v = 0; v < f.size(); ++v)
        f[v] = vals[static_cast<std::size_t>(v)] / static_cast<double>(f.size());
    return f;
}

/// Smooth plateau-free random terrain (sum of random Gaussian bumps), the
/// kind of field the pipeline actually feeds the watershed.
GradientField random_smooth_field(const VolumeMeta& m, std::mt19937_64& gen) {
    auto canon = [&] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
    struct Bump {
        double cx, cy, cz, amp, inv2s2;
    };
    std::vector<Bump> bumps;
    for (int i = 0; i < 8; ++i) {
        double s = 3.0 + 3.0 * canon();
        bumps.push_back({canon() * static_cast<double>(m.dims[0]),
                         canon() * static_cast<double>(m.dims[1]),
                         canon() * static_cast<double>(m.dims[2]), canon() * 2.0 - 1.0,
                         1.0 / (2.0 * s * s)});
    }
    GradientField f(m);
    for (std::int64_t v = 0; v < f.size(); ++v) {
        VoxelIndex i = unlinearize(v, m);
        double acc = 0.0;
        for (const Bump& b : bumps) {
            double dx = static_cast<double>(i.x) - b.cx;
            double dy = static_cast<double>(i.y) - b.cy;
            double dz = static_cast<double>(i.z) - b.cz;
            acc += b.amp * std::exp(-(dx * dx + dy * dy + dz * dz) * b.inv2s2);
        }
        f[v] = acc;
    }
    return f;
}

bool plateau_free(const GradientField& f, Connectivity conn) {
    auto offsets = neighbor_offsets(f.meta, conn);
    for (std::int64_t v = 0; v < f.size(); ++v) {
        VoxelIndex idx = unlinearize(v, f.meta);
        for (const auto& o : offsets) {
            if (!offset_in_bounds(idx, o, f.meta)) continue;
            if (f[v + o.dflat] == f[v]) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("regional minima on 1D examples") {
    SECTION("two separated minima") {
        GradientField f = field_1d({0.0, 0.2, 0.5, 0.3, 0.1});
        LabelVolume mins = regional_minima(f, Connectivity::full);
        CHECK(mins.at(0, 0) == 1);
        CHECK(mins.at(1, 0) == 0);
        CHECK(mins.at(2, 0) == 0);
        CHECK(mins.at(3, 0) == 0);
        CHECK(mins.at(4, 0) == 2);
    }
    SECTION("constant field is a single plateau minimum") {
        GradientField f(VolumeMeta::grid3d(3, 3, 2), 0.25);
        LabelVolume mins = regional_minima(f, Connectivity::full);
        for (std::int64_t v = 0; v < mins.size(); ++v) CHECK(mins[v] == 1);
    }
    SECTION("monotone ramp has one minimum at the low end") {
        GradientField f = field_1d({0.0, 0.1, 0.2, 0.3, 0.4});
        LabelVolume mins = regional_minima(f, Connectivity::full);
        CHECK(mins.at(0, 0) == 1);
        for (int x = 1; x < 5; ++x) CHECK(mins.at(x, 0) == 0);
    }
}

TEST_CASE("flood matches the hand-simulated priority-FIFO result") {
    GradientField f = field_1d({0.0, 0.2, 0.5, 0.3, 0.1});
    LabelVolume seeds(f.meta, 0);
    seeds.at(0, 0) = 1;
    seeds.at(4, 0) = 2;

    SECTION("lines off") {
        WatershedOptions opts;
        opts.produce_lines = false;
        LabelVolume l = flood(f, seeds, opts);
        const std::uint32_t want[5] = {1, 1, 1, 2, 2};
        for (int x = 0; x < 5; ++x) CHECK(l.at(x, 0) == want[x]);
    }
    SECTION("lines on") {
        WatershedOptions opts;
        opts.produce_lines = true;
        LabelVolume l = flood(f, seeds, opts);
        const std::uint32_t want[5] = {1, 1, 0, 2, 2};
        for (int x = 0; x < 5; ++x) CHECK(l.at(x, 0) == want[x]);
    }
}

TEST_CASE("single seed floods the whole volume") {
    GradientField f(VolumeMeta::grid3d(4, 4, 4), 0.5);
    f.at(1, 1, 1) = 0.0;
    LabelVolume seeds(f.meta, 0);
    seeds.at(1, 1, 1) = 7;
    LabelVolume l = flood(f, seeds, {});
    for (std::int64_t v = 0; v < l.size(); ++v) CHECK(l[v] == 7);
}

TEST_CASE("flood rejects empty seeds and mismatched grids") {
    GradientField f(VolumeMeta::grid2d(4, 4));
    LabelVolume empty(f.meta, 0);
    CHECK_THROWS_AS(flood(f, empty, {}), std::domain_error);
    LabelVolume other(VolumeMeta::grid2d(5, 4), 1);
    CHECK_THROWS_AS(flood(f, other, {}), std::invalid_argument);
}

TEST_CASE("unseeded watershed splits a two-basin line") {
    GradientField f = field_1d({0.0, 0.2, 0.5, 0.3, 0.1});
    LabelVolume l = morphological_watershed(f, {});
    CHECK(l.at(0, 0) == l.at(1, 0));
    CHECK(l.at(3, 0) == l.at(4, 0));
    CHECK(l.at(0, 0) != l.at(4, 0));
    std::uint32_t k = 0;
    for (std::int64_t v = 0; v < l.size(); ++v) k = std::max(k, l[v]);
    CHECK(k == 2);
}

TEST_CASE("monotone ramp floods to a single label") {
    GradientField f = field_1d({0.0, 0.1, 0.2, 0.3});
    LabelVolume l = morphological_watershed(f, {});
    for (std::int64_t v = 0; v < l.size(); ++v) CHECK(l[v] == 1);
}

TEST_CASE("symmetric double well puts the line on the symmetry plateau") {
    GradientField f = field_1d({0.0, 0.4, 0.9, 0.4, 0.0});
    WatershedOptions opts;
    opts.produce_lines = true;
    LabelVolume l = morphological_watershed(f, opts);
    CHECK(l.at(0, 0) == 1);
    CHECK(l.at(1, 0) == 1);
    CHECK(l.at(2, 0) == 0);
    CHECK(l.at(3, 0) == 2);
    CHECK(l.at(4, 0) == 2);
}

TEST_CASE("seed labels are preserved verbatim") {
    std::mt19937_64 gen(3);
    GradientField f = random_distinct_field(VolumeMeta::grid3d(8, 8, 4), gen);
    LabelVolume seeds(f.meta, 0);
    seeds.at(1, 1, 1) = 42;
    seeds.at(6, 6, 2) = 9;
    LabelVolume l = flood(f, seeds, {});
    CHECK(l.at(1, 1, 1) == 42);
    CHECK(l.at(6, 6, 2) == 9);
    for (std::int64_t v = 0; v < l.size(); ++v) CHECK((l[v] == 42 || l[v] == 9));
}

TEST_CASE("lines off means no unlabeled voxels; lines on keeps labels connected") {
    std::mt19937_64 gen(4);
    for (int rep = 0; rep < 10; ++rep) {
        GradientField f = random_distinct_field(VolumeMeta::grid3d(10, 9, 4), gen);
        WatershedOptions opts;
        opts.produce_lines = false;
        LabelVolume full = morphological_watershed(f, opts);
        for (std::int64_t v = 0; v < full.size(); ++v) CHECK(full[v] >= 1);

        opts.produce_lines = true;
        LabelVolume lined = morphological_watershed(f, opts);
        // each label stays connected after removing line voxels
        std::uint32_t k = 0;
        for (std::uint32_t v : lined.data) k = std::max(k, v);
        auto offsets = neighbor_offsets(f.meta, opts.connectivity);
        for (std::uint32_t label = 1; label <= k; ++label) {
            std::int64_t first = -1;
            std::int64_t count = 0;
            for (std::int64_t v = 0; v < lined.size(); ++v)
                if (lined[v] == label) {
                    if (first < 0) first = v;
                    ++count;
                }
            if (count == 0) continue;
            std::vector<std::int64_t> stack{first};
            std::vector<std::uint8_t> seen(static_cast<std::size_t>(lined.size()), 0);
            seen[static_cast<std::size_t>(first)] = 1;
            std::int64_t reached = 0;
            while (!stack.empty()) {
                std::int64_t v = stack.back();
                stack.pop_back();
                ++reached;
                VoxelIndex idx = unlinearize(v, f.meta);
                for (const auto& o : offsets) {
                    if (!offset_in_bounds(idx, o, f.meta)) continue;
                    std::int64_t n = v + o.dflat;
                    if (lined[n] == label && !seen[static_cast<std::size_t>(n)]) {
                        seen[static_cast<std::size_t>(n)] = 1;
                        stack.push_back(n);
                    }
                }
            }
            CHECK(reached == count);
        }
    }
}

TEST_CASE("labeling is invariant under strictly increasing value transforms") {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 10; ++rep) {
        GradientField f = random_distinct_field(VolumeMeta::grid3d(9, 8, 3), gen);
        GradientField cubed(f.meta);
        for (std::int64_t v = 0; v < f.size(); ++v) cubed[v] = f[v] * f[v] * f[v];
        WatershedOptions opts;
        opts.produce_lines = rep % 2 == 0;
        CHECK(morphological_watershed(f, opts) == morphological_watershed(cubed, opts));
    }
}

TEST_CASE("flood agrees with the steepest-descent oracle off watershed lines") {
    // Voxels whose descent path crosses a watershed-line voxel count as on
    // the line: their oracle label is defined by a path that leaves the
    // basin, so discrete flooding cannot (and should not) reproduce it.
    std::mt19937_64 gen(6);
    auto offsets = neighbor_offsets(VolumeMeta::grid3d(16, 16, 8), Connectivity::full);
    std::int64_t mismatches = 0, checked = 0, excluded = 0;
    int fields = 0;
    while (fields < 25) {
        VolumeMeta m = VolumeMeta::grid3d(16, 16, 8);
        GradientField f = (fields % 5 == 4) ? random_distinct_field(m, gen)
                                            : random_smooth_field(m, gen);
        if (!plateau_free(f, Connectivity::full)) continue;
        ++fields;
        LabelVolume minima = regional_minima(f, Connectivity::full);
        WatershedOptions opts;
        opts.produce_lines = true;
        LabelVolume lined = flood(f, minima, opts);
        opts.produce_lines = false;
        LabelVolume full = flood(f, minima, opts);
        for (std::int64_t start = 0; start < f.size(); ++start) {
            bool crosses_line = false;
            std::int64_t cur = start;
            for (;;) {
                if (lined[cur] == 0) crosses_line = true;
                VoxelIndex idx = unlinearize(cur, m);
                std::int64_t best = cur;
                for (const auto& o : offsets) {
                    if (!offset_in_bounds(idx, o, m)) continue;
                    if (f[cur + o.dflat] < f[best]) best = cur + o.dflat;
                }
                if (best == cur) break;
                cur = best;
            }
            if (crosses_line) {
                ++excluded;
                continue;
            }
            ++checked;
            mismatches += full[start] != minima[cur];
        }
    }
    CHECK(mismatches == 0);
    CHECK(checked > excluded);  // the exclusion must not hollow out the check
}

TEST_CASE("watershed is deterministic across runs and thread counts") {
    std::mt19937_64 gen(11);
    GradientField f = random_distinct_field(VolumeMeta::grid3d(10, 10, 6), gen);
    WatershedOptions opts;
    opts.produce_lines = true;
    set_max_threads(1);
    LabelVolume a = morphological_watershed(f, opts);
    set_max_threads(0);
    LabelVolume b = morphological_watershed(f, opts);
    LabelVolume c = morphological_watershed(f, opts);
    CHECK(a == b);
    CHECK(b == c);
}
