#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "voxsurf/edt.hpp"

using namespace voxsurf;

namespace {

/// Brute-force oracle: min over all foreground voxels of the squared
/// physical center-to-center distance. Independent of the envelope sweep.
Volume<double> oracle_squared(const BinaryMask& mask) {
    const VolumeMeta& m = mask.meta;
    std::vector<VoxelIndex> sites;
    for (std::int64_t v = 0; v < mask.size(); ++v)
        if (mask[v] != 0) sites.push_back(unlinearize(v, m));
    REQUIRE(!sites.empty());
    Volume<double> out(m);
    for (std::int64_t v = 0; v < mask.size(); ++v) {
        VoxelIndex i = unlinearize(v, m);
        double best = std::numeric_limits<double>::infinity();
        for (const VoxelIndex& s : sites) {
            double dx = static_cast<double>(i.x - s.x) * m.spacing[0];
            double dy = static_cast<double>(i.y - s.y) * m.spacing[1];
            double dz = static_cast<double>(i.z - s.z) * m.spacing[2];
            best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        out[v] = best;
    }
    return out;
}

BinaryMask random_mask(const VolumeMeta& m, std::mt19937_64& gen, double fg_prob) {
    BinaryMask mask(m, kBackground);
    std::int64_t fg = 0;
    for (std::int64_t v = 0; v < mask.size(); ++v) {
        if (static_cast<double>(gen() >> 11) * 0x1.0p-53 < fg_prob) {
            mask[v] = kForeground;
            ++fg;
        }
    }
    if (fg == 0) mask[static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(mask.size()))] = kForeground;
    return mask;
}

}  // namespace

TEST_CASE("1D distances forced by definition") {
    BinaryMask mask(VolumeMeta::grid2d(5, 1), kBackground);
    mask.at(2, 0) = kForeground;
    DistanceField d = distance_to_set(mask);
    const double want[5] = {2, 1, 0, 1, 2};
    for (int x = 0; x < 5; ++x) CHECK(d.at(x, 0) == want[x]);
}

TEST_CASE("diagonal distance in 2D") {
    BinaryMask mask(VolumeMeta::grid2d(3, 3), kBackground);
    mask.at(0, 0) = kForeground;
    DistanceField d = distance_to_set(mask);
    CHECK(d.at(2, 2) == Catch::Approx(std::sqrt(8.0)).epsilon(1e-14));
}

TEST_CASE("anisotropic spacing scales steps") {
    BinaryMask mask(VolumeMeta::grid2d(4, 1, 2.0, 1.0), kBackground);
    mask.at(0, 0) = kForeground;
    DistanceField d = distance_to_set(mask);
    CHECK(d.at(3, 0) == 6.0);
}

TEST_CASE("empty mask raises a domain error") {
    BinaryMask mask(VolumeMeta::grid2d(4, 4), kBackground);
    CHECK_THROWS_WITH(distance_to_set(mask), "class mask empty");
}

TEST_CASE("signed distance uses the inside-negative convention") {
    BinaryMask mask(VolumeMeta::grid2d(5, 1), kBackground);
    mask.at(2, 0) = kForeground;
    DistanceField d = signed_distance(mask);
    const double want[5] = {2, 1, -1, 1, 2};
    for (int x = 0; x < 5; ++x) CHECK(d.at(x, 0) == want[x]);
}

TEST_CASE("signed distance outside values equal unsigned distances") {
    BinaryMask mask(VolumeMeta::grid2d(6, 1), kBackground);
    mask.at(2, 0) = kForeground;
    mask.at(3, 0) = kForeground;
    DistanceField s = signed_distance(mask);
    DistanceField u = distance_to_set(mask);
    for (int x = 0; x < 6; ++x)
        if (mask.at(x, 0) == 0) CHECK(s.at(x, 0) == u.at(x, 0));
}

TEST_CASE("signed distance is antisymmetric under complementation") {
    std::mt19937_64 gen(41);
    for (int rep = 0; rep < 20; ++rep) {
        BinaryMask mask = random_mask(VolumeMeta::grid3d(9, 7, 3), gen, 0.3);
        if (count_foreground(mask) == mask.size()) mask[0] = kBackground;
        DistanceField a = signed_distance(mask);
        DistanceField b = signed_distance(complement(mask));
        for (std::int64_t v = 0; v < a.size(); ++v) CHECK(a[v] == -b[v]);
    }
}

TEST_CASE("signed distance rejects degenerate masks") {
    BinaryMask all(VolumeMeta::grid2d(3, 3), kForeground);
    CHECK_THROWS_AS(signed_distance(all), std::domain_error);
    BinaryMask none(VolumeMeta::grid2d(3, 3), kBackground);
    CHECK_THROWS_AS(signed_distance(none), std::domain_error);
}

TEST_CASE("squared distances match the brute-force oracle exactly (unit spacing)") {
    std::mt19937_64 gen(7);
    for (int rep = 0; rep < 30; ++rep) {
        VolumeMeta m = VolumeMeta::grid3d(1 + static_cast<std::int64_t>(gen() % 12), 1 + static_cast<std::int64_t>(gen() % 12),
                     1 + static_cast<std::int64_t>(gen() % 8));
        BinaryMask mask = random_mask(m, gen, 0.08);
        Volume<double> got = distance_squared_to_set(mask);
        Volume<double> want = oracle_squared(mask);
        for (std::int64_t v = 0; v < got.size(); ++v) {
            REQUIRE(got[v] == static_cast<double>(static_cast<std::int64_t>(got[v])));
            REQUIRE(got[v] == want[v]);
        }
    }
}

TEST_CASE("squared distances match the oracle under anisotropic spacing") {
    std::mt19937_64 gen(8);
    for (int rep = 0; rep < 20; ++rep) {
        VolumeMeta m = VolumeMeta::grid3d(1 + static_cast<std::int64_t>(gen() % 10), 1 + static_cast<std::int64_t>(gen() % 10),
                     1 + static_cast<std::int64_t>(gen() % 6), 0.3, 1.7, 2.5);
        BinaryMask mask = random_mask(m, gen, 0.1);
        Volume<double> got = distance_squared_to_set(mask);
        Volume<double> want = oracle_squared(mask);
        for (std::int64_t v = 0; v < got.size(); ++v) {
            if (want[v] == 0.0) REQUIRE(got[v] == 0.0);
            else REQUIRE(std::abs(got[v] - want[v]) <= 1e-12 * want[v]);
        }
    }
}

TEST_CASE("zero set equals the foreground set exactly") {
    std::mt19937_64 gen(9);
    BinaryMask mask = random_mask(VolumeMeta::grid3d(14, 11, 5), gen, 0.2);
    DistanceField d = distance_to_set(mask);
    for (std::int64_t v = 0; v < d.size(); ++v) CHECK((d[v] == 0.0) == (mask[v] != 0));
}

TEST_CASE("translation equivariance away from borders") {
    std::mt19937_64 gen(10);
    VolumeMeta m = VolumeMeta::grid2d(16, 16, 1.0, 1.0);
    BinaryMask mask(m, kBackground);
    // small blob near the center so a (2,1) shift stays in range
    for (int i = 0; i < 6; ++i)
        mask.at(5 + static_cast<std::int64_t>(gen() % 4), 5 + static_cast<std::int64_t>(gen() % 4)) = kForeground;
    BinaryMask shifted(m, kBackground);
    for (std::int64_t y = 0; y < 16; ++y)
        for (std::int64_t x = 0; x < 16; ++x)
            if (mask.at(x, y)) shifted.at(x + 2, y + 1) = kForeground;

    Volume<double> a = distance_squared_to_set(mask);
    Volume<double> b = distance_squared_to_set(shifted);
    // compare on the interior window where both neighborhoods are far from edges
    for (std::int64_t y = 4; y < 12; ++y)
        for (std::int64_t x = 4; x < 12; ++x) CHECK(a.at(x, y) == b.at(x + 2, y + 1));
}
