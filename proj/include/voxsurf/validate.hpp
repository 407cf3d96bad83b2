#ifndef VOXSURF_VALIDATE_HPP
#define VOXSURF_VALIDATE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaimage.hpp"
#include "volume.hpp"

namespace voxsurf {

/// Per-pair voxel accounting between a reference and an approximated cell.
/// reference_volume == overlap + error1 and approx_volume == overlap + error2
/// hold by construction. approx_label 0 marks an unmatched reference cell.
struct CellPairComparison {
    std::uint32_t reference_label = 0;
    std::uint32_t approx_label = 0;
    std::int64_t overlap_voxels = 0;   // shared volume
    std::int64_t error1_voxels = 0;    // reference-only volume
    std::int64_t error2_voxels = 0;    // approx-only volume
    std::int64_t reference_volume = 0;
    std::int64_t approx_volume = 0;
    double volume_deviation = 0.0;     // |approx - ref| / ref
    double error1_ratio = 0.0;         // error1 / overlap, 0 when overlap == 0
    double error2_ratio = 0.0;

    bool degenerate() const { return overlap_voxels == 0; }
    bool operator==(const CellPairComparison&) const = default;
};

struct ValidationReport {
    std::vector<CellPairComparison> pairs;  // volume_deviation ascending
    std::vector<std::uint32_t> excluded_border_labels;
    // Summary over non-degenerate pairs; all 0 when there are none.
    double median_deviation = 0.0;
    double max_deviation = 0.0;
    double fraction_lt_10pct = 0.0;

    bool operator==(const ValidationReport&) const = default;
};

/// Unweighted mean of the member voxel index vectors, in voxel units.
inline std::array<double, 3> center_of_mass(const LabelVolume& labels, std::uint32_t id) {
    if (id == 0) throw std::invalid_argument("center_of_mass: label 0 is not a region");
    std::array<double, 3> sum{0.0, 0.0, 0.0};
    std::int64_t n = 0;
    for (std::int64_t v = 0; v < labels.size(); ++v) {
        if (labels[v] != id) continue;
        VoxelIndex i = unlinearize(v, labels.meta);
        sum[0] += static_cast<double>(i.x);
        sum[1] += static_cast<double>(i.y);
        sum[2] += static_cast<double>(i.z);
        ++n;
    }
    if (n == 0) throw std::invalid_argument("center_of_mass: label not present");
    for (double& c : sum) c /= static_cast<double>(n);
    return sum;
}

struct MatchedPair {
    std::uint32_t reference_label = 0;
    std::uint32_t approx_label = 0;  // 0 = unmatched
};

struct MatchResult {
    std::vector<MatchedPair> pairs;                  // reference label ascending
    std::vector<std::uint32_t> excluded_border_labels;
};

/// Pair each interior reference label with the approx label found at its
/// center of mass (rounded to the nearest voxel). If that voxel is outside
/// the reference region or unlabeled in approx, fall back to the
/// reference-region voxel nearest to the center of mass that carries a
/// nonzero approx label (ties by raster order). Reference labels owning a
/// voxel on any volume face are excluded.
inline MatchResult match_pairs(const LabelVolume& reference, const LabelVolume& approx) {
    if (!reference.meta.same_grid(approx.meta))
        throw std::invalid_argument("match_pairs: labelings sit on different grids");
    const VolumeMeta& m = reference.meta;

    std::uint32_t max_label = 0;
    for (std::uint32_t v : reference.data) max_label = std::max(max_label, v);

    std::vector<std::vector<std::int64_t>> members(static_cast<std::size_t>(max_label) + 1);
    std::vector<std::uint8_t> touches_border(static_cast<std::size_t>(max_label) + 1, 0);
    for (std::int64_t v = 0; v < reference.size(); ++v) {
        std::uint32_t l = reference[v];
        if (l == 0) continue;
        members[l].push_back(v);
        VoxelIndex i = unlinearize(v, m);
        bool border = i.x == 0 || i.x == m.dims[0] - 1 || i.y == 0 || i.y == m.dims[1] - 1;
        if (m.ndims == 3) border = border || i.z == 0 || i.z == m.dims[2] - 1;
        if (border) touches_border[l] = 1;
    }

    MatchResult result;
    for (std::uint32_t l = 1; l <= max_label; ++l) {
        if (members[l].empty()) continue;
        if (touches_border[l]) {
            result.excluded_border_labels.push_back(l);
            continue;
        }
        std::array<double, 3> com{0.0, 0.0, 0.0};
        for (std::int64_t v : members[l]) {
            VoxelIndex i = unlinearize(v, m);
            com[0] += static_cast<double>(i.x);
            com[1] += static_cast<double>(i.y);
            com[2] += static_cast<double>(i.z);
        }
        for (double& c : com) c /= static_cast<double>(members[l].size());

        VoxelIndex vc{std::llround(com[0]), std::llround(com[1]), std::llround(com[2])};
        std::int64_t vflat = linear_index(vc, m);

        std::uint32_t partner = 0;
        if (reference[vflat] == l && approx[vflat] != 0) {
            partner = approx[vflat];
        } else {
            double best = std::numeric_limits<double>::infinity();
            for (std::int64_t v : members[l]) {  // raster order breaks ties
                if (approx[v] == 0) continue;
                VoxelIndex i = unlinearize(v, m);
                double dx = static_cast<double>(i.x) - com[0];
                double dy = static_cast<double>(i.y) - com[1];
                double dz = static_cast<double>(i.z) - com[2];
                double d2 = dx * dx + dy * dy + dz * dz;
                if (d2 < best) {
                    best = d2;
                    partner = approx[v];
                }
            }
        }
        result.pairs.push_back({l, partner});
    }
    return result;
}

/// Voxelwise counts for one matched pair. Watershed-line voxels (label 0)
/// count toward neither volume.
inline CellPairComparison compare_pair(const LabelVolume& reference, const LabelVolume& approx,
                                       const MatchedPair& pair) {
    CellPairComparison c;
    c.reference_label = pair.reference_label;
    c.approx_label = pair.approx_label;
    for (std::int64_t v = 0; v < reference.size(); ++v) {
        bool in_ref = reference[v] == pair.reference_label;
        bool in_ap = pair.approx_label != 0 && approx[v] == pair.approx_label;
        c.reference_volume += in_ref;
        c.approx_volume += in_ap;
        c.overlap_voxels += in_ref && in_ap;
    }
    c.error1_voxels = c.reference_volume - c.overlap_voxels;
    c.error2_voxels = c.approx_volume - c.overlap_voxels;
    c.volume_deviation = c.reference_volume > 0
                             ? std::abs(static_cast<double>(c.approx_volume - c.reference_volume)) /
                                   static_cast<double>(c.reference_volume)
                             : 0.0;
    if (c.overlap_voxels > 0) {
        c.error1_ratio = static_cast<double>(c.error1_voxels) / static_cast<double>(c.overlap_voxels);
        c.error2_ratio = static_cast<double>(c.error2_voxels) / static_cast<double>(c.overlap_voxels);
    }
    return c;
}

/// Match, compare, sort and summarize. Degenerate (zero-overlap) pairs keep
/// their rows but are excluded from the summary statistics.
inline ValidationReport validate_labelings(const LabelVolume& reference, const LabelVolume& approx) {
    MatchResult matches = match_pairs(reference, approx);
    ValidationReport report;
    report.excluded_border_labels = matches.excluded_border_labels;
    for (const MatchedPair& p : matches.pairs)
        report.pairs.push_back(compare_pair(reference, approx, p));
    std::stable_sort(report.pairs.begin(), report.pairs.end(),
                     [](const CellPairComparison& a, const CellPairComparison& b) {
                         if (a.volume_deviation != b.volume_deviation)
                             return a.volume_deviation < b.volume_deviation;
                         return a.reference_label < b.reference_label;
                     });

    std::vector<double> deviations;
    for (const auto& p : report.pairs)
        if (!p.degenerate()) deviations.push_back(p.volume_deviation);
    if (!deviations.empty()) {
        // already sorted ascending by the pair sort
        std::size_t n = deviations.size();
        report.median_deviation = n % 2 ? deviations[n / 2]
                                        : 0.5 * (deviations[n / 2 - 1] + deviations[n / 2]);
        report.max_deviation = deviations.back();
        std::int64_t lt = 0;
        for (double d : deviations) lt += d < 0.10;
        report.fraction_lt_10pct = static_cast<double>(lt) / static_cast<double>(n);
    }
    return report;
}

inline const char* kReportHeader =
    "reference_label,approx_label,ref_vol,approx_vol,overlap,error1,error2,"
    "volume_deviation,error1_ratio,error2_ratio";

/// CSV report: pinned header, one row per pair in sorted order, then the
/// summary as `# key=value` comment lines. Numbers round-trip exactly.
inline void write_report(const ValidationReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report: cannot open " + path.string());
    out << kReportHeader << "\n";
    for (const auto& p : report.pairs)
        out << p.reference_label << "," << p.approx_label << "," << p.reference_volume << ","
            << p.approx_volume << "," << p.overlap_voxels << "," << p.error1_voxels << ","
            << p.error2_voxels << "," << detail::format_double(p.volume_deviation) << ","
            << detail::format_double(p.error1_ratio) << ","
            << detail::format_double(p.error2_ratio) << "\n";
    out << "# median_deviation=" << detail::format_double(report.median_deviation) << "\n";
    out << "# max_deviation=" << detail::format_double(report.max_deviation) << "\n";
    out << "# fraction_lt_10pct=" << detail::format_double(report.fraction_lt_10pct) << "\n";
    out << "# excluded_border_labels=";
    for (std::size_t i = 0; i < report.excluded_border_labels.size(); ++i) {
        if (i) out << ";";
        out << report.excluded_border_labels[i];
    }
    out << "\n";
    if (!out) throw std::runtime_error("write_report: write failed for " + path.string());
}

/// Parse a CSV written by write_report back into a ValidationReport.
inline ValidationReport read_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_report: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader)
        throw std::runtime_error("read_report: bad header in " + path.string());
    ValidationReport report;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(2, eq - 2);
            std::string val = line.substr(eq + 1);
            if (key == "median_deviation") report.median_deviation = std::stod(val);
            else if (key == "max_deviation") report.max_deviation = std::stod(val);
            else if (key == "fraction_lt_10pct") report.fraction_lt_10pct = std::stod(val);
            else if (key == "excluded_border_labels") {
                std::istringstream ls(val);
                std::string tok;
                while (std::getline(ls, tok, ';'))
                    if (!tok.empty())
                        report.excluded_border_labels.push_back(
                            static_cast<std::uint32_t>(std::stoul(tok)));
            }
            continue;
        }
        std::istringstream ls(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ls, tok, ',')) cols.push_back(tok);
        if (cols.size() != 10) throw std::runtime_error("read_report: malformed row: " + line);
        CellPairComparison p;
        p.reference_label = static_cast<std::uint32_t>(std::stoul(cols[0]));
        p.approx_label = static_cast<std::uint32_t>(std::stoul(cols[1]));
        p.reference_volume = std::stoll(cols[2]);
        p.approx_volume = std::stoll(cols[3]);
        p.overlap_voxels = std::stoll(cols[4]);
        p.error1_voxels = std::stoll(cols[5]);
        p.error2_voxels = std::stoll(cols[6]);
        p.volume_deviation = std::stod(cols[7]);
        p.error1_ratio = std::stod(cols[8]);
        p.error2_ratio = std::stod(cols[9]);
        report.pairs.push_back(p);
    }
    return report;
}

}  // namespace voxsurf

#endif  // VOXSURF_VALIDATE_HPP
