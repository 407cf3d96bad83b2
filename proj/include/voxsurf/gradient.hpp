#ifndef VOXSURF_GRADIENT_HPP
#define VOXSURF_GRADIENT_HPP

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaimage.hpp"
#include "threading.hpp"
#include "volume.hpp"

namespace voxsurf {

/// Balance between the interior and surface class, 0 <= beta <= 1.
/// Small beta favors the surface class.
struct GradientParams {
    double beta = 0.5;

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0))
            throw std::invalid_argument("GradientParams: beta must be in [0, 1]");
    }
};

/// Pointwise combination of one interior- and one surface-class distance:
///
///     g = beta*d_I / (beta*d_I + (1 - beta)*d_S)
///
/// Inputs are clamped to >= 0 first (signed fields are allowed). Where both
/// clamped distances are 0 the classes overlap and g is 0.5 by convention.
/// The endpoints collapse the formula: beta = 0 gives g = 0 and beta = 1
/// gives g = 1 everywhere except the overlap convention.
inline double combine_point(double d_interior, double d_surface, double beta) {
    double di = d_interior > 0.0 ? d_interior : 0.0;
    double ds = d_surface > 0.0 ? d_surface : 0.0;
    if (di == 0.0 && ds == 0.0) return 0.5;
    if (beta == 0.0) return 0.0;
    if (beta == 1.0) return 1.0;
    return beta * di / (beta * di + (1.0 - beta) * ds);
}

/// Apply combine_point over whole fields. Values land in [0, 1]; g is 0
/// exactly on interior foreground and 1 exactly on surface foreground.
inline GradientField combine(const DistanceField& d_interior, const DistanceField& d_surface,
                             const GradientParams& params) {
    params.validate();
    if (!d_interior.meta.same_grid(d_surface.meta))
        throw std::invalid_argument("combine: distance fields sit on different grids");
    GradientField g(d_interior.meta);
    const double beta = params.beta;
    parallel_chunks(g.size(), [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i)
            g[i] = combine_point(d_interior[i], d_surface[i], beta);
    });
    return g;
}

/// Write one normalized PGM slice of g per beta value; the filename embeds
/// beta. Returns the written paths.
inline std::vector<std::filesystem::path> beta_sweep(
    const DistanceField& d_interior, const DistanceField& d_surface,
    const std::vector<double>& betas, int axis, std::int64_t slice_index,
    const std::filesystem::path& out_dir) {
    for (double b : betas)
        if (!(b >= 0.0 && b <= 1.0))
            throw std::invalid_argument("beta_sweep: beta must be in [0, 1]");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    written.reserve(betas.size());
    for (double b : betas) {
        GradientField g = combine(d_interior, d_surface, GradientParams{b});
        char name[64];
        std::snprintf(name, sizeof(name), "g_beta_%g.pgm", b);
        std::filesystem::path p = out_dir / name;
        write_slice_pgm(g, axis, slice_index, /*normalize=*/true, p);
        written.push_back(p);
    }
    return written;
}

}  // namespace voxsurf

#endif  // VOXSURF_GRADIENT_HPP
