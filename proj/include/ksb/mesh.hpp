#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ksb {

class MeshError : public std::invalid_argument {
public:
    MeshError(const std::string& what, std::size_t suggested_N)
        : std::invalid_argument(what), suggested_N_(suggested_N) {}
    std::size_t suggested_N() const noexcept { return suggested_N_; }

private:
    std::size_t suggested_N_;
};

/// Geometrically graded nodes 0 = s_0 < ... < s_N = s_max, with spacings
/// growing by `ratio` away from the origin.
struct Mesh {
    std::vector<double> nodes;
    double s_max = 0.0;
    double ratio = 1.0;

    std::size_t N() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
    std::span<const double> s() const noexcept { return nodes; }
    double first_spacing() const { return nodes.at(1); }
};

/// Default limit on s_1 relative to s_max.
inline constexpr double kMaxFirstSpacing = 1e-6;

/// Builds s_i = s_max (ratio^i - 1)/(ratio^N - 1). Requires N >= 64,
/// ratio in (1, 1.2] and s_1 <= max_first_fraction * s_max; otherwise throws
/// MeshError carrying the smallest N that meets the grading target.
Mesh build_mesh(double s_max, std::size_t N, double ratio, double max_first_fraction = kMaxFirstSpacing);

/// Nested refinement: 2N intervals with ratio sqrt(ratio), so every old
/// node is kept and each cell is split at its geometric midpoint.
Mesh refine(const Mesh& mesh);

}  // namespace ksb
