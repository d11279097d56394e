#include "ksb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ksb {

namespace {

double first_fraction(std::size_t N, double ratio) {
    const double lr = std::log(ratio);
    return std::expm1(lr) / std::expm1(lr * double(N));
}

std::size_t suggest_N(double ratio, double target) {
    if (!(ratio > 1.0) || !(target > 0.0)) return 0;
    // ratio^N >= 1 + (ratio - 1)/target
    const double N = std::ceil(std::log1p((ratio - 1.0) / target) / std::log(ratio));
    return std::max<std::size_t>(64, std::size_t(N));
}

}  // namespace

Mesh build_mesh(double s_max, std::size_t N, double ratio, double max_first_fraction) {
    std::ostringstream why;
    if (!(s_max > 0.0) || !std::isfinite(s_max)) why << "s_max must be positive and finite; ";
    if (!(ratio > 1.0 && ratio <= 1.2)) why << "ratio must lie in (1, 1.2]; ";
    if (N < 64) why << "N must be at least 64; ";
    if (!why.str().empty()) throw MeshError("infeasible grading: " + why.str(), suggest_N(std::min(std::max(ratio, 1.0 + 1e-9), 1.2), max_first_fraction));

    const double frac = first_fraction(N, ratio);
    if (!(frac <= max_first_fraction)) {
        const std::size_t hint = suggest_N(ratio, max_first_fraction);
        std::ostringstream os;
        os << "infeasible grading: s_1/s_max = " << frac << " exceeds " << max_first_fraction
           << " for N=" << N << ", ratio=" << ratio << "; try N >= " << hint;
        throw MeshError(os.str(), hint);
    }

    Mesh m;
    m.s_max = s_max;
    m.ratio = ratio;
    m.nodes.resize(N + 1);
    const double lr = std::log(ratio);
    const double denom = std::expm1(lr * double(N));
    if (!std::isfinite(denom)) throw MeshError("infeasible grading: ratio^N overflows", suggest_N(ratio, max_first_fraction));
    for (std::size_t i = 0; i <= N; ++i) m.nodes[i] = s_max * (std::expm1(lr * double(i)) / denom);
    m.nodes.front() = 0.0;
    m.nodes.back() = s_max;
    return m;
}

Mesh refine(const Mesh& mesh) {
    const double ratio = std::sqrt(mesh.ratio);
    Mesh fine = build_mesh(mesh.s_max, 2 * mesh.N(), ratio, 1.0);
    // Reuse the coarse nodes bit-for-bit so probes at coarse nodes coincide.
    for (std::size_t i = 0; i <= mesh.N(); ++i) fine.nodes[2 * i] = mesh.nodes[i];
    return fine;
}

}  // namespace ksb
