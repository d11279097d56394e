#pragma once

#include "ksb/mesh.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ksb {

/// Radially symmetric nonnegative cell density u(r).
class RadialDensity {
public:
    RadialDensity(std::function<double(double)> u, double support_radius, std::string descriptor);

    /// u = c0 on the closed unit ball, 0 outside.
    static RadialDensity plateau(double c0);
    /// Piecewise-linear interpolation of samples (r_j, u_j); zero beyond the last radius.
    static RadialDensity tabulated(std::vector<double> r, std::vector<double> u);

    double operator()(double r) const { return u_(r); }
    double support() const noexcept { return support_; }
    const std::string& descriptor() const noexcept { return descriptor_; }
    /// Plateau level when the density was built by plateau(), else empty.
    std::optional<double> plateau_level() const noexcept { return plateau_; }

private:
    std::function<double(double)> u_;
    double support_;
    std::string descriptor_;
    std::optional<double> plateau_;
};

/// Samples of the accumulated mass W(., t) on a mesh.
struct MassFunction {
    std::vector<double> s;
    std::vector<double> W;
    double t = 0.0;
    double far_field = 0.0;  ///< n mu / |S_{n-1}|
    std::optional<double> origin_limit;

    std::size_t size() const noexcept { return s.size(); }
    /// Linear interpolation in s; constant far_field beyond the last node.
    double at(double x) const;
    /// Smallest forward difference W_{i+1} - W_i.
    double min_increment() const;
    double max_value() const;
};

struct DiracAtom {
    double mass = 0.0;
};

struct Reconstruction {
    std::vector<double> r;  ///< radii s_i^(1/n) of the interior nodes
    std::vector<double> u;  ///< W_s(r^n) by centered differences
    DiracAtom atom;
    double origin_limit = 0.0;  ///< extrapolated W(0+)
    double density_mass = 0.0;  ///< |S_{n-1}| * int u r^(n-1) dr, atom excluded
};

class TransformError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// mu = |S_{n-1}| int_0^inf u(r) r^(n-1) dr.
double total_mass(const RadialDensity& u0, int n);

/// W_0(s_i) = n int_0^{s_i^(1/n)} u0(r) r^(n-1) dr, accumulated cell by cell.
MassFunction w0_from_density(const RadialDensity& u0, int n, const Mesh& mesh);

/// W(0+) from the model W(s) ~ j + m s^q (q in (0, 1]) fitted through the
/// three smallest positive nodes; j is clamped to [0, W(s_1)].
double extrapolate_origin(const MassFunction& w);

/// Back-transform u(x) = W_s(|x|^n) + |S_{n-1}|/n W(0+) delta(x).
/// Throws TransformError if w decreases anywhere.
Reconstruction reconstruct(const MassFunction& w, int n);

void write_csv(const MassFunction& w, const std::filesystem::path& path);
MassFunction read_csv(const std::filesystem::path& path);

}  // namespace ksb
