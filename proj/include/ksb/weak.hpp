#pragma once

#include "ksb/signal.hpp"
#include "ksb/solver.hpp"

#include <vector>

namespace ksb {

/// zeta and the derivatives entering the weak identity at one point.
struct FieldValue {
    double z = 0.0;
    double zt = 0.0;
    double zs = 0.0;
    double pzss = 0.0;  ///< (s^((2n-2)/n) zeta)_ss
};

/// Tensor-product bump zeta(s, t) = A B((s - c)/w) g(t/T) with
/// B(x) = exp(-1/(1 - x^2)) on |x| < 1 and g the same profile restricted to
/// t >= 0, so zeta(., 0) = A e^-1 B and zeta vanishes for t >= T.
struct BumpField {
    double center = 1.0;
    double half_width = 0.5;
    double t_end = 0.02;
    double amplitude = 1.0;
    int n = 3;

    double s_lo() const noexcept { return center - half_width; }
    double s_hi() const noexcept { return center + half_width; }
    FieldValue eval(double s, double t) const;
};

/// Three fields in the transition region of the plateau scenario, all
/// supported in s >= 0.05 (where chi_eps = 1 for eps <= 0.025) and t < 0.02.
std::vector<BumpField> library_fields(int n);

/// A field supported in s in [0.5, 3], beyond the outer breakpoint of F for the
/// plateau scenario. Against the state W = mass cap every term cancels.
BumpField constant_state_field(int n);

struct WeakResidual {
    double value = 0.0;  ///< |LHS - RHS|
    double scale = 0.0;  ///< sum of the absolute values of the five integrals
    double time_derivative_term = 0.0;  ///< -int int zeta_t W
    double initial_term = 0.0;          ///< -int zeta(., 0) W0
    double diffusion_term = 0.0;        ///< n^2 int int (s^q zeta)_ss W
    double burgers_term = 0.0;          ///< -1/2 int int zeta_s W^2
    double signal_term = 0.0;           ///< -n int int (F zeta)_s W
};

/// Residual of the weak identity on the trajectory: W is linear between mesh
/// nodes and between snapshots, and every integral is composite 8-point
/// Gauss-Legendre on panels no wider than 1/64 of the field's support. The
/// first snapshot must be at t = 0 and serves as W0. Throws
/// std::invalid_argument when the support leaves (0, s_max] x [0, last snapshot].
WeakResidual weak_residual(const Trajectory& traj, const BumpField& zeta, const SignalProfile& profile);

}  // namespace ksb
