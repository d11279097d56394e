#include "ksb/weak.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace ksb {

namespace {

struct Bump {
    double v, d1, d2;
};

Bump bump(double x) {
    if (!(std::abs(x) < 1.0)) return {0.0, 0.0, 0.0};
    const double u = 1.0 - x * x;
    const double b = std::exp(-1.0 / u);
    return {b, -2.0 * x / (u * u) * b, (6.0 * x * x * x * x - 2.0) / (u * u * u * u) * b};
}

constexpr int kPanels = 64;

// 8-point Gauss-Legendre nodes and weights mapped to [0, 1].
struct Rule {
    std::array<double, 8> x{}, w{};
    Rule() {
        using G = boost::math::quadrature::gauss<double, 8>;
        const auto& a = G::abscissa();
        const auto& wt = G::weights();
        std::size_t k = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double xi = a[i];
            if (xi == 0.0) {
                x[k] = 0.5;
                w[k++] = 0.5 * wt[i];
                continue;
            }
            x[k] = 0.5 * (1.0 - xi);
            w[k++] = 0.5 * wt[i];
            x[k] = 0.5 * (1.0 + xi);
            w[k++] = 0.5 * wt[i];
        }
    }
};

const Rule& rule() {
    static const Rule r;
    return r;
}

// Splits [a, b] into panels no wider than h; calls f(node, weight).
template <class Fn>
void composite(double a, double b, double h, Fn&& f) {
    if (!(b > a)) return;
    const int m = std::max(1, int(std::ceil((b - a) / h)));
    const double d = (b - a) / m;
    const Rule& r = rule();
    for (int p = 0; p < m; ++p) {
        const double lo = a + p * d;
        for (std::size_t k = 0; k < r.x.size(); ++k) f(lo + d * r.x[k], d * r.w[k]);
    }
}

}  // namespace

FieldValue BumpField::eval(double s, double t) const {
    const double x = (s - center) / half_width;
    const Bump bs = bump(x);
    const Bump bt = bump(t / t_end);
    if (bs.v == 0.0 || bt.v == 0.0) return {};
    const double q = (2.0 * n - 2.0) / n;
    const double p = std::pow(s, q), p1 = q * p / s, p2 = q * (q - 1.0) * p / (s * s);
    const double w = half_width;
    FieldValue f;
    f.z = amplitude * bs.v * bt.v;
    f.zt = amplitude * bs.v * bt.d1 / t_end;
    f.zs = amplitude * bs.d1 / w * bt.v;
    const double zss = amplitude * bs.d2 / (w * w) * bt.v;
    f.pzss = p2 * f.z + 2.0 * p1 * f.zs + p * zss;
    return f;
}

std::vector<BumpField> library_fields(int n) {
    return {
        {0.2, 0.15, 0.02, 1.0, n},
        {0.6, 0.3, 0.02, 1.0, n},
        {1.8, 0.6, 0.015, 1.0, n},
    };
}

BumpField constant_state_field(int n) { return {1.75, 1.25, 0.02, 1.0, n}; }

WeakResidual weak_residual(const Trajectory& traj, const BumpField& zeta, const SignalProfile& profile) {
    const auto& snaps = traj.snapshots;
    if (snaps.size() < 2 || snaps.front().t != 0.0)
        throw std::invalid_argument("trajectory needs a snapshot at t = 0 and at least one more");
    if (!(zeta.half_width > 0.0) || !(zeta.t_end > 0.0)) throw std::invalid_argument("degenerate test field");
    if (!(zeta.s_lo() > 0.0) || zeta.s_hi() > traj.mesh.s_max)
        throw std::invalid_argument("test field support leaves the computed s-range");
    if (zeta.t_end > snaps.back().t) throw std::invalid_argument("test field support extends past the last snapshot");

    const auto& s_nodes = traj.mesh.nodes;
    const double hs = 2.0 * zeta.half_width / kPanels;
    const double ht = zeta.t_end / kPanels;
    const double nn = zeta.n;

    // Quadrature points in s with their cell index, fixed for all times.
    struct SPoint {
        double s, w;
        std::size_t cell;
        double theta, F, Fs;
    };
    std::vector<SPoint> sp;
    const auto first = std::upper_bound(s_nodes.begin(), s_nodes.end(), zeta.s_lo()) - s_nodes.begin();
    for (std::size_t i = std::size_t(first); i < s_nodes.size() && s_nodes[i - 1] < zeta.s_hi(); ++i) {
        const double a = std::max(s_nodes[i - 1], zeta.s_lo()), b = std::min(s_nodes[i], zeta.s_hi());
        composite(a, b, hs, [&](double s, double w) {
            sp.push_back({s, w, i - 1, (s - s_nodes[i - 1]) / (s_nodes[i] - s_nodes[i - 1]), profile.F(s),
                          profile.Fs(s)});
        });
    }
    const auto W_at = [&](const MassFunction& m, const SPoint& p) {
        return m.W[p.cell] + p.theta * (m.W[p.cell + 1] - m.W[p.cell]);
    };

    WeakResidual r;
    for (const auto& p : sp) r.initial_term -= p.w * zeta.eval(p.s, 0.0).z * W_at(snaps.front(), p);

    for (std::size_t k = 0; k + 1 < snaps.size() && snaps[k].t < zeta.t_end; ++k) {
        const double ta = snaps[k].t, tb = std::min(snaps[k + 1].t, zeta.t_end);
        const double span = snaps[k + 1].t - snaps[k].t;
        composite(ta, tb, ht, [&](double t, double wt) {
            const double th = (t - snaps[k].t) / span;
            for (const auto& p : sp) {
                const FieldValue f = zeta.eval(p.s, t);
                if (f.z == 0.0 && f.zs == 0.0 && f.zt == 0.0) continue;
                const double W = (1.0 - th) * W_at(snaps[k], p) + th * W_at(snaps[k + 1], p);
                const double w = wt * p.w;
                r.time_derivative_term -= w * f.zt * W;
                r.diffusion_term += w * nn * nn * f.pzss * W;
                r.burgers_term -= w * 0.5 * f.zs * W * W;
                r.signal_term -= w * nn * (p.Fs * f.z + p.F * f.zs) * W;
            }
        });
    }
    const double lhs = r.time_derivative_term + r.initial_term;
    const double rhs = r.diffusion_term + r.burgers_term + r.signal_term;
    r.value = std::abs(lhs - rhs);
    r.scale = std::abs(r.time_derivative_term) + std::abs(r.initial_term) + std::abs(r.diffusion_term) +
              std::abs(r.burgers_term) + std::abs(r.signal_term);
    return r;
}

}  // namespace ksb
