#include "ksb/weak.hpp"

#include <doctest.h>

#include <cmath>

using namespace ksb;

namespace {

struct Fixture {
    ValidatedParams vp = validate(SystemParams{});
    SignalProfile profile{vp};
    Mesh mesh = build_mesh(4.0, 256, 1.05);
};

const Fixture& fx() {
    static const Fixture f;
    return f;
}

Trajectory constant_run(const Fixture& f, double value, double t_end, int steps) {
    Trajectory tr;
    tr.mesh = f.mesh;
    for (int k = 0; k <= steps; ++k)
        tr.snapshots.push_back({f.mesh.nodes, std::vector<double>(f.mesh.nodes.size(), value), t_end * k / steps, value, std::nullopt});
    return tr;
}

}  // namespace

TEST_CASE("bump field derivatives match finite differences") {
    const BumpField z{0.6, 0.3, 0.02, 1.0, 3};
    for (double s : {0.35, 0.5, 0.61, 0.8}) {
        for (double t : {0.0, 0.004, 0.013}) {
            const FieldValue v = z.eval(s, t);
            const double hs = 1e-6, ht = 1e-8;
            const double zs = (z.eval(s + hs, t).z - z.eval(s - hs, t).z) / (2 * hs);
            const double zt = (z.eval(s, t + ht).z - z.eval(s, std::max(0.0, t - ht)).z) / (t > 0 ? 2 * ht : ht);
            CHECK(v.zs == doctest::Approx(zs).epsilon(1e-6).scale(1e-6));
            if (t > 0) CHECK(v.zt == doctest::Approx(zt).epsilon(1e-6).scale(1e-6));
            const auto q = [&](double x) { return std::pow(x, 4.0 / 3.0) * z.eval(x, t).z; };
            const double h = 1e-4;
            const double pzss = (q(s + h) - 2 * q(s) + q(s - h)) / (h * h);
            CHECK(v.pzss == doctest::Approx(pzss).epsilon(1e-5).scale(1e-4));
        }
    }
    CHECK(z.eval(0.2, 0.01).z == 0.0);
    CHECK(z.eval(0.6, 0.02).z == 0.0);
    CHECK(z.eval(0.6, 0.0).z == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("zero field gives zero residual") {
    const auto& f = fx();
    const Trajectory tr = constant_run(f, 0.5, 0.02, 20);
    const WeakResidual r = weak_residual(tr, {1.0, 0.5, 0.02, 0.0, 3}, f.profile);
    CHECK(r.value == 0.0);
    CHECK(r.scale == 0.0);
}

TEST_CASE("constant state field against W at the cap") {
    const auto& f = fx();
    const Trajectory tr = constant_run(f, f.vp.mass_cap, 0.02, 40);
    const WeakResidual r = weak_residual(tr, constant_state_field(3), f.profile);
    CHECK(r.scale > 0.0);
    CHECK(r.value <= 1e-8 * r.scale);
}

TEST_CASE("support checks") {
    const auto& f = fx();
    const Trajectory tr = constant_run(f, 1.0, 0.01, 10);
    CHECK_THROWS_AS(weak_residual(tr, {1.0, 0.5, 0.02, 1.0, 3}, f.profile), std::invalid_argument);
    CHECK_THROWS_AS(weak_residual(tr, {0.2, 0.3, 0.005, 1.0, 3}, f.profile), std::invalid_argument);
    CHECK_THROWS_AS(weak_residual(tr, {3.9, 0.5, 0.005, 1.0, 3}, f.profile), std::invalid_argument);
    Trajectory late = tr;
    late.snapshots.erase(late.snapshots.begin());
    CHECK_THROWS_AS(weak_residual(late, {1.0, 0.5, 0.005, 1.0, 3}, f.profile), std::invalid_argument);
}

TEST_CASE("library fields stay away from the origin cutoff") {
    for (const auto& z : library_fields(3)) {
        CHECK(z.s_lo() >= 0.05);
        CHECK(z.t_end <= 0.02);
    }
    const BumpField c = constant_state_field(3);
    CHECK(c.s_lo() >= 0.216);
    CHECK(c.s_lo() >= 0.5);
    CHECK(c.s_hi() <= 3.0);
}
