#include "ksb/transform.hpp"

#include "ksb/io.hpp"
#include "ksb/params.hpp"
#include "ksb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ksb {

RadialDensity::RadialDensity(std::function<double(double)> u, double support_radius, std::string descriptor)
    : u_(std::move(u)), support_(support_radius), descriptor_(std::move(descriptor)) {
    if (!u_) throw std::invalid_argument("RadialDensity: empty evaluator");
    if (!(support_radius > 0.0) || !std::isfinite(support_radius))
        throw std::invalid_argument("RadialDensity: support radius must be positive and finite");
}

RadialDensity RadialDensity::plateau(double c0) {
    if (!(c0 > 0.0)) throw ParameterError(ParameterIssue{"c0", c0, "(0, inf)", "c0 must be positive"});
    std::ostringstream os;
    os << "plateau c0=" << c0 << " on unit ball";
    RadialDensity d([c0](double r) { return r <= 1.0 ? c0 : 0.0; }, 1.0, os.str());
    d.plateau_ = c0;
    return d;
}

RadialDensity RadialDensity::tabulated(std::vector<double> r, std::vector<double> u) {
    if (r.size() != u.size() || r.size() < 2) throw std::invalid_argument("tabulated density: need matching samples");
    if (!std::is_sorted(r.begin(), r.end()) || r.front() < 0.0)
        throw std::invalid_argument("tabulated density: radii must be sorted and nonnegative");
    if (std::any_of(u.begin(), u.end(), [](double v) { return !(v >= 0.0); }))
        throw std::invalid_argument("tabulated density: values must be nonnegative");
    const double support = r.back();
    auto eval = [r = std::move(r), u = std::move(u)](double x) {
        if (x <= r.front()) return u.front();
        if (x >= r.back()) return 0.0;
        const auto it = std::upper_bound(r.begin(), r.end(), x);
        const std::size_t k = std::size_t(it - r.begin()) - 1;
        const double t = (x - r[k]) / (r[k + 1] - r[k]);
        return (1.0 - t) * u[k] + t * u[k + 1];
    };
    return RadialDensity(std::move(eval), support, "tabulated");
}

double MassFunction::at(double x) const {
    if (s.empty()) throw std::logic_error("MassFunction::at on empty function");
    if (x <= s.front()) return W.front();
    if (x >= s.back()) return x == s.back() ? W.back() : far_field;
    const auto it = std::upper_bound(s.begin(), s.end(), x);
    const std::size_t k = std::size_t(it - s.begin()) - 1;
    const double t = (x - s[k]) / (s[k + 1] - s[k]);
    return (1.0 - t) * W[k] + t * W[k + 1];
}

double MassFunction::min_increment() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < W.size(); ++i) m = std::min(m, W[i + 1] - W[i]);
    return m;
}

double MassFunction::max_value() const { return W.empty() ? 0.0 : *std::max_element(W.begin(), W.end()); }

double total_mass(const RadialDensity& u0, int n) {
    auto integrand = [&](double r) { return u0(r) * std::pow(r, n - 1); };
    const double R = u0.support();
    // Split at the support radius so a jump there does not stall refinement.
    double inner = integrate(integrand, 0.0, R, 1e-12).value;
    return unit_sphere_area(n) * inner;
}

MassFunction w0_from_density(const RadialDensity& u0, int n, const Mesh& mesh) {
    MassFunction w;
    w.s = mesh.nodes;
    w.W.assign(w.s.size(), 0.0);
    w.t = 0.0;
    const double R = u0.support();
    auto integrand = [&](double r) { return u0(r) * std::pow(r, n - 1); };
    auto radius = [n](double s) { return std::pow(s, 1.0 / n); };

    double acc = 0.0;
    for (std::size_t i = 1; i < w.s.size(); ++i) {
        const double a = radius(w.s[i - 1]);
        const double b = radius(w.s[i]);
        double piece = 0.0;
        if (auto c0 = u0.plateau_level()) {
            // Exact for plateau data: n c0 (min(b,1)^n - min(a,1)^n).
            const double lo = std::min(w.s[i - 1], 1.0), hi = std::min(w.s[i], 1.0);
            piece = *c0 * (hi - lo) / n;
        } else if (a < R) {
            if (b <= R) {
                piece = integrate(integrand, a, b, 1e-12).value;
            } else {
                piece = integrate(integrand, a, R, 1e-12).value;
            }
        }
        acc += n * piece;
        w.W[i] = acc;
    }
    w.far_field = n * total_mass(u0, n) / unit_sphere_area(n);
    return w;
}

double extrapolate_origin(const MassFunction& w) {
    if (w.size() < 4) throw TransformError("extrapolate_origin: need at least three positive nodes");
    const double s1 = w.s[1], s2 = w.s[2], s3 = w.s[3];
    const double W1 = w.W[1], W2 = w.W[2], W3 = w.W[3];
    const double d12 = W2 - W1, d23 = W3 - W2;
    if (W1 <= 0.0) return 0.0;
    if (d12 <= 0.0) return W1;

    auto g = [&](double q) { return (std::pow(s3, q) - std::pow(s2, q)) / (std::pow(s2, q) - std::pow(s1, q)); };
    const double target = d23 / d12;
    constexpr double q_min = 1e-3;
    double q;
    if (target >= g(1.0)) {
        q = 1.0;
    } else if (target <= g(q_min)) {
        q = q_min;
    } else {
        double lo = q_min, hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) < target ? lo : hi) = mid;
        }
        q = 0.5 * (lo + hi);
    }
    const double m = d12 / (std::pow(s2, q) - std::pow(s1, q));
    const double j = W1 - m * std::pow(s1, q);
    return std::clamp(j, 0.0, W1);
}

Reconstruction reconstruct(const MassFunction& w, int n) {
    const std::size_t N = w.size();
    if (N < 4) throw TransformError("reconstruct: mass function too short");
    const double scale = std::max(std::abs(w.max_value()), 1e-300);
    for (std::size_t i = 0; i + 1 < N; ++i) {
        if (w.W[i + 1] - w.W[i] < -1e-14 * scale) {
            std::ostringstream os;
            os << "reconstruct: W decreases between s=" << w.s[i] << " and s=" << w.s[i + 1];
            throw TransformError(os.str());
        }
    }

    Reconstruction out;
    out.origin_limit = w.origin_limit ? *w.origin_limit : extrapolate_origin(w);
    const double area = unit_sphere_area(n);
    out.atom.mass = area / n * out.origin_limit;

    out.r.reserve(N - 2);
    out.u.reserve(N - 2);
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const double hl = w.s[i] - w.s[i - 1];
        const double hr = w.s[i + 1] - w.s[i];
        const double left = i == 1 ? out.origin_limit : w.W[i - 1];
        const double ws = (hl * hl * w.W[i + 1] - hr * hr * left + (hr * hr - hl * hl) * w.W[i]) / (hl * hr * (hl + hr));
        out.r.push_back(std::pow(w.s[i], 1.0 / n));
        out.u.push_back(ws);
    }
    // Piecewise-linear W beyond the jump: the increments telescope.
    out.density_mass = area / n * (w.W.back() - out.origin_limit);
    return out;
}

void write_csv(const MassFunction& w, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << "s,W\n";
    for (std::size_t i = 0; i < w.size(); ++i) os << format_double(w.s[i]) << ',' << format_double(w.W[i]) << '\n';
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

MassFunction read_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "s,W") throw std::runtime_error("missing header 's,W' in " + path.string());
    MassFunction w;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error("malformed row in " + path.string());
        w.s.push_back(std::stod(line.substr(0, comma)));
        w.W.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!w.W.empty()) w.far_field = w.W.back();
    return w;
}

}  // namespace ksb
