#include "sigma2lab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sigma2lab/errors.hpp"
#include "sigma2lab/ode.hpp"
#include "sigma2lab/version.hpp"

namespace sigma2lab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double phase_quadratic(double rho, double x) {
    return (0.25 * rho * x + (2.0 + rho) / 3.0) * x + 1.0;
}

RootAnalysis analyze_roots(double rho) {
    RootAnalysis ra;
    ra.rho = rho;
    ra.discriminant = rho * rho - 5.0 * rho + 4.0;
    if (rho == 0.0) {
        ra.x1 = -1.5;
        ra.x2 = kNaN;
        ra.has_real_roots = true;
        return ra;
    }
    if (ra.discriminant < 0.0) {
        ra.x1 = kNaN;
        ra.x2 = kNaN;
        ra.has_real_roots = false;
        return ra;
    }
    const double a = 0.25 * rho;
    const double b = (2.0 + rho) / 3.0;  // > 0 for rho >= 0
    const double sq = std::sqrt(ra.discriminant) / 3.0;
    // b > 0: the subtraction-free root first, the other via the product.
    ra.x2 = (-b - sq) / (2.0 * a);
    ra.x1 = 1.0 / (a * ra.x2);
    ra.has_real_roots = true;
    return ra;
}

double asymptotic_slope(double rho) {
    if (rho < 0.0) throw Error("asymptotic_slope: rho < 0 out of scope");
    if (rho >= 2.0)
        throw NonexistenceError("no entire solution for rho >= 2 (admissible slope interval empty)");
    if (rho == 0.0) return -1.5;
    const RootAnalysis ra = analyze_roots(rho);
    if (!ra.has_real_roots)
        throw DomainError(
            "no asymptotic slope for rho in (1,2): the phase quadratic has complex roots and the "
            "radial trajectory reaches the cone boundary at finite radius");
    return ra.x1;
}

double admissible_epsilon_max(double rho) {
    if (rho < 0.0) throw Error("admissible_epsilon_max: rho < 0 out of scope");
    if (rho >= 2.0) throw NonexistenceError("no entire solution for rho >= 2");
    if (rho == 0.0) return 1.5;
    const RootAnalysis ra = analyze_roots(rho);
    return ra.has_real_roots ? -ra.x1 : 2.0 / rho;
}

double RadialProfile::u_at(double at_s) const {
    if (at_s < s.front() - 1e-12 || at_s > s.back() + 1e-12)
        throw DomainError("u_at: s outside the profile range");
    const auto it = std::upper_bound(s.begin(), s.end(), at_s);
    std::size_t i = (it == s.begin()) ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    if (i >= s.size() - 1) i = s.size() - 2;
    const double h = s[i + 1] - s[i];
    const double t = (at_s - s[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * u[i] + h * h10 * u_s[i] + h01 * u[i + 1] + h * h11 * u_s[i + 1];
}

double RadialProfile::u_s_at(double at_s) const {
    if (at_s < s.front() - 1e-12 || at_s > s.back() + 1e-12)
        throw DomainError("u_s_at: s outside the profile range");
    const auto it = std::upper_bound(s.begin(), s.end(), at_s);
    std::size_t i = (it == s.begin()) ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
    if (i >= s.size() - 1) i = s.size() - 2;
    const double h = s[i + 1] - s[i];
    const double t = (at_s - s[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * u_s[i] + h * h10 * u_ss[i] + h01 * u_s[i + 1] + h * h11 * u_ss[i + 1];
}

double RadialProfile::s_of_u(double t) const {
    if (t > u.front() + 1e-13 || t < u.back() - 1e-13)
        throw DomainError("s_of_u: level outside the profile range");
    // u is strictly decreasing in s.
    auto it = std::lower_bound(u.begin(), u.end(), t, std::greater<double>());
    std::size_t i = (it == u.begin()) ? 0 : static_cast<std::size_t>(it - u.begin()) - 1;
    if (i >= s.size() - 1) i = s.size() - 2;
    double lo = s[i], hi = s[i + 1];
    double x = 0.5 * (lo + hi);
    for (int k = 0; k < 100; ++k) {
        const double f = u_at(x) - t;
        if (f > 0.0)
            lo = x;
        else
            hi = x;
        const double d = u_s_at(x);
        double xn = (d < 0.0) ? x - f / d : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-15 * (1.0 + std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

namespace {

struct PhaseGeometry {
    double rho;
    RootAnalysis roots;
    bool factored;  // real-root evaluation available

    // g and g/(u_s - x1), in root-factored form when possible.
    double g(double us) const {
        if (!factored) return phase_quadratic(rho, us);
        if (rho == 0.0) return (2.0 / 3.0) * (us - roots.x1);
        return 0.25 * rho * (us - roots.x1) * (us - roots.x2);
    }
    // Evaluated from m = u_s - x1 directly: near a double root, us - x2
    // would cancel and lose all relative precision.
    double g_over_m(double m, double /*us*/) const {
        if (rho == 0.0) return 2.0 / 3.0;
        return 0.25 * rho * ((roots.x1 - roots.x2) + m);
    }
};

// u = (1/4) ln(4 u_s^2 g(u_s)) - s, with ln g supplied separately so the
// near-root regime keeps full relative precision.
double recover_u(double us, double ln_g, double s) {
    return 0.25 * (std::log(4.0 * us * us) + ln_g) - s;
}

double ode_u_ss(double rho, const FSpec& f, double s, double uval, double us) {
    const double denom = 3.0 * us * (1.0 + 0.5 * rho * us);
    return f.p_at(uval) * std::exp(4.0 * (uval + s)) / denom;
}

}  // namespace

RadialProfile solve_radial(double rho, double epsilon, const RadialOptions& opt) {
    if (rho < 0.0) throw Error("solve_radial: rho < 0 out of scope");
    if (rho >= 2.0)
        throw NonexistenceError("no entire solution for rho >= 2 (admissible slope interval empty)");
    const double eps_max = admissible_epsilon_max(rho);
    if (!(epsilon > 0.0) || !(epsilon < eps_max))
        throw GaugeError("solve_radial: epsilon outside the admissible interval (0, " +
                         std::to_string(eps_max) + ")");
    if (!(opt.s_min < 0.0 && opt.s_max > 0.0))
        throw Error("solve_radial: s range must contain the gauge point 0");

    PhaseGeometry geo{rho, analyze_roots(rho), false};
    geo.factored = geo.roots.has_real_roots;

    RadialProfile prof;
    prof.rho = rho;
    prof.epsilon = epsilon;
    prof.tolerance = opt.tolerance;
    prof.f = FSpec::standard();
    prof.alpha = geo.roots.has_real_roots ? (rho == 0.0 ? -1.5 : geo.roots.x1) : kNaN;

    const int n_back = static_cast<int>(std::llround(-opt.s_min / opt.ds_out));
    const int n_fwd = static_cast<int>(std::llround(opt.s_max / opt.ds_out));
    std::vector<double> gs(n_back + n_fwd + 1), gu(gs.size()), gus(gs.size()), guss(gs.size());
    for (std::size_t i = 0; i < gs.size(); ++i)
        gs[i] = (static_cast<int>(i) - n_back) * opt.ds_out;

    const double rtol = 0.1 * opt.tolerance, atol = 0.01 * opt.tolerance;
    double consistency = 0.0;

    auto emit = [&](std::size_t i, double s, double us, double ln_g, double u_quad) {
        const double uval = recover_u(us, ln_g, s);
        gu[i] = uval;
        gus[i] = us;
        guss[i] = ode_u_ss(rho, prof.f, s, uval, us);
        consistency = std::max(consistency, std::abs(u_quad - uval));
    };

    // Gauge node.
    {
        const double ln_g0 = std::log(geo.g(-epsilon));
        emit(n_back, 0.0, -epsilon, ln_g0, recover_u(-epsilon, ln_g0, 0.0));
    }
    const double u0_alg = gu[n_back];

    // Backward sweep in w = ln(-u_s): relative tracking of u_s -> 0.
    {
        Rk45<2> rk(
            [&](double, const std::array<double, 2>& y) -> std::array<double, 2> {
                const double us = -std::exp(y[0]);
                const double dw = 2.0 * geo.g(us) / (1.0 + 0.5 * rho * us);
                return {dw, us};
            },
            rtol, atol);
        double s = 0.0;
        std::array<double, 2> y{std::log(epsilon), u0_alg};
        for (int i = n_back - 1; i >= 0; --i) {
            rk.advance(s, y, gs[i]);
            const double us = -std::exp(y[0]);
            emit(i, s, us, std::log(geo.g(us)), y[1]);
        }
    }

    // Forward sweep. With real roots, track eta = ln(u_s - x1) so the decay
    // onto the fixed point keeps relative precision; in the complex-root
    // band rho in (1,2) integrate w and stop at the cone boundary.
    bool truncated = false;
    double s_stop = opt.s_max;
    if (geo.factored) {
        Rk45<2> rk(
            [&](double, const std::array<double, 2>& y) -> std::array<double, 2> {
                const double m = std::exp(y[0]);
                const double us = geo.roots.x1 + m;
                const double denom =
                    rho == 0.0 ? 1.0 : (1.0 + 0.5 * rho * geo.roots.x1) + 0.5 * rho * m;
                const double deta = 2.0 * us * geo.g_over_m(m, us) / denom;
                return {deta, us};
            },
            rtol, atol);
        double s = 0.0;
        std::array<double, 2> y{std::log(-geo.roots.x1 - epsilon), u0_alg};
        for (int i = n_back + 1; i < static_cast<int>(gs.size()); ++i) {
            rk.advance(s, y, gs[i]);
            const double m = std::exp(y[0]);
            const double us = geo.roots.x1 + m;
            const double ln_g = y[0] + std::log(geo.g_over_m(m, us));
            emit(i, s, us, ln_g, y[1]);
        }
    } else {
        const double cone_us = -2.0 / rho;
        const double w_stop = std::log((2.0 / rho) * (1.0 - opt.stop_margin));
        Rk45<2> rk(
            [&](double, const std::array<double, 2>& y) -> std::array<double, 2> {
                const double us = -std::exp(y[0]);
                const double denom = 1.0 + 0.5 * rho * us;
                return {2.0 * geo.g(us) / denom, us};
            },
            rtol, atol);
        rk.set_reject([&](double, const std::array<double, 2>& y) { return y[0] >= w_stop; });
        double s = 0.0;
        std::array<double, 2> y{std::log(epsilon), u0_alg};
        std::size_t emitted = n_back;
        for (int i = n_back + 1; i < static_cast<int>(gs.size()); ++i) {
            if (!rk.advance(s, y, gs[i])) {
                truncated = true;
                s_stop = s;
                // Keep the boundary point itself if it extends the grid.
                if (s > gs[emitted] + 1e-9) {
                    gs[emitted + 1] = s;
                    const double us = -std::exp(y[0]);
                    emit(emitted + 1, s, us, std::log(geo.g(us)), y[1]);
                    ++emitted;
                }
                break;
            }
            const double us = -std::exp(y[0]);
            emit(i, s, us, std::log(geo.g(us)), y[1]);
            emitted = i;
        }
        if (truncated) {
            gs.resize(emitted + 1);
            gu.resize(emitted + 1);
            gus.resize(emitted + 1);
            guss.resize(emitted + 1);
        }
        (void)cone_us;
    }

    prof.truncated = truncated;
    prof.s = std::move(gs);
    prof.u = std::move(gu);
    prof.u_s = std::move(gus);
    prof.u_ss = std::move(guss);
    prof.consistency = consistency;
    (void)s_stop;

    for (std::size_t i = 0; i + 1 < prof.u_s.size(); ++i)
        if (!(prof.u_s[i + 1] < prof.u_s[i]))
            throw ConeViolationError("solve_radial: u_s failed to decrease strictly");
    return prof;
}

RadialProfile solve_radial_general(double rho, double epsilon, const FSpec& f,
                                   const RadialOptions& opt) {
    if (rho < 0.0) throw Error("solve_radial_general: rho < 0 out of scope");
    if (rho >= 2.0)
        throw NonexistenceError("no entire solution for rho >= 2 (admissible slope interval empty)");
    if (f.p.empty()) throw UnsupportedFError("solve_radial_general: empty p");
    if (rho > 0.0 && !(epsilon > 0.0 && epsilon < 2.0 / rho))
        throw GaugeError("solve_radial_general: epsilon outside (0, 2/rho)");
    if (!(epsilon > 0.0)) throw GaugeError("solve_radial_general: epsilon must be positive");

    const double s_seed = std::min(opt.s_min, -10.0);

    // State (u, w) with w = ln(-u_s): relative tracking of the slope keeps
    // the seed region and the gauge matching well conditioned.
    auto rhs = [&](double s, const std::array<double, 2>& y) -> std::array<double, 2> {
        const double uval = y[0], w = y[1];
        const double us = -std::exp(w);
        const double dw = f.p_at(uval) * std::exp(4.0 * (uval + s)) /
                          (3.0 * std::exp(2.0 * w) * (1.0 + 0.5 * rho * us));
        return {us, dw};
    };
    // For constant p the trajectory provably stays inside the cone when the
    // phase quadratic has a real root (the fixed point sits at or before the
    // boundary, so a stop margin would truncate the rho = 1 approach);
    // otherwise it hits -2/rho at finite s and must be stopped.
    const bool needs_stop =
        rho > 0.0 && (!f.is_constant() || !analyze_roots(rho).has_real_roots);
    const double w_stop = needs_stop ? std::log((2.0 / rho) * (1.0 - opt.stop_margin))
                                     : std::numeric_limits<double>::infinity();
    auto reject = [&](double, const std::array<double, 2>& y) { return y[1] >= w_stop; };

    const double rtol = 0.1 * opt.tolerance, atol = 0.01 * opt.tolerance;

    // Shoot on the centre value u0; u_s(0) is decreasing in u0.
    auto seed_state = [&](double u0) -> std::array<double, 2> {
        const double c = std::sqrt(f.p_at(u0) / 6.0);
        const double tau = std::exp(2.0 * (u0 + s_seed));
        return {u0 - 0.5 * c * tau, std::log(c * tau)};
    };
    auto shoot = [&](double u0, double rtol_shoot) -> double {
        if (f.p_at(u0) <= 0.0) throw GaugeError("solve_radial_general: p(u0) <= 0 at the seed");
        Rk45<2> rk(rhs, rtol_shoot, rtol_shoot * 0.1);
        rk.set_reject(reject);
        double s = s_seed;
        std::array<double, 2> y = seed_state(u0);
        if (!rk.advance(s, y, 0.0)) return -std::numeric_limits<double>::infinity();
        return -std::exp(y[1]) + epsilon;  // want u_s(0) = -epsilon
    };

    double lo = -1.0, hi = 1.0;
    double flo = shoot(lo, 1e-8), fhi = shoot(hi, 1e-8);
    int guard = 0;
    while (flo < 0.0 && guard++ < 60) {
        lo -= 1.0;
        flo = shoot(lo, 1e-8);
    }
    guard = 0;
    while (fhi > 0.0 && guard++ < 60) {
        hi += 1.0;
        fhi = shoot(hi, 1e-8);
    }
    if (!(flo >= 0.0 && fhi <= 0.0))
        throw GaugeError("solve_radial_general: cannot bracket the gauge value");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = shoot(mid, rtol);
        if (fm > 0.0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15 * (1.0 + std::abs(lo))) break;
    }
    const double u0 = 0.5 * (lo + hi);

    // Final integration with output nodes.
    RadialProfile prof;
    prof.rho = rho;
    prof.epsilon = epsilon;
    prof.tolerance = opt.tolerance;
    prof.f = f;
    prof.alpha = kNaN;
    if (f.is_constant()) {
        const RootAnalysis ra = analyze_roots(rho);
        prof.alpha = rho == 0.0 ? -1.5 : (ra.has_real_roots ? ra.x1 : kNaN);
    }

    auto run = [&](double rt, double at, std::vector<double>& out_s, std::vector<double>& out_u,
                   std::vector<double>& out_us, bool& truncated) {
        out_s.clear();
        out_u.clear();
        out_us.clear();
        truncated = false;
        Rk45<2> rk(rhs, rt, at);
        rk.set_reject(reject);
        double s = s_seed;
        std::array<double, 2> y = seed_state(u0);
        const int n_lo = static_cast<int>(std::llround((0.0 - opt.s_min) / opt.ds_out));
        const int n_hi = static_cast<int>(std::llround((opt.s_max - 0.0) / opt.ds_out));
        for (int i = -n_lo; i <= n_hi; ++i) {
            const double target = i * opt.ds_out;
            if (target < s_seed) continue;
            if (!rk.advance(s, y, target)) {
                truncated = true;
                if (s > (out_s.empty() ? s_seed : out_s.back()) + 1e-9) {
                    out_s.push_back(s);
                    out_u.push_back(y[0]);
                    out_us.push_back(-std::exp(y[1]));
                }
                break;
            }
            out_s.push_back(target);
            out_u.push_back(y[0]);
            out_us.push_back(-std::exp(y[1]));
        }
    };

    bool trunc_a = false, trunc_b = false;
    run(rtol, atol, prof.s, prof.u, prof.u_s, trunc_a);
    std::vector<double> s_b, u_b, us_b;
    run(rtol * 0.02, atol * 0.02, s_b, u_b, us_b, trunc_b);
    double defect = 0.0;
    const std::size_t ncmp = std::min(prof.s.size(), s_b.size());
    for (std::size_t i = 0; i + 1 < ncmp; ++i)
        defect = std::max({defect, std::abs(prof.u[i] - u_b[i]), std::abs(prof.u_s[i] - us_b[i])});
    prof.consistency = defect;
    prof.truncated = trunc_a;

    prof.u_ss.resize(prof.s.size());
    for (std::size_t i = 0; i < prof.s.size(); ++i)
        prof.u_ss[i] = ode_u_ss(rho, f, prof.s[i], prof.u[i], prof.u_s[i]);

    for (double uv : prof.u)
        if (f.p_at(uv) <= 0.0)
            throw GaugeError("solve_radial_general: p(u) <= 0 on the traversed range");
    // Decrease enforced up to the certified integration error: in the far
    // tail u_s settles onto its limit and per-node decrements drop below the
    // error control, where the direct route wobbles at the defect scale.
    const double slack = std::max(10.0 * opt.tolerance, 10.0 * prof.consistency);
    for (std::size_t i = 0; i + 1 < prof.u_s.size(); ++i)
        if (!(prof.u_s[i + 1] < prof.u_s[i] + slack))
            throw ConeViolationError("solve_radial_general: u_s failed to decrease");
    return prof;
}

double first_integral_residual(const RadialProfile& p) {
    if (!p.f.is_constant())
        throw UnsupportedFError("first_integral_residual: requires constant p");
    const double scale = p.f.p[0] / 6.0;  // 1/4 for p == 3/2
    double worst = 0.0;
    for (std::size_t i = 0; i < p.s.size(); ++i) {
        const double us = p.u_s[i];
        const double r =
            us * us * phase_quadratic(p.rho, us) - scale * std::exp(4.0 * (p.u[i] + p.s[i]));
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double concavity_check(const RadialProfile& p) {
    std::vector<double> widths;
    for (std::size_t i = 0; i + 1 < p.s.size(); ++i) widths.push_back(p.s[i + 1] - p.s[i]);
    std::nth_element(widths.begin(), widths.begin() + widths.size() / 2, widths.end());
    const double h_med = widths[widths.size() / 2];

    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < p.s.size(); ++i) {
        const double hl = p.s[i] - p.s[i - 1], hr = p.s[i + 1] - p.s[i];
        // A degenerate sliver next to a truncation node only amplifies
        // rounding in the second difference; skip it.
        if (std::min(hl, hr) < 0.05 * h_med) continue;
        const double d2 =
            2.0 * (hl * p.u[i + 1] - (hl + hr) * p.u[i] + hr * p.u[i - 1]) / (hl * hr * (hl + hr));
        worst = std::max(worst, d2);
    }
    return worst;
}

void write_profile_csv(const RadialProfile& p, const std::string& path,
                       const std::string& config_echo) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("write_profile_csv: cannot open " + path);
    std::fputs("s,u,u_s\n", fp);
    for (std::size_t i = 0; i < p.s.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g\n", p.s[i], p.u[i], p.u_s[i]);
    std::fclose(fp);

    nlohmann::json j;
    j["rho"] = p.rho;
    j["epsilon"] = p.epsilon;
    if (std::isfinite(p.alpha))
        j["alpha"] = p.alpha;
    else
        j["alpha"] = nullptr;
    j["tolerance"] = p.tolerance;
    j["f_spec"] = {{"p", p.f.p}, {"beta", 4}};
    j["truncated"] = p.truncated;
    j["first_integral_residual"] =
        p.f.is_constant() ? nlohmann::json(first_integral_residual(p)) : nlohmann::json(nullptr);
    j["consistency"] = p.consistency;
    j["library_version"] = kVersion;
    if (!config_echo.empty()) j["config"] = config_echo;
    std::ofstream side(path + ".json");
    side << j.dump(2) << "\n";
}

RadialProfile read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_profile_csv: cannot open " + path);
    RadialProfile p;
    std::string line;
    if (!std::getline(in, line) || line.rfind("s,u,u_s", 0) != 0)
        throw Error("read_profile_csv: bad header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double a, b, c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw Error("read_profile_csv: bad row: " + line);
        p.s.push_back(a);
        p.u.push_back(b);
        p.u_s.push_back(c);
    }
    if (p.s.size() < 4) throw Error("read_profile_csv: too few rows");

    std::ifstream side(path + ".json");
    if (!side) throw Error("read_profile_csv: missing sidecar " + path + ".json");
    nlohmann::json j;
    side >> j;
    p.rho = j.at("rho").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.alpha = j.at("alpha").is_null() ? kNaN : j.at("alpha").get<double>();
    p.tolerance = j.at("tolerance").get<double>();
    p.truncated = j.value("truncated", false);
    p.f.p = j.at("f_spec").at("p").get<std::vector<double>>();
    p.consistency = j.value("consistency", 0.0);

    p.u_ss.resize(p.s.size());
    for (std::size_t i = 0; i < p.s.size(); ++i)
        p.u_ss[i] = ode_u_ss(p.rho, p.f, p.s[i], p.u[i], p.u_s[i]);
    return p;
}

Jet2 RadialField::jet(const Vec4& x) const {
    Jet2 j;
    const double r = norm(x);
    const double r_floor = std::exp(p_.s_min() + 0.5);
    if (r < r_floor) {
        const double u0 = p_.u_max();
        const double c = -std::sqrt(p_.f.f_at(u0) / 6.0);  // u''(0) from the centre balance
        j.value = u0 + 0.5 * c * dot(x, x);
        j.gradient = c * x;
        j.hessian = SymMat4::identity() * c;
        return j;
    }
    const double s = std::log(r);
    if (s > p_.s_max()) throw DomainError("RadialField: point beyond the profile range");
    const double uval = p_.u_at(s);
    const double us = p_.u_s_at(s);
    const double uss = ode_u_ss(p_.rho, p_.f, s, uval, us);
    const double du = us / r;                 // u'(r)
    const double d2u = (uss - us) / (r * r);  // u''(r)
    j.value = uval;
    j.gradient = (du / r) * x;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b)
            j.hessian.set(a, b,
                          (d2u - du / r) * x[a] * x[b] / (r * r) + (a == b ? du / r : 0.0));
    return j;
}

}  // namespace sigma2lab
