#include "sigma2lab/mass.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "sigma2lab/atensor.hpp"
#include "sigma2lab/errors.hpp"
#include "sigma2lab/quadrature.hpp"
#include "sigma2lab/version.hpp"

namespace sigma2lab {

double radial_ball_integral(const RadialProfile& p, double s_upper,
                            const std::function<double(double, double)>& integrand_of_su) {
    Kahan acc;
    const double s_lo = p.s_min();
    acc.add(integrand_of_su(s_lo, p.u_max()) * std::exp(4.0 * s_lo) / 4.0);  // centre tail
    auto f = [&](double s) {
        return integrand_of_su(s, p.u_at(s)) * std::exp(4.0 * s);
    };
    for (std::size_t i = 0; i + 1 < p.s.size() && p.s[i] < s_upper; ++i) {
        const double a = p.s[i];
        const double b = std::min(p.s[i + 1], s_upper);
        if (b <= a) continue;
        acc.add(gauss3(f, a, b));
    }
    return acc.value();
}

namespace {

double three_point_derivative(const std::vector<double>& x, const std::vector<double>& y,
                              std::size_t i) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    if (i == 0) return (y[1] - y[0]) / (x[1] - x[0]);
    if (i == n - 1) return (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    const double hl = x[i] - x[i - 1], hr = x[i + 1] - x[i];
    return (hl * hl * y[i + 1] + (hr * hr - hl * hl) * y[i] - hr * hr * y[i - 1]) /
           (hl * hr * (hl + hr));
}

}  // namespace

Npqv npqv_radial(const RadialProfile& p, const FSpec& f, double t) {
    Npqv q;
    const double s_t = p.s_of_u(t);
    const double us = p.u_s_at(s_t);
    q.Q = us;
    q.N = 1.5 * us * us + 0.5 * p.rho * us * us * us;
    q.V = std::exp(4.0 * s_t) / 4.0;
    q.P = radial_ball_integral(p, s_t, [&](double, double u) { return f.F_diff(t, u); });
    return q;
}

Npqv npqv_radial(const RadialProfile& p, double t) { return npqv_radial(p, p.f, t); }

MassPoint mass_radial(const RadialProfile& p, const FSpec& f, double t) {
    const Npqv q = npqv_radial(p, f, t);
    MassPoint m;
    const double q4 = q.Q * q.Q * q.Q * q.Q;
    m.M = 2.0 * q.N * q.Q + 0.125 * p.rho * q4 - 12.0 * q.P;
    // Boundary-only form on a sphere: Q, <x, grad u> and |grad u| all reduce
    // to u_s at s(t), so both brackets vanish identically for radial data.
    const double us = p.u_s_at(p.s_of_u(t));
    const double us4 = us * us * us * us;
    m.M_alt = (9.0 * p.rho / 8.0) * (q4 - us4) + 3.0 * us * us * (q.Q - us);
    return m;
}

MassPoint mass_radial(const RadialProfile& p, double t) { return mass_radial(p, p.f, t); }

MassScan mass_scan_radial(const RadialProfile& p, const FSpec& declared_f,
                          const std::vector<double>& t_grid) {
    MassScan scan;
    scan.source = "radial";
    scan.rho = p.rho;
    scan.f = declared_f;
    scan.t = t_grid;
    std::sort(scan.t.begin(), scan.t.end(), std::greater<double>());
    for (double t : scan.t) {
        const Npqv q = npqv_radial(p, declared_f, t);
        const MassPoint m = mass_radial(p, declared_f, t);
        scan.N.push_back(q.N);
        scan.P.push_back(q.P);
        scan.Q.push_back(q.Q);
        scan.V.push_back(q.V);
        scan.M.push_back(m.M);
        scan.M_alt.push_back(m.M_alt);
        if (!(q.Q < 0.0)) throw ConeViolationError("mass_scan_radial: Q must be negative");
    }
    scan.dM.resize(scan.t.size());
    for (std::size_t i = 0; i < scan.t.size(); ++i)
        scan.dM[i] = three_point_derivative(scan.t, scan.M, i);
    return scan;
}

namespace {

// Per-cell cache sorted by u descending, with running compensated prefixes.
struct GridCache {
    std::vector<double> u, s2, dv, g, band, h3, hx, g4x, Fu;
    std::vector<double> ps2, pdv, pg, ph3, phx, pg4x, pFu;
    std::vector<double> pvol;  // prefix of 1 per cell (plain count as double)
    double cell_vol = 0.0;
    double band_max = 0.0;
    std::int64_t excluded = 0;
    std::int64_t total = 0;

    struct Sums {
        double vol = 0, s2 = 0, dv = 0, g = 0, h3 = 0, hx = 0, g4x = 0, Fu = 0;
    };

    static std::vector<double> prefix(const std::vector<double>& v) {
        std::vector<double> out(v.size());
        Kahan acc;
        for (std::size_t i = 0; i < v.size(); ++i) {
            acc.add(v[i]);
            out[i] = acc.value();
        }
        return out;
    }

    void finalize() {
        ps2 = prefix(s2);
        pdv = prefix(dv);
        pg = prefix(g);
        ph3 = prefix(h3);
        phx = prefix(hx);
        pg4x = prefix(g4x);
        pFu = prefix(Fu);
        pvol.resize(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) pvol[i] = static_cast<double>(i + 1);
    }

    // Smoothed indicator weight of a cell at level t.
    double weight(std::size_t i, double t) const {
        const double d = u[i] - t;
        if (band[i] <= 0.0) return d > 0.0 ? 1.0 : 0.0;
        return std::clamp(0.5 + 0.5 * d / band[i], 0.0, 1.0);
    }

    Sums sums_at(double t) const {
        Sums s;
        // Cells with u >= t + band_max carry weight 1 regardless of their own
        // band; the remaining window is evaluated cell by cell.
        const auto ge_begin = std::lower_bound(u.begin(), u.end(), t + band_max,
                                               std::greater<double>());
        const std::size_t n_full = static_cast<std::size_t>(ge_begin - u.begin());
        if (n_full > 0) {
            const std::size_t k = n_full - 1;
            s.vol = pvol[k];
            s.s2 = ps2[k];
            s.dv = pdv[k];
            s.g = pg[k];
            s.h3 = ph3[k];
            s.hx = phx[k];
            s.g4x = pg4x[k];
            s.Fu = pFu[k];
        }
        const auto lt_end = std::lower_bound(u.begin(), u.end(), t - band_max,
                                             std::greater<double>());
        const std::size_t n_win = static_cast<std::size_t>(lt_end - u.begin());
        Kahan avol, as2, adv, ag, ah3, ahx, ag4x, aFu;
        for (std::size_t i = n_full; i < n_win; ++i) {
            const double w = weight(i, t);
            if (w == 0.0) continue;
            avol.add(w);
            as2.add(w * s2[i]);
            adv.add(w * dv[i]);
            ag.add(w * g[i]);
            ah3.add(w * h3[i]);
            ahx.add(w * hx[i]);
            ag4x.add(w * g4x[i]);
            aFu.add(w * Fu[i]);
        }
        s.vol += avol.value();
        s.s2 += as2.value();
        s.dv += adv.value();
        s.g += ag.value();
        s.h3 += ah3.value();
        s.hx += ahx.value();
        s.g4x += ag4x.value();
        s.Fu += aFu.value();
        return s;
    }

    std::size_t count_above(double t) const {
        return static_cast<std::size_t>(
            std::lower_bound(u.begin(), u.end(), t, std::greater<double>()) - u.begin());
    }
};

GridCache build_cache(const ScalarField4& field, double rho, const FSpec& f, double t_deepest,
                      const CoareaBinning& bin) {
    const double eps_g = field.critical_grad_threshold();
    GridCache cache;
    cache.cell_vol = field.spacing(0) * field.spacing(1) * field.spacing(2) * field.spacing(3);

    std::int64_t violations = 0;
    std::vector<Index4> offenders;

    Index4 idx{};
    const int m = bin.margin;
    for (idx[0] = m; idx[0] < field.extent(0) - m; ++idx[0])
        for (idx[1] = m; idx[1] < field.extent(1) - m; ++idx[1])
            for (idx[2] = m; idx[2] < field.extent(2) - m; ++idx[2])
                for (idx[3] = m; idx[3] < field.extent(3) - m; ++idx[3]) {
                    const Jet2 jet = field.jet_at(idx);
                    const double uc = jet.value;
                    const SymMat4 A = assemble_A(jet, rho);
                    const double s2v = sigma_k(A, 2);
                    const double gn = norm(jet.gradient);
                    double bandw = 0.0;
                    for (int a = 0; a < 4; ++a)
                        bandw += 0.5 * field.spacing(a) * std::abs(jet.gradient[a]);

                    // Verify the cone and the super-solution inequality on
                    // the scanned region only.
                    if (uc > t_deepest - bandw) {
                        const ConeStatus st = cone_status(A);
                        const bool super_ok = s2v >= f.f_at(uc) * (1.0 - bin.supersolution_slack_rel);
                        if (!(st.in_gamma2_plus || st.on_boundary) || !super_ok) {
                            ++violations;
                            if (offenders.size() < 8) offenders.push_back(idx);
                        }
                    }

                    ++cache.total;
                    cache.u.push_back(uc);
                    cache.s2.push_back(s2v);
                    cache.dv.push_back(-div_norm2_grad(jet));
                    cache.band.push_back(bandw);
                    cache.Fu.push_back(f.F_at(uc));
                    if (gn < eps_g) {
                        ++cache.excluded;
                        cache.g.push_back(0.0);
                        cache.h3.push_back(0.0);
                        cache.hx.push_back(0.0);
                        cache.g4x.push_back(0.0);
                        continue;
                    }
                    const Vec4 x = field.point(idx);
                    const double xdot = dot(x, jet.gradient);
                    const FrameDecomp fd = frame_decompose(jet, rho, 0.5 * eps_g);
                    const double H = fd.mean_curvature;
                    cache.g.push_back(gn);
                    cache.h3.push_back(H * gn * gn * gn);
                    cache.hx.push_back(H * gn * gn * gn * xdot);
                    cache.g4x.push_back(gn * gn * gn * gn * xdot);
                }

    const double frac = cache.total > 0 ? double(violations) / double(cache.total) : 0.0;
    if (frac > bin.max_violation_fraction) {
        std::ostringstream os;
        os << "mass_scan_grid: cone / super-solution violation on " << violations << " of "
           << cache.total << " cells; first offenders:";
        for (const auto& o : offenders)
            os << " (" << o[0] << "," << o[1] << "," << o[2] << "," << o[3] << ")";
        throw DomainError(os.str());
    }

    // Sort by u descending (ties by original order for determinism).
    std::vector<std::size_t> perm(cache.u.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return cache.u[a] > cache.u[b]; });
    auto apply = [&](std::vector<double>& v) {
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < perm.size(); ++i) out[i] = v[perm[i]];
        v = std::move(out);
    };
    apply(cache.u);
    apply(cache.s2);
    apply(cache.dv);
    apply(cache.g);
    apply(cache.band);
    apply(cache.h3);
    apply(cache.hx);
    apply(cache.g4x);
    apply(cache.Fu);
    cache.band_max = cache.band.empty() ? 0.0 : *std::max_element(cache.band.begin(), cache.band.end());
    cache.finalize();
    return cache;
}

}  // namespace

MassScan mass_scan_grid(const ScalarField4& field, double rho, const FSpec& f,
                        const std::vector<double>& t_grid, const CoareaBinning& bin) {
    if (t_grid.empty()) throw Error("mass_scan_grid: empty t grid");
    MassScan scan;
    scan.source = "grid";
    scan.rho = rho;
    scan.f = f;
    scan.t = t_grid;
    std::sort(scan.t.begin(), scan.t.end(), std::greater<double>());
    const double t_deepest = scan.t.back();

    // Omega_t must stay clear of the stencil margin ring.
    {
        const int m = bin.margin;
        double ring_max = -std::numeric_limits<double>::infinity();
        Index4 idx{};
        for (idx[0] = m; idx[0] < field.extent(0) - m; ++idx[0])
            for (idx[1] = m; idx[1] < field.extent(1) - m; ++idx[1])
                for (idx[2] = m; idx[2] < field.extent(2) - m; ++idx[2])
                    for (idx[3] = m; idx[3] < field.extent(3) - m; ++idx[3]) {
                        bool on_ring = false;
                        for (int a = 0; a < 4; ++a)
                            if (idx[a] == m || idx[a] == field.extent(a) - 1 - m) on_ring = true;
                        if (on_ring) ring_max = std::max(ring_max, field.at(idx));
                    }
        if (ring_max >= t_deepest)
            throw DomainError("mass_scan_grid: a scanned level set touches the grid boundary");
    }

    GridCache cache = build_cache(field, rho, f, t_deepest, bin);
    scan.cells_total = cache.total;
    scan.cells_excluded = cache.excluded;
    scan.excluded_fraction = cache.total ? double(cache.excluded) / double(cache.total) : 0.0;

    double h_mean = 0.0;
    for (int a = 0; a < 4; ++a) h_mean += field.spacing(a) / 4.0;
    double g_med = 0.0;
    {
        std::vector<double> gs(cache.g.begin(), cache.g.end());
        std::nth_element(gs.begin(), gs.begin() + gs.size() / 2, gs.end());
        g_med = gs[gs.size() / 2];
    }
    const double delta0 = bin.delta_t > 0.0 ? bin.delta_t : bin.kappa_h * h_mean * std::max(g_med, 1e-30);

    const double hv = cache.cell_vol;
    auto mass_at = [&](double t, double delta) -> std::array<double, 8> {
        const GridCache::Sums s = cache.sums_at(t);
        const double N = s.s2 * hv / kS3Area;
        const double V = s.vol * hv / kS3Area;
        const double P = (f.F_at(t) * s.vol - s.Fu) * hv / kS3Area;
        const double q3 = s.dv * hv / kS3Area;
        if (!(q3 > 0.0))
            throw DomainError("mass_scan_grid: int div(-|grad u|^2 grad u) must be positive");
        const double Q = -std::cbrt(q3);
        const double M = 2.0 * N * Q + 0.125 * rho * Q * Q * Q * Q - 12.0 * P;
        // Surface integrals by centred differencing of the cumulative sums.
        const GridCache::Sums lo = cache.sums_at(t - delta);
        const GridCache::Sums hi = cache.sums_at(t + delta);
        const double S1 = (lo.h3 - hi.h3) / (2.0 * delta) * hv;
        const double S2 = (lo.hx - hi.hx) / (2.0 * delta) * hv;
        const double S3 = (lo.g4x - hi.g4x) / (2.0 * delta) * hv;
        const double q4 = Q * Q * Q * Q;
        const double M_alt = (9.0 * rho / 8.0) * (q4 + S3 / kS3Area) + (Q * S1 - S2) / kS3Area;
        return {N, P, Q, V, M, M_alt, S1, S3};
    };

    for (double t : scan.t) {
        // Grow the differencing width until both strips hold enough cells.
        double delta = delta0;
        for (int it = 0; it < 60; ++it) {
            const std::size_t in_hi = cache.count_above(t) - cache.count_above(t + delta);
            const std::size_t in_lo = cache.count_above(t - delta) - cache.count_above(t);
            if (in_hi >= static_cast<std::size_t>(bin.min_cells_per_bin) &&
                in_lo >= static_cast<std::size_t>(bin.min_cells_per_bin))
                break;
            delta *= 1.5;
        }
        const auto v = mass_at(t, delta);
        const auto v2 = mass_at(t, 2.0 * delta);
        const auto vp = mass_at(t + delta, delta);
        const auto vm = mass_at(t - delta, delta);
        scan.N.push_back(v[0]);
        scan.P.push_back(v[1]);
        scan.Q.push_back(v[2]);
        scan.V.push_back(v[3]);
        scan.M.push_back(v[4]);
        scan.M_alt.push_back(v[5]);
        scan.delta_t.push_back(delta);
        // Error estimate: second-difference jitter of M in t plus the
        // differencing-width sensitivity of the boundary form.
        const double jitter = std::abs(vp[4] - 2.0 * v[4] + vm[4]);
        const double width_sens = std::abs(v2[5] - v[5]);
        scan.error_estimate.push_back(jitter + width_sens);
    }
    scan.dM.resize(scan.t.size());
    for (std::size_t i = 0; i < scan.t.size(); ++i)
        scan.dM[i] = three_point_derivative(scan.t, scan.M, i);
    return scan;
}

double dirichlet_boundary_mass(const RadialProfile& p, double R, double rho) {
    const double s = std::log(R);
    if (s < p.s_min() || s > p.s_max())
        throw DomainError("dirichlet_boundary_mass: R outside the profile range");
    const double gn = std::abs(p.u_s_at(s)) / R;
    const double A2 = gn * gn * R * R * R;
    const double A3 = gn * gn * gn * R * R * R;
    const double A4 = gn * gn * gn * gn * R * R * R;
    const double Q = -std::cbrt(A3);
    const double q4 = Q * Q * Q * Q;
    return (9.0 * rho / 8.0) * (q4 - R * A4) + 3.0 * Q * (A2 / R - Q * Q);
}

double dirichlet_boundary_mass_synthetic(const std::vector<std::pair<double, double>>& data,
                                         double rho) {
    double A2 = 0, A3 = 0, A4 = 0, wsum = 0;
    for (const auto& [gval, w] : data) {
        A2 += w * gval * gval;
        A3 += w * gval * gval * gval;
        A4 += w * gval * gval * gval * gval;
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw Error("dirichlet_boundary_mass_synthetic: measure fractions must sum to 1");
    const double Q = -std::cbrt(A3);
    const double q4 = Q * Q * Q * Q;
    return (9.0 * rho / 8.0) * (q4 - A4) + 3.0 * Q * (A2 - Q * Q);
}

double total_integral(const RadialProfile& p) {
    Kahan acc;
    auto integrand = [&](double s) { return p.f.f_at(p.u_at(s)) * std::exp(4.0 * s); };
    for (std::size_t i = 0; i + 1 < p.s.size(); ++i) acc.add(gauss3(integrand, p.s[i], p.s[i + 1]));
    acc.add(p.f.f_at(p.u_max()) * std::exp(4.0 * p.s_min()) / 4.0);  // centre tail

    if (!p.truncated) {
        // f(u) e^{4s} ~ e^{4(1+alpha)s}: extrapolate the far tail from the
        // measured decay when alpha is unavailable.
        double lambda;
        if (std::isfinite(p.alpha)) {
            lambda = 4.0 * (1.0 + p.alpha);
        } else {
            const double i1 = integrand(p.s_max() - 1.0), i2 = integrand(p.s_max());
            lambda = std::log(std::max(i2, 1e-300) / std::max(i1, 1e-300));
        }
        if (!(lambda < -1e-6))
            throw Error("total_integral: non-decaying tail (alpha >= -1), integral diverges");
        acc.add(integrand(p.s_max()) / (-lambda));
    }
    return kS3Area * acc.value();
}

void write_mass_scan_csv(const MassScan& scan, const std::string& path,
                         const std::string& config_echo) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("write_mass_scan_csv: cannot open " + path);
    std::fputs("t,N,P,Q,V,M,M_alt,dM\n", fp);
    for (std::size_t i = 0; i < scan.t.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", scan.t[i],
                     scan.N[i], scan.P[i], scan.Q[i], scan.V[i], scan.M[i], scan.M_alt[i],
                     scan.dM[i]);
    std::fclose(fp);

    nlohmann::json j;
    j["source"] = scan.source;
    j["rho"] = scan.rho;
    j["f_spec"] = {{"p", scan.f.p}, {"beta", 4}};
    j["levels"] = scan.t.size();
    if (scan.source == "grid") {
        j["cells_total"] = scan.cells_total;
        j["cells_excluded"] = scan.cells_excluded;
        j["excluded_fraction"] = scan.excluded_fraction;
        j["delta_t"] = scan.delta_t;
        j["error_estimate"] = scan.error_estimate;
    }
    j["library_version"] = kVersion;
    if (!config_echo.empty()) j["config"] = config_echo;
    std::ofstream side(path + ".json");
    side << j.dump(2) << "\n";
}

}  // namespace sigma2lab
