#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sigma2lab/field.hpp"
#include "sigma2lab/fspec.hpp"
#include "sigma2lab/radial.hpp"

namespace sigma2lab {

// Area of the unit 3-sphere.
inline constexpr double kS3Area = 2.0 * std::numbers::pi * std::numbers::pi;

struct Npqv {
    double N = 0.0;  // (1/|S3|) int_{Omega_t} sigma2(A) dx
    double P = 0.0;  // (1/|S3|) int_{Omega_t} (F(t) - F(u)) dx
    double Q = 0.0;  // -( (1/|S3|) int_{Omega_t} div(-|grad u|^2 grad u) dx )^{1/3}
    double V = 0.0;  // |Omega_t| / |S3|
};

// int_{-inf}^{s_upper} integrand(s, u(s)) e^{4s} ds along a profile
// (dx = |S3| r^3 dr collapses to the e^{4s} weight after dividing by |S3|);
// cubic Hermite for u, 3-point Gauss per grid interval, analytic centre tail.
double radial_ball_integral(const RadialProfile& p, double s_upper,
                            const std::function<double(double, double)>& integrand_of_su);

// Level quantities for a radial profile: Q and N collapse to the sphere
// values u_s and (3/2)u_s^2 + (rho/2)u_s^3 at s(t); V = e^{4 s(t)}/4; P by
// 1-D quadrature with the log-radius volume weight. The declared f governs
// P only (used for super-solution scans); the profile's own f is the
// default.
Npqv npqv_radial(const RadialProfile& p, const FSpec& f, double t);
Npqv npqv_radial(const RadialProfile& p, double t);

struct MassPoint {
    double M = 0.0;      // 2NQ + (rho/8) Q^4 - 12P
    double M_alt = 0.0;  // boundary-only form (Cor. of the Pohozaev identity)
};

MassPoint mass_radial(const RadialProfile& p, const FSpec& f, double t);
MassPoint mass_radial(const RadialProfile& p, double t);

struct MassScan {
    std::vector<double> t, N, P, Q, V, M, M_alt, dM;
    std::string source;  // "radial" or "grid"
    double rho = 0.0;
    FSpec f;
    // Grid-only diagnostics.
    std::vector<double> error_estimate;
    std::vector<double> delta_t;  // co-area differencing half-width per level
    std::int64_t cells_total = 0;
    std::int64_t cells_excluded = 0;
    double excluded_fraction = 0.0;
};

MassScan mass_scan_radial(const RadialProfile& p, const FSpec& declared_f,
                          const std::vector<double>& t_grid);

struct CoareaBinning {
    int min_cells_per_bin = 200;
    double delta_t = 0.0;  // 0: start from kappa_h * h * median |grad u|
    double kappa_h = 0.5;
    // Super-solution verification slack (relative to f(u)) absorbing the
    // O(h^2) stencil noise; genuine violations exceed it.
    double supersolution_slack_rel = 0.05;
    double max_violation_fraction = 1e-3;
    int margin = 2;
};

// Co-area scan of a gridded field satisfying sigma2(A) >= f(u) with
// A in Gamma_2^+ on the scanned region (verified first; violations are
// counted and reported). Near-critical cells are excluded from surface
// quantities and reported. Throws DomainError if any Omega_t touches the
// grid boundary.
MassScan mass_scan_grid(const ScalarField4& field, double rho, const FSpec& f,
                        const std::vector<double>& t_grid, const CoareaBinning& binning = {});

// Boundary-only Dirichlet mass on the sphere |x| = R (section on the
// Dirichlet problem): (9 rho/8)[Q^4 - avg|grad u|^4 R] + 3Q[avg|grad u|^2/R - Q^2]
// with sphere averages; identically 0 for radial data.
double dirichlet_boundary_mass(const RadialProfile& p, double R, double rho);

// Synthetic boundary data on the unit sphere: (|grad u| value, fraction of
// sphere measure) pairs; fractions must sum to 1.
double dirichlet_boundary_mass_synthetic(const std::vector<std::pair<double, double>>& data,
                                         double rho);

// int_{R^4} f(u) dx over the profile's domain, with tail extrapolation from
// the asymptotic slope for entire solutions. Throws Error if the decay rate
// indicates divergence.
double total_integral(const RadialProfile& p);

void write_mass_scan_csv(const MassScan& scan, const std::string& path,
                         const std::string& config_echo = "");

}  // namespace sigma2lab
