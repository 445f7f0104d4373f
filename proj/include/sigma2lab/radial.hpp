#pragma once

#include <string>
#include <vector>

#include "sigma2lab/fspec.hpp"
#include "sigma2lab/jet.hpp"

namespace sigma2lab {

// Quadratic factor of the phase polynomial: x (g(x)) with
// g(x) = (rho/4) x^2 + ((2+rho)/3) x + 1.
double phase_quadratic(double rho, double x);

struct RootAnalysis {
    double rho = 0.0;
    double x0 = 0.0;           // the trivial root
    double x1 = 0.0;           // root closer to -1 (NaN when complex)
    double x2 = 0.0;           // the other root (NaN when complex or rho = 0)
    double discriminant = 0.0; // rho^2 - 5 rho + 4
    bool has_real_roots = false;
};

// Roots of the quadratic factor, by the numerically stable formula. For
// rho = 0 the factor degenerates to a linear one with root -3/2. The
// discriminant is negative exactly on rho in (1,4): no real roots there.
RootAnalysis analyze_roots(double rho);

// Slope of u in log-radius at infinity. -3/2 at rho = 0; the root of the
// quadratic closer to -1 for rho in (0,1]. Throws NonexistenceError for
// rho >= 2 and DomainError for rho in (1,2), where the trajectory reaches
// the cone boundary at finite radius and no entire solution exists.
double asymptotic_slope(double rho);

// Upper end of the admissible gauge interval (0, eps_max):
// 3/2 at rho = 0; -x1 for rho in (0,1]; 2/rho for rho in (1,2).
double admissible_epsilon_max(double rho);

// Radial solution sampled on a log-radius grid s = ln r.
struct RadialProfile {
    double rho = 0.0;
    double epsilon = 0.0;   // gauge: u_s(0) = -epsilon
    double alpha = 0.0;     // asymptotic slope (NaN when undefined)
    double tolerance = 0.0;
    bool truncated = false; // trajectory stopped at the cone boundary
    FSpec f;
    std::vector<double> s, u, u_s, u_ss;

    // Independent-route certification: max |u from quadrature of u_s - u
    // recovered algebraically| for the first-integral backend; max defect of
    // a re-integration for the general backend.
    double consistency = 0.0;

    double s_min() const { return s.front(); }
    double s_max() const { return s.back(); }
    double u_max() const { return u.front(); }
    double u_min() const { return u.back(); }

    double u_at(double at_s) const;
    double u_s_at(double at_s) const;
    // Log-radius of the level {u = t}; DomainError outside [u_min, u_max].
    double s_of_u(double t) const;
};

struct RadialOptions {
    double s_min = -12.0;
    double s_max = 12.0;
    double tolerance = 1e-10;
    double ds_out = 1.0 / 64.0;
    // Distance from the cone boundary -2/rho at which integration stops
    // (relative to 2/rho); only reached for rho in (1,2).
    double stop_margin = 1e-7;
};

// Solve 3 u_ss (u_s + (rho/2) u_s^2) = (3/2) e^{4(u+s)}, u_s(-inf) = 0,
// u_s(0) = -epsilon, using the first integral: the autonomous equation
// u_ss = 2 u_s g(u_s) / (1 + (rho/2) u_s) is integrated in w = ln(-u_s) and
// u is recovered algebraically as u = (1/4) ln(4 u_s^2 g(u_s)) - s.
RadialProfile solve_radial(double rho, double epsilon, const RadialOptions& opt = {});

// Direct second-order shooting for f(u) = e^{4u} p(u) with polynomial p > 0:
// seeds near s -> -inf from the asymptotic expansion and bisects on the
// centre value u0 to match the gauge u_s(0) = -epsilon.
RadialProfile solve_radial_general(double rho, double epsilon, const FSpec& f,
                                   const RadialOptions& opt = {});

// max over the grid of |u_s^2 g(u_s) - (1/4) e^{4(u+s)}|; requires p == 3/2.
double first_integral_residual(const RadialProfile& p);

// max over interior grid points of the second difference of u in s,
// divided by ds^2 (<= 0 up to tolerance for admissible profiles).
double concavity_check(const RadialProfile& p);

// CSV "s,u,u_s" plus a JSON sidecar (path + ".json") with rho, epsilon,
// alpha, tolerance, f_spec and the config echo.
void write_profile_csv(const RadialProfile& p, const std::string& path,
                       const std::string& config_echo = "");
RadialProfile read_profile_csv(const std::string& path);

// Analytic field u(|x|) built from a profile; exact radial jets with a
// series fallback below r_floor (no third derivatives).
class RadialField : public AnalyticField {
public:
    explicit RadialField(const RadialProfile& p) : p_(p) {}
    Jet2 jet(const Vec4& x) const override;

private:
    const RadialProfile& p_;
};

}  // namespace sigma2lab
