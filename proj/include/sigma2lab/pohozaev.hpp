#pragma once

#include <functional>
#include <string>

#include "sigma2lab/field.hpp"
#include "sigma2lab/fspec.hpp"
#include "sigma2lab/radial.hpp"

namespace sigma2lab {

// Weight K(x) in sigma2(A) = K(x) f(u), supplied with an analytic gradient
// (no numerical differentiation of K).
struct KSpec {
    std::function<double(const Vec4&)> value;
    std::function<Vec4(const Vec4&)> gradient;
    std::string name = "1";
    bool is_one = true;

    static KSpec one() {
        KSpec k;
        k.value = [](const Vec4&) { return 1.0; };
        k.gradient = [](const Vec4&) { return Vec4{}; };
        return k;
    }
    // K = 1 + a e^{-|x|^2}
    static KSpec gaussian_bump(double a);
};

struct PohozaevReport {
    double lhs = 0.0;  // volume side
    double rhs = 0.0;  // boundary side
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    std::string domain;
    std::string k_spec;
    double anchor = 0.0;  // tau with F(tau) = 0
};

// Pohozaev identity on the ball B_R with radial data:
//   int_B 8 (K + <x, grad K>/4) F(u) dx = int_{dB} (-3/4 rho |grad u|^4 <x,nu>
//                                            + 2/3 H |grad u|^3 <x,nu>) dl,
// F anchored at tau = u(R). The boundary side has the closed sphere form
// |S3| (-3/4 rho u_s^4 - 2 u_s^3) at s = ln R. For nonconstant K the profile
// is read as a solution of sigma2 = K(x) fhat(u) with fhat = f / K along the
// radial bijection, and Fhat is accumulated by quadrature.
PohozaevReport pohozaev_radial(const RadialProfile& p, double R, const KSpec& k = KSpec::one());

struct PohozaevGridOptions {
    double pde_residual_rel_max = 0.5;  // refusal threshold
    double delta_t = 0.0;               // 0: kappa_h * h * median |grad u|
    double kappa_h = 0.5;
    int min_cells_per_bin = 200;
    int margin = 2;
};

// Grid version with Omega = Omega_t (tau = t); the boundary side is
// extracted by co-area differencing. Refuses fields whose PDE residual on
// Omega_t exceeds the threshold (the identity only holds for solutions).
PohozaevReport pohozaev_grid(const ScalarField4& field, double rho, const FSpec& f, double t,
                             const KSpec& k = KSpec::one(), const PohozaevGridOptions& opt = {});

// |P_volume - P_boundary| where 8 |S3| P_boundary = -int_{dOmega_t}(...) dl
// is the Pohozaev bridge behind the boundary-only mass.
double mass_pohozaev_consistency(const RadialProfile& p, double t);
double mass_pohozaev_consistency(const ScalarField4& field, double rho, const FSpec& f, double t,
                                 const PohozaevGridOptions& opt = {});

std::string pohozaev_report_json(const PohozaevReport& r, const std::string& config_echo = "");

}  // namespace sigma2lab
