#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sigma2lab/field.hpp"
#include "sigma2lab/radial.hpp"

namespace sigma2lab {

// Blow-down diagnostics: rescaled level sets y = x / r_min(t), the blow-down
// functions u_i(y) = u(r_min(t_i) y) - t_i, and their distance to the cone
// alpha ln|y|.
struct BlowdownReport {
    std::vector<double> t;
    std::vector<double> r_min, r_max;
    std::vector<double> sup_log_radius_error;       // max over L_t of ||y| - 1|
    std::vector<double> gradient_alignment_error;   // sup |y . grad u_i(y) - alpha|
    std::vector<double> sup_norm_error;             // sup_E |u_i - alpha ln|y||
    double alpha = 0.0;
    double alpha_fit = 0.0;
    double alpha_fit_residual = 0.0;
    double ratio_max = 0.0;
    int ratio_bound_violations = 0;  // levels whose rescaled set escapes the annulus
    std::string source;
};

// min/max radius of the level set {u = t}.
std::pair<double, double> extremal_radii(const RadialProfile& p, double t);
// Grid version: min/max over level-crossing cell edges with linear sub-cell
// interpolation. Throws DomainError for an empty level set.
std::pair<double, double> extremal_radii(const ScalarField4& field, double t);

struct AlphaFit {
    double slope = 0.0;
    double residual = 0.0;  // rms of the fitted half
};

// Least-squares slope of u_min(r) against ln r over the deepest half of the
// level sequence. Requires at least 4 decades of radius.
AlphaFit alpha_fit(const RadialProfile& p, const std::vector<double>& t_sequence);
AlphaFit alpha_fit(const ScalarField4& field, const std::vector<double>& t_sequence);

BlowdownReport blowdown_convergence(const RadialProfile& p, const std::vector<double>& t_sequence,
                                    double annulus_R = 4.0);
BlowdownReport blowdown_convergence(const ScalarField4& field, double alpha,
                                    const std::vector<double>& t_sequence, double annulus_R = 4.0);

// CSV "t,r_min,r_max,sup_err,grad_err" + JSON summary {alpha_fit, ratio_max}.
void write_blowdown_csv(const BlowdownReport& r, const std::string& path,
                        const std::string& config_echo = "");

}  // namespace sigma2lab
