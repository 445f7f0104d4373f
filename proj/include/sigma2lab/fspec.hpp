#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace sigma2lab {

// Right-hand side family f(u) = e^{4u} p(u) with p a polynomial (beta is
// fixed to 4 throughout). The antiderivative is exact: F(u) = e^{4u} q(u)
// where q solves q' + 4q = p, found by a descending coefficient recurrence.
// All P-type quantities use differences F(t) - F(u), so the integration
// constant is irrelevant; anchored variants subtract F at the anchor.
struct FSpec {
    std::vector<double> p;  // polynomial coefficients, p[k] * u^k

    static FSpec constant(double c) { return FSpec{{c}}; }
    // The section-9 right-hand side f(u) = (3/2) e^{4u}.
    static FSpec standard() { return constant(1.5); }

    bool is_constant() const {
        for (std::size_t k = 1; k < p.size(); ++k)
            if (p[k] != 0.0) return false;
        return !p.empty();
    }

    double p_at(double u) const {
        double v = 0.0;
        for (std::size_t k = p.size(); k-- > 0;) v = v * u + p[k];
        return v;
    }

    double f_at(double u) const { return std::exp(4.0 * u) * p_at(u); }

    std::vector<double> q_coeffs() const {
        std::vector<double> q(p.size(), 0.0);
        for (std::size_t k = p.size(); k-- > 0;) {
            double carry = (k + 1 < p.size()) ? (k + 1) * q[k + 1] : 0.0;
            q[k] = (p[k] - carry) / 4.0;
        }
        return q;
    }

    double F_at(double u) const {
        const std::vector<double> q = q_coeffs();
        double v = 0.0;
        for (std::size_t k = q.size(); k-- > 0;) v = v * u + q[k];
        return std::exp(4.0 * u) * v;
    }

    // F(t) - F(u), evaluated stably when t is close to u. For constant p the
    // difference reduces to (p0/4) e^{4u} expm1(4(t-u)).
    double F_diff(double t, double u) const {
        if (is_constant()) return (p[0] / 4.0) * std::exp(4.0 * u) * std::expm1(4.0 * (t - u));
        return F_at(t) - F_at(u);
    }

    std::string describe() const {
        std::string s = "e^{4u}*(";
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (k) s += (p[k] < 0 ? " - " : " + ");
            double c = k ? std::abs(p[k]) : p[k];
            s += std::to_string(c);
            if (k == 1) s += "*u";
            if (k > 1) s += "*u^" + std::to_string(k);
        }
        return s + ")";
    }
};

}  // namespace sigma2lab
