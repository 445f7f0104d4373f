#include "sigma2lab/atensor.hpp"

#include <algorithm>
#include <cmath>

#include "sigma2lab/errors.hpp"

namespace sigma2lab {

SymMat4 assemble_A(const Jet2& jet, double rho) {
    const double g2 = dot(jet.gradient, jet.gradient);
    SymMat4 A = -jet.hessian + SymMat4::outer(jet.gradient) * rho -
                SymMat4::identity() * (0.5 * rho * g2);
    return A;
}

namespace {

double max_abs_diff(const SymMat4& a, const SymMat4& b) {
    double m = 0.0;
    for (int k = 0; k < 10; ++k) m = std::max(m, std::abs(a.a[k] - b.a[k]));
    return m;
}

}  // namespace

double scaling_check(const Jet2& jet, double rho, double a, double b) {
    double worst = 0.0;

    // v(y) = u(a y) + b at y = x/a carries (value+b, a grad, a^2 hess).
    Jet2 scaled;
    scaled.value = jet.value + b;
    scaled.gradient = a * jet.gradient;
    scaled.hessian = jet.hessian * (a * a);
    worst = std::max(worst, max_abs_diff(assemble_A(scaled, rho), assemble_A(jet, rho) * (a * a)));

    Jet2 negated;
    negated.value = -jet.value;
    negated.gradient = -1.0 * jet.gradient;
    negated.hessian = -jet.hessian;
    worst = std::max(worst, max_abs_diff(assemble_A(negated, -rho), -assemble_A(jet, rho)));

    if (rho != 0.0) {
        Jet2 mul;
        mul.value = rho * jet.value;
        mul.gradient = rho * jet.gradient;
        mul.hessian = jet.hessian * rho;
        worst = std::max(worst,
                         max_abs_diff(assemble_A(mul, 1.0) * (1.0 / rho), assemble_A(jet, rho)));
    }
    return worst;
}

double div_norm2_grad(const Jet2& jet) {
    const Vec4 hg = jet.hessian.apply(jet.gradient);
    return 2.0 * dot(jet.gradient, hg) + dot(jet.gradient, jet.gradient) * jet.hessian.trace();
}

FrameDecomp frame_decompose(const Jet2& jet, double rho, double eps_g) {
    FrameDecomp fd;
    fd.grad_norm = norm(jet.gradient);
    if (!(fd.grad_norm > eps_g))
        throw CriticalPointError("frame_decompose: |grad u| below critical threshold");
    fd.nu = (-1.0 / fd.grad_norm) * jet.gradient;

    // Tangent frame: Gram-Schmidt of the coordinate axes least aligned with
    // nu; ties broken by axis index.
    int order[4] = {0, 1, 2, 3};
    std::stable_sort(order, order + 4,
                     [&](int p, int q) { return std::abs(fd.nu[p]) < std::abs(fd.nu[q]); });
    int nt = 0;
    Vec4 basis[4];
    basis[0] = fd.nu;
    for (int k = 0; k < 4 && nt < 3; ++k) {
        Vec4 v{};
        v[order[k]] = 1.0;
        for (int m = 0; m <= nt; ++m) v = v - dot(v, basis[m]) * basis[m];
        const double n = norm(v);
        if (n < 1e-10) continue;
        basis[nt + 1] = (1.0 / n) * v;
        fd.tangent[nt] = basis[nt + 1];
        ++nt;
    }

    const double g = fd.grad_norm;
    const double g2 = g * g;
    for (int a = 0; a < 3; ++a) {
        const Vec4 ht = jet.hessian.apply(fd.tangent[a]);
        fd.mixed[a] = dot(ht, fd.nu);
        for (int b = a; b < 3; ++b)
            fd.a_tilde.set(a, b, -dot(ht, fd.tangent[b]) - (b == a ? 0.5 * rho * g2 : 0.0));
    }
    fd.u44 = dot(jet.hessian.apply(fd.nu), fd.nu);
    // H = tr(h) with h_ab = -u_ab / |grad|; equivalently -lap = H|grad| - u44.
    fd.mean_curvature = -(jet.hessian.trace() - fd.u44) / g;
    return fd;
}

SymMat4 frame_reassemble(const FrameDecomp& fd, double rho) {
    SymMat4 m;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) m.set(a, b, fd.a_tilde(a, b));
    for (int a = 0; a < 3; ++a) m.set(a, 3, -fd.mixed[a]);
    m.set(3, 3, -fd.u44 + 0.5 * rho * fd.grad_norm * fd.grad_norm);
    return m;
}

double sigma1_a_tilde(const FrameDecomp& fd, double) { return sigma1(fd.a_tilde); }

double divergence_residual(const AnalyticField& u, double rho, const Vec4& x) {
    const Jet2 j = u.jet(x);
    const Third t = u.third(x);
    const double lhs = sigma_k(assemble_A(j, rho), 2);

    // -1/2 d_j[(-lap u) u_j + u_ij u_i - rho |grad|^2 u_j], all derivatives
    // written out against the third-derivative tensor.
    const double lap = j.hessian.trace();
    double grad_lap_dot = 0.0;  // (d_j lap) u_j
    double t_term = 0.0;        // u_ijj u_i
    for (int jj = 0; jj < 4; ++jj) {
        double dl = 0.0;
        for (int k = 0; k < 4; ++k) dl += t(k, k, jj);
        grad_lap_dot += dl * j.gradient[jj];
    }
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int jj = 0; jj < 4; ++jj) s += t(i, jj, jj);
        t_term += s * j.gradient[i];
    }
    double hess_sq = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int jj = 0; jj < 4; ++jj) hess_sq += j.hessian(i, jj) * j.hessian(i, jj);
    const double g2 = dot(j.gradient, j.gradient);
    const Vec4 hg = j.hessian.apply(j.gradient);
    const double div_b = -grad_lap_dot - lap * lap + t_term + hess_sq -
                         rho * (2.0 * dot(j.gradient, hg) + g2 * lap);
    const double rhs = -0.5 * div_b;
    return std::abs(lhs - rhs);
}

double newton_divergence_residual(const AnalyticField& u, const Vec4& x, double h) {
    // T1 and T2 evaluated from exact Hessians at stencil points; the outer
    // d_j by a 5-point centred difference (exact for quartic u).
    auto tensors_at = [&](const Vec4& y) { return newton_tensors(u.jet(y).hessian); };

    double worst = 0.0;
    for (int sel = 0; sel < 2; ++sel) {
        for (int i = 0; i < 4; ++i) {
            double div_i = 0.0;
            for (int jj = 0; jj < 4; ++jj) {
                Vec4 p1 = x, m1 = x, p2 = x, m2 = x;
                p1[jj] += h;
                m1[jj] -= h;
                p2[jj] += 2 * h;
                m2[jj] -= 2 * h;
                auto pick = [&](const Vec4& y) {
                    const NewtonTensors nt = tensors_at(y);
                    return sel == 0 ? nt.t1(i, jj) : nt.t2(i, jj);
                };
                div_i += (-pick(p2) + 8.0 * pick(p1) - 8.0 * pick(m1) + pick(m2)) / (12.0 * h);
            }
            worst = std::max(worst, std::abs(div_i));
        }
    }
    return worst;
}

}  // namespace sigma2lab
