#include <doctest.h>

#include <cmath>
#include <random>

#include "sigma2lab/atensor.hpp"
#include "sigma2lab/errors.hpp"
#include "sigma2lab/field.hpp"
#include "sigma2lab/jet.hpp"

using namespace sigma2lab;

namespace {

Jet2 quadratic_jet_at(const SymMat4& hess, const Vec4& x) {
    // u = x^T hess x / 2
    Jet2 j;
    j.hessian = hess;
    j.gradient = hess.apply(x);
    j.value = 0.5 * dot(x, j.gradient);
    return j;
}

// Random 4-D rotation via Gram-Schmidt of a random matrix.
std::array<Vec4, 4> random_rotation(std::mt19937& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::array<Vec4, 4> q;
    for (int k = 0; k < 4; ++k) {
        Vec4 v{g(rng), g(rng), g(rng), g(rng)};
        for (int m = 0; m < k; ++m) v = v - dot(v, q[m]) * q[m];
        q[k] = (1.0 / norm(v)) * v;
    }
    return q;
}

Jet2 rotate_jet(const Jet2& j, const std::array<Vec4, 4>& q) {
    // v(y) = u(Q y): grad_v = Q^T grad_u, hess_v = Q^T hess_u Q.
    Jet2 out;
    out.value = j.value;
    for (int a = 0; a < 4; ++a) out.gradient[a] = dot(q[a], j.gradient);
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) out.hessian.set(a, b, dot(q[a], j.hessian.apply(q[b])));
    return out;
}

}  // namespace

TEST_CASE("assemble_A on closed-form jets") {
    // u = |x|^2/2 at the origin: gradient terms vanish, A = -Id for any rho.
    Jet2 j0;
    j0.hessian = SymMat4::identity();
    for (double rho : {0.0, 1.0, -2.5}) {
        const SymMat4 A = assemble_A(j0, rho);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) CHECK(A(i, k) == doctest::Approx(i == k ? -1.0 : 0.0));
    }

    // u = -|x|^2/2 at 0, rho = 0: A = Id, sigma2 = 6.
    Jet2 jneg;
    jneg.hessian = -SymMat4::identity();
    CHECK(sigma_k(assemble_A(jneg, 0.0), 2) == doctest::Approx(6.0));

    // u = |x|^2/2 at x = e1, rho = 2: A = -I + 2 e1 e1^T - I = diag(0,-2,-2,-2).
    const Jet2 j1 = quadratic_jet_at(SymMat4::identity(), Vec4{1, 0, 0, 0});
    const SymMat4 A = assemble_A(j1, 2.0);
    CHECK(A(0, 0) == doctest::Approx(0.0));
    for (int i = 1; i < 4; ++i) CHECK(A(i, i) == doctest::Approx(-2.0));
    for (int i = 0; i < 4; ++i)
        for (int k = i + 1; k < 4; ++k) CHECK(A(i, k) == doctest::Approx(0.0));

    // Independent oracle: componentwise direct formula.
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Jet2 j = random_jet(rng, 2.0);
        const double rho = std::uniform_real_distribution<double>(-2, 2)(rng);
        const SymMat4 got = assemble_A(j, rho);
        const double g2 = dot(j.gradient, j.gradient);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                const double want = -j.hessian(i, k) + rho * j.gradient[i] * j.gradient[k] -
                                    (i == k ? 0.5 * rho * g2 : 0.0);
                CHECK(got(i, k) == doctest::Approx(want).epsilon(1e-13));
            }
    }
}

TEST_CASE("scaling identities") {
    std::mt19937 rng(42);
    Jet2 j = random_jet(rng, 1.5);
    CHECK(scaling_check(j, 1.0, 1.0, 0.0) == 0.0);
    CHECK(scaling_check(j, 1.0, 2.0, 7.0) <= 1e-12);
    CHECK(scaling_check(j, 0.5, 1.7, -3.0) <= 1e-12);
    for (int trial = 0; trial < 100; ++trial) {
        const Jet2 r = random_jet(rng, 2.0);
        CHECK(scaling_check(r, 0.5, 2.0, 7.0) <= 1e-12);
    }
}

TEST_CASE("frame decomposition against the round-sphere oracle") {
    // u = -|x|^2/2: level sets are spheres. At |x| = 1: |grad| = 1, H = 3,
    // h_ab = delta_ab (curvature 1/r of a radius-1 sphere w.r.t. -nu).
    const Vec4 x{0.5, -0.5, 0.5, -0.5};  // |x| = 1
    Jet2 j = quadratic_jet_at(-SymMat4::identity(), x);
    const FrameDecomp fd = frame_decompose(j, 0.0);
    CHECK(fd.grad_norm == doctest::Approx(1.0));
    CHECK(fd.mean_curvature == doctest::Approx(3.0));
    // a_tilde at rho = 0 equals h |grad| = Id on the tangent space.
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(fd.a_tilde(a, b) == doctest::Approx(a == b ? 1.0 : 0.0));
    CHECK(fd.u44 == doctest::Approx(-1.0));
    // nu = -grad/|grad| points outward for decreasing radial u.
    for (int a = 0; a < 4; ++a) CHECK(fd.nu[a] == doctest::Approx(x[a]));

    // Radius-r sphere: H = 3/r.
    for (double r : {0.5, 2.0, 3.7}) {
        const Vec4 xr{r, 0, 0, 0};
        const FrameDecomp fr = frame_decompose(quadratic_jet_at(-SymMat4::identity(), xr), 0.0);
        CHECK(fr.mean_curvature == doctest::Approx(3.0 / r));
    }

    Jet2 crit;
    crit.hessian = SymMat4::identity();
    CHECK_THROWS_AS(frame_decompose(crit, 0.0), CriticalPointError);
}

TEST_CASE("frame invariants on random jets") {
    std::mt19937 rng(333);
    std::uniform_real_distribution<double> rdist(-1.5, 1.5);
    for (int trial = 0; trial < 200; ++trial) {
        const Jet2 j = random_jet(rng, 1.5);
        if (norm(j.gradient) < 1e-3) continue;
        const double rho = rdist(rng);
        const FrameDecomp fd = frame_decompose(j, rho);

        // -lap u = H |grad| - u44
        CHECK(std::abs(-j.hessian.trace() - (fd.mean_curvature * fd.grad_norm - fd.u44)) <= 1e-10);

        // sigma2 of the frame reassembly equals sigma2 of the raw assembly.
        const double s2_raw = sigma_k(assemble_A(j, rho), 2);
        const double s2_frame = sigma_k(frame_reassemble(fd, rho), 2);
        CHECK(std::abs(s2_raw - s2_frame) <= 1e-9 * std::max(1.0, std::abs(s2_raw)));

        // sigma1(a_tilde) = H |grad| - (3 rho/2)|grad|^2
        const double want = fd.mean_curvature * fd.grad_norm -
                            1.5 * rho * fd.grad_norm * fd.grad_norm;
        CHECK(sigma1(fd.a_tilde) == doctest::Approx(want).epsilon(1e-10));

        // div(|grad|^2 grad) = 3 |grad|^2 (u44 - H |grad| / 3)
        const double lhs = div_norm2_grad(j);
        const double rhs = 3.0 * fd.grad_norm * fd.grad_norm *
                           (fd.u44 - fd.mean_curvature * fd.grad_norm / 3.0);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));

        // Reported quantities are invariant under a random rotation.
        const auto q = random_rotation(rng);
        const FrameDecomp fr = frame_decompose(rotate_jet(j, q), rho);
        CHECK(fr.mean_curvature == doctest::Approx(fd.mean_curvature).epsilon(1e-9));
        CHECK(fr.u44 == doctest::Approx(fd.u44).epsilon(1e-9));
        CHECK(sigma1(fr.a_tilde) == doctest::Approx(sigma1(fd.a_tilde)).epsilon(1e-9));
        CHECK(sigma2(fr.a_tilde) == doctest::Approx(sigma2(fd.a_tilde)).epsilon(1e-9));
    }
}

TEST_CASE("positive-cone pointwise inequalities (useful lemma)") {
    // On jets with rho >= 0 and A in Gamma2+, the divergence of
    // |grad u|^2 grad u is negative and sigma2(A) <= sigma1(a_tilde)(H|g|/3 - u44).
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> rdist(0.0, 1.5);
    int accepted = 0;
    for (int trial = 0; trial < 2000 && accepted < 200; ++trial) {
        // Bias the Hessian concave so A lands in the positive cone often.
        Jet2 j = random_jet(rng, 0.4);
        j.hessian = j.hessian - SymMat4::identity();
        if (norm(j.gradient) < 1e-3) continue;
        const double rho = rdist(rng);
        const SymMat4 A = assemble_A(j, rho);
        const ConeStatus st = cone_status(A);
        if (!st.in_gamma2_plus) continue;
        ++accepted;
        const FrameDecomp fd = frame_decompose(j, rho);
        CHECK(div_norm2_grad(j) < 0.0);
        const double bound = sigma1(fd.a_tilde) *
                             (fd.mean_curvature * fd.grad_norm / 3.0 - fd.u44);
        CHECK(st.sigma2 <= bound + 1e-10 * std::max(1.0, std::abs(bound)));
        CHECK(sigma1(fd.a_tilde) > 0.0);
    }
    CHECK(accepted >= 100);
}

TEST_CASE("divergence-structure residual on analytic fields") {
    std::mt19937 rng(77);
    // Quadratics: both sides are polynomial identities.
    for (int trial = 0; trial < 30; ++trial) {
        const PolyField4 q = PolyField4::random(2, rng, 1.0);
        const Vec4 x{0.3, -0.2, 0.7, 0.1};
        for (double rho : {0.0, 1.0, -1.0}) CHECK(divergence_residual(q, rho, x) <= 1e-10);
    }
    // Gaussian with the <x,grad> terms active.
    const ExpPolyField gauss = ExpPolyField::gaussian();
    CHECK(divergence_residual(gauss, 1.0, Vec4{0.3, 0.1, -0.2, 0.4}) <= 1e-8);
    // u = 0.
    const PolyField4 zero{};
    CHECK(divergence_residual(zero, 1.0, Vec4{1, 2, 3, 4}) == doctest::Approx(0.0));
}

TEST_CASE("newton tensors are divergence free (nested differentiation)") {
    std::mt19937 rng(123);
    // Quadratic u: constant tensors, residual at round-off.
    const PolyField4 quad = PolyField4::random(2, rng, 1.0);
    CHECK(newton_divergence_residual(quad, Vec4{0.2, 0.4, -0.1, 0.3}) <= 1e-12);
    // Random quartics: the 5-point stencil differentiates them exactly.
    for (int trial = 0; trial < 20; ++trial) {
        const PolyField4 quart = PolyField4::random(4, rng, 0.5);
        CHECK(newton_divergence_residual(quart, Vec4{0.1, -0.3, 0.2, 0.25}) <= 1e-8);
    }
    // u = exp(x1 x2) with analytic derivatives.
    const ExpPolyField ep = ExpPolyField::exp_product(0, 1);
    CHECK(newton_divergence_residual(ep, Vec4{0.3, -0.2, 0.5, 0.1}) <= 1e-7);
}

TEST_CASE("grid jets: exactness and convergence order") {
    const Index4 ext{9, 9, 9, 9};
    const std::array<double, 4> h{0.1, 0.1, 0.1, 0.1};
    const Vec4 origin{-0.4, -0.4, -0.4, -0.4};

    // Affine field: stencils are exact.
    const ScalarField4 affine = ScalarField4::sample(ext, h, origin,
                                                     [](const Vec4& x) { return x[0]; });
    const Jet2 ja = affine.jet_at(Index4{4, 4, 4, 4});
    CHECK(ja.gradient[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 1; a < 4; ++a) CHECK(std::abs(ja.gradient[a]) <= 1e-12);
    for (int k = 0; k < 10; ++k) CHECK(std::abs(ja.hessian.a[k]) <= 1e-12);

    // Quadratic field: Hessian exact.
    const ScalarField4 quad = ScalarField4::sample(ext, h, origin,
                                                   [](const Vec4& x) { return 0.5 * dot(x, x); });
    const Jet2 jq = quad.jet_at(Index4{4, 4, 4, 4});
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            CHECK(jq.hessian(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));

    // sin(x1): halving h shrinks the Hessian error by about 4 (Richardson).
    auto hess_err = [&](double hh) {
        const ScalarField4 f = ScalarField4::sample(
            Index4{9, 5, 5, 5}, {hh, hh, hh, hh}, Vec4{0.3 - 4 * hh, -2 * hh, -2 * hh, -2 * hh},
            [](const Vec4& x) { return std::sin(x[0]); });
        const Jet2 j = f.jet_at(Index4{4, 2, 2, 2});
        return std::abs(j.hessian(0, 0) - (-std::sin(0.3)));
    };
    const double e1 = hess_err(0.08), e2 = hess_err(0.04);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));

    CHECK_THROWS_AS(affine.jet_at(Index4{1, 4, 4, 4}), IndexError);
}

TEST_CASE("grid divergence residual shrinks at second order") {
    auto resid = [&](double hh) {
        const int n = 11;
        const ScalarField4 f = ScalarField4::sample(
            Index4{n, n, n, n}, {hh, hh, hh, hh},
            Vec4{0.1 - 5 * hh, 0.2 - 5 * hh, -0.1 - 5 * hh, 0.05 - 5 * hh},
            [](const Vec4& x) { return std::exp(-dot(x, x)); });
        return divergence_residual_grid(f, 1.0, Index4{5, 5, 5, 5});
    };
    const double e1 = resid(0.05), e2 = resid(0.025);
    CHECK(e1 / e2 > 2.5);
    CHECK(e1 / e2 < 6.5);
}

TEST_CASE("field blob round trip") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> d(-1, 1);
    ScalarField4 f(Index4{5, 6, 7, 5}, {0.1, 0.2, 0.1, 0.3}, Vec4{0, -1, 2, 0.5});
    Index4 idx{};
    for (idx[0] = 0; idx[0] < 5; ++idx[0])
        for (idx[1] = 0; idx[1] < 6; ++idx[1])
            for (idx[2] = 0; idx[2] < 7; ++idx[2])
                for (idx[3] = 0; idx[3] < 5; ++idx[3]) f.at(idx) = d(rng);
    const std::string path = "test_field_roundtrip.blob";
    f.write_blob(path);
    const ScalarField4 g = ScalarField4::read_blob(path);
    CHECK(g.extent(1) == 6);
    CHECK(g.spacing(3) == doctest::Approx(0.3));
    CHECK(g.samples() == f.samples());  // bit identical
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}
