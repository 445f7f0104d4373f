#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "sigma2lab/jet.hpp"
#include "sigma2lab/symmat.hpp"
#include "sigma2lab/vec4.hpp"

using namespace sigma2lab;

namespace {

// Independent oracle: elementary symmetric function by subset enumeration.
double esf_bruteforce(const std::array<double, 4>& ev, int k) {
    double s = 0.0;
    for (int mask = 0; mask < 16; ++mask) {
        if (std::popcount(static_cast<unsigned>(mask)) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < 4; ++i)
            if (mask & (1 << i)) prod *= ev[i];
        s += prod;
    }
    return s;
}

double esf3_bruteforce(const std::array<double, 3>& ev, int k) {
    double s = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        if (std::popcount(static_cast<unsigned>(mask)) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) prod *= ev[i];
        s += prod;
    }
    return s;
}

}  // namespace

TEST_CASE("sigma_k on reference matrices") {
    CHECK(sigma_k(SymMat4::identity(), 2) == doctest::Approx(6.0).epsilon(1e-15));
    for (int k = 1; k <= 4; ++k) CHECK(sigma_k(SymMat4::zero(), k) == 0.0);

    const SymMat4 d = SymMat4::diagonal(1, 2, 3, 4);
    const double expect = esf_bruteforce({1, 2, 3, 4}, 2);
    CHECK(expect == doctest::Approx(35.0));
    CHECK(sigma_k(d, 2) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(sigma_k(d, 1) == doctest::Approx(10.0));
    CHECK(sigma_k(d, 3) == doctest::Approx(esf_bruteforce({1, 2, 3, 4}, 3)));
    CHECK(sigma_k(d, 4) == doctest::Approx(24.0));
}

TEST_CASE("eigenvalues of diagonal and identity input") {
    const auto ev = eigenvalues(SymMat4::diagonal(4, 3, 2, 1));
    CHECK(ev[0] == doctest::Approx(1.0));
    CHECK(ev[1] == doctest::Approx(2.0));
    CHECK(ev[2] == doctest::Approx(3.0));
    CHECK(ev[3] == doctest::Approx(4.0));
    for (double v : eigenvalues(SymMat4::identity())) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("eigen decomposition reconstructs and cross-checks sigma_k") {
    std::mt19937 rng(20240811);
    for (int trial = 0; trial < 200; ++trial) {
        const SymMat4 m = random_symmat(rng, 2.5);
        const EigenDecomp ed = eigen_decompose(m);

        // ||m - Q Lambda Q^T|| <= 1e-12 ||m||
        double resid = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double rec = 0.0;
                for (int k = 0; k < 4; ++k) rec += ed.vectors[k][i] * ed.values[k] * ed.vectors[k][j];
                resid += (m(i, j) - rec) * (m(i, j) - rec);
            }
        CHECK(std::sqrt(resid) <= 1e-12 * std::max(m.frobenius_norm(), 1e-30));

        for (int k = 1; k <= 4; ++k) {
            const double oracle = esf_bruteforce(ed.values, k);
            const double scale = std::max(1.0, std::abs(oracle));
            CHECK(std::abs(sigma_k(m, k) - oracle) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("cone classification") {
    const ConeStatus neg = cone_status(-SymMat4::identity());
    CHECK(neg.sigma1 == doctest::Approx(-4.0));
    CHECK(neg.sigma2 == doctest::Approx(6.0));
    CHECK(neg.in_gamma2_minus);
    CHECK_FALSE(neg.in_gamma2_plus);

    // Pair sums: 3 * (1*1) + 3 * (1*(-1)) = 0, exactly on the boundary.
    CHECK(esf_bruteforce({1, 1, 1, -1}, 2) == doctest::Approx(0.0));
    const ConeStatus bd = cone_status(SymMat4::diagonal(1, 1, 1, -1));
    CHECK(bd.sigma1 == doctest::Approx(2.0));
    CHECK(bd.sigma2 == doctest::Approx(0.0));
    CHECK_FALSE(bd.in_gamma2_plus);
    CHECK_FALSE(bd.in_gamma2_minus);
    CHECK(bd.on_boundary);

    CHECK(cone_status(SymMat4::identity()).in_gamma2_plus);
}

TEST_CASE("cone flags swap under negation") {
    std::mt19937 rng(7);
    int classified = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const SymMat4 m = random_symmat(rng, 1.0);
        const ConeStatus a = cone_status(m);
        const ConeStatus b = cone_status(-m);
        CHECK(a.in_gamma2_plus == b.in_gamma2_minus);
        CHECK(a.in_gamma2_minus == b.in_gamma2_plus);
        if (a.in_gamma2_plus || a.in_gamma2_minus) ++classified;
        const bool both = a.in_gamma2_plus && a.in_gamma2_minus;
        CHECK_FALSE(both);
    }
    CHECK(classified > 0);
}

TEST_CASE("newton tensors on reference Hessians") {
    // u = |x|^2/2: direct substitution gives T1 = -3 I and T2 = 3 I.
    const NewtonTensors nt = newton_tensors(SymMat4::identity());
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(nt.t1(i, j) == doctest::Approx(i == j ? -3.0 : 0.0));
            CHECK(nt.t2(i, j) == doctest::Approx(i == j ? 3.0 : 0.0));
        }
    CHECK(sigma_k(-SymMat4::identity(), 2) == doctest::Approx(6.0));

    const NewtonTensors z = newton_tensors(SymMat4::zero());
    for (int k = 0; k < 10; ++k) {
        CHECK(z.t1.a[k] == 0.0);
        CHECK(z.t2.a[k] == 0.0);
    }
}

TEST_CASE("newton tensor contraction identities on random Hessians") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const SymMat4 h = random_symmat(rng, 3.0);
        const NewtonTensors nt = newton_tensors(h);
        const double s2 = sigma_k(-h, 2);
        double contraction = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) contraction += nt.t1(i, j) * h(i, j);
        const double scale = std::max(1.0, std::abs(s2));
        CHECK(std::abs(-contraction - 2.0 * s2) <= 1e-10 * scale);
        CHECK(std::abs(nt.t2.trace() - 2.0 * s2) <= 1e-10 * scale);
    }
}

TEST_CASE("sigma_k scaling and Newton-MacLaurin inequalities") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> cdist(-3.0, 3.0);
    for (int trial = 0; trial < 300; ++trial) {
        const SymMat4 m = random_symmat(rng, 2.0);
        const double c = cdist(rng);
        for (int k = 1; k <= 4; ++k) {
            const double lhs = sigma_k(m * c, k);
            const double rhs = std::pow(c, k) * sigma_k(m, k);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
        }

        // 4x4: sigma2 <= (3/8) sigma1^2 whenever sigma1 >= 0.
        const double s1 = sigma_k(m, 1);
        if (s1 >= 0.0) CHECK(sigma_k(m, 2) <= (3.0 / 8.0) * s1 * s1 + 1e-12);

        // 3x3 sub-case via a random symmetric 3x3.
        SymMat3 m3;
        std::uniform_real_distribution<double> d3(-2.0, 2.0);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) m3.set(i, j, d3(rng));
        if (sigma1(m3) >= 0.0) CHECK(sigma2(m3) <= sigma1(m3) * sigma1(m3) / 3.0 + 1e-12);
    }

    // sigma2 of a diagonal 3x3 equals the pair sum.
    SymMat3 d3;
    d3.set(0, 0, 2.0);
    d3.set(1, 1, -1.0);
    d3.set(2, 2, 0.5);
    CHECK(sigma2(d3) == doctest::Approx(esf3_bruteforce({2.0, -1.0, 0.5}, 2)));
}
