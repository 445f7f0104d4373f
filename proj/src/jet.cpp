#include "sigma2lab/jet.hpp"

#include <algorithm>
#include <cmath>

#include "sigma2lab/errors.hpp"

namespace sigma2lab {

int Third::index(int i, int j, int k) {
    int t[3] = {i, j, k};
    std::sort(t, t + 3);
    // Rank of the sorted triple (a<=b<=c) among all multisets of {0..3}^3.
    static int lut[4][4][4];
    static bool init = [] {
        int n = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b)
                for (int c = b; c < 4; ++c) lut[a][b][c] = n++;
        return true;
    }();
    (void)init;
    return lut[t[0]][t[1]][t[2]];
}

Third AnalyticField::third(const Vec4&) const {
    throw Error("analytic field does not provide third derivatives");
}

PolyField4 PolyField4::quadratic(const SymMat4& half_hess2, const Vec4& lin, double c0) {
    // u = x^T half_hess2 x + lin.x + c0 (so hessian = 2*half_hess2)
    std::vector<Monomial> t;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            double c = half_hess2(i, j) * (i == j ? 1.0 : 2.0);
            if (c == 0.0) continue;
            std::array<int, 4> e{};
            e[i] += 1;
            e[j] += 1;
            t.push_back({c, e});
        }
    for (int i = 0; i < 4; ++i) {
        if (lin[i] == 0.0) continue;
        std::array<int, 4> e{};
        e[i] = 1;
        t.push_back({lin[i], e});
    }
    if (c0 != 0.0) t.push_back({c0, {0, 0, 0, 0}});
    return PolyField4(std::move(t));
}

PolyField4 PolyField4::random(int degree, std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<Monomial> t;
    for (int e0 = 0; e0 <= degree; ++e0)
        for (int e1 = 0; e1 + e0 <= degree; ++e1)
            for (int e2 = 0; e2 + e1 + e0 <= degree; ++e2)
                for (int e3 = 0; e3 + e2 + e1 + e0 <= degree; ++e3)
                    t.push_back({dist(rng), {e0, e1, e2, e3}});
    return PolyField4(std::move(t));
}

PolyField4 PolyField4::derivative(int axis) const {
    std::vector<Monomial> t;
    for (const auto& m : terms_) {
        if (m.exp[axis] == 0) continue;
        Monomial d = m;
        d.coef *= m.exp[axis];
        d.exp[axis] -= 1;
        t.push_back(d);
    }
    return PolyField4(std::move(t));
}

double PolyField4::eval(const Vec4& x) const {
    double s = 0.0;
    for (const auto& m : terms_) {
        double v = m.coef;
        for (int a = 0; a < 4; ++a)
            for (int e = 0; e < m.exp[a]; ++e) v *= x[a];
        s += v;
    }
    return s;
}

Jet2 PolyField4::jet(const Vec4& x) const {
    Jet2 j;
    j.value = eval(x);
    for (int a = 0; a < 4; ++a) j.gradient[a] = derivative(a).eval(x);
    for (int a = 0; a < 4; ++a) {
        PolyField4 da = derivative(a);
        for (int b = a; b < 4; ++b) j.hessian.set(a, b, da.derivative(b).eval(x));
    }
    return j;
}

Third PolyField4::third(const Vec4& x) const {
    Third t;
    for (int a = 0; a < 4; ++a) {
        PolyField4 da = derivative(a);
        for (int b = a; b < 4; ++b) {
            PolyField4 dab = da.derivative(b);
            for (int c = b; c < 4; ++c) t.set(a, b, c, dab.derivative(c).eval(x));
        }
    }
    return t;
}

Jet2 ExpPolyField::jet(const Vec4& x) const {
    const Jet2 pj = p_.jet(x);
    Jet2 j;
    j.value = std::exp(pj.value);
    for (int a = 0; a < 4; ++a) j.gradient[a] = pj.gradient[a] * j.value;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b)
            j.hessian.set(a, b, (pj.hessian(a, b) + pj.gradient[a] * pj.gradient[b]) * j.value);
    return j;
}

Third ExpPolyField::third(const Vec4& x) const {
    const Jet2 pj = p_.jet(x);
    const Third pt = p_.third(x);
    const double u = std::exp(pj.value);
    Third t;
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b)
            for (int c = b; c < 4; ++c) {
                const double v = pt(a, b, c) + pj.hessian(a, b) * pj.gradient[c] +
                                 pj.hessian(a, c) * pj.gradient[b] +
                                 pj.hessian(b, c) * pj.gradient[a] +
                                 pj.gradient[a] * pj.gradient[b] * pj.gradient[c];
                t.set(a, b, c, v * u);
            }
    return t;
}

ExpPolyField ExpPolyField::gaussian() {
    std::vector<PolyField4::Monomial> t;
    for (int a = 0; a < 4; ++a) {
        std::array<int, 4> e{};
        e[a] = 2;
        t.push_back({-1.0, e});
    }
    return ExpPolyField(PolyField4(std::move(t)));
}

ExpPolyField ExpPolyField::exp_product(int a, int b) {
    std::array<int, 4> e{};
    e[a] += 1;
    e[b] += 1;
    return ExpPolyField(PolyField4({{1.0, e}}));
}

Jet2 random_jet(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Jet2 j;
    j.value = dist(rng);
    for (int a = 0; a < 4; ++a) j.gradient[a] = dist(rng);
    j.hessian = random_symmat(rng, scale);
    return j;
}

SymMat4 random_symmat(std::mt19937& rng, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    SymMat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) m.set(i, j, dist(rng));
    return m;
}

}  // namespace sigma2lab
