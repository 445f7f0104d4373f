#pragma once

#include <array>
#include <memory>
#include <random>
#include <vector>

#include "sigma2lab/symmat.hpp"
#include "sigma2lab/vec4.hpp"

namespace sigma2lab {

// Second-order data of u at a point: value, gradient, Hessian.
struct Jet2 {
    double value = 0.0;
    Vec4 gradient{};
    SymMat4 hessian{};
};

// Fully symmetric third-derivative tensor in dimension 4; stores the 20
// independent components indexed by the sorted triple (i <= j <= k).
struct Third {
    std::array<double, 20> c{};

    static int index(int i, int j, int k);
    double operator()(int i, int j, int k) const { return c[index(i, j, k)]; }
    void set(int i, int j, int k, double v) { c[index(i, j, k)] = v; }
};

// A scalar test field on R^4 with exact derivative callbacks.
class AnalyticField {
public:
    virtual ~AnalyticField() = default;
    virtual Jet2 jet(const Vec4& x) const = 0;
    virtual bool has_third() const { return false; }
    virtual Third third(const Vec4& x) const;
    double value(const Vec4& x) const { return jet(x).value; }
};

// Multivariate polynomial in 4 variables (exact jets and thirds).
class PolyField4 : public AnalyticField {
public:
    struct Monomial {
        double coef;
        std::array<int, 4> exp;
    };

    PolyField4() = default;
    explicit PolyField4(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

    static PolyField4 quadratic(const SymMat4& half_hess2, const Vec4& lin, double c0);
    // Dense random polynomial of the given total degree, coefficients
    // uniform in [-scale, scale].
    static PolyField4 random(int degree, std::mt19937& rng, double scale = 1.0);

    PolyField4 derivative(int axis) const;
    double eval(const Vec4& x) const;

    Jet2 jet(const Vec4& x) const override;
    bool has_third() const override { return true; }
    Third third(const Vec4& x) const override;

    const std::vector<Monomial>& terms() const { return terms_; }

private:
    std::vector<Monomial> terms_;
};

// u = exp(P(x)) for a polynomial P; exact jets and thirds via the chain rule.
class ExpPolyField : public AnalyticField {
public:
    explicit ExpPolyField(PolyField4 p) : p_(std::move(p)) {}

    Jet2 jet(const Vec4& x) const override;
    bool has_third() const override { return true; }
    Third third(const Vec4& x) const override;

    // exp(-|x|^2)
    static ExpPolyField gaussian();
    // exp(x^a x^b)
    static ExpPolyField exp_product(int a, int b);

private:
    PolyField4 p_;
};

// Random jet generator for identity batteries (entries uniform in
// [-scale, scale], Hessian symmetric by construction).
Jet2 random_jet(std::mt19937& rng, double scale = 1.0);
SymMat4 random_symmat(std::mt19937& rng, double scale = 1.0);

}  // namespace sigma2lab
