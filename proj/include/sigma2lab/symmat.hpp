#pragma once

#include <array>

#include "sigma2lab/vec4.hpp"

namespace sigma2lab {

// Dense symmetric 4x4 real matrix. Storage is the upper triangle in row-major
// order: (0,0)(0,1)(0,2)(0,3)(1,1)(1,2)(1,3)(2,2)(2,3)(3,3), so the
// reconstructed matrix is exactly symmetric by construction.
struct SymMat4 {
    std::array<double, 10> a{};

    static int index(int i, int j) {
        if (i > j) std::swap(i, j);
        static constexpr int offs[4] = {0, 4, 7, 9};
        return offs[i] + (j - i);
    }

    double operator()(int i, int j) const { return a[index(i, j)]; }
    void set(int i, int j, double v) { a[index(i, j)] = v; }
    void add(int i, int j, double v) { a[index(i, j)] += v; }

    static SymMat4 zero() { return SymMat4{}; }
    static SymMat4 identity() { return diagonal(1, 1, 1, 1); }
    static SymMat4 diagonal(double d0, double d1, double d2, double d3) {
        SymMat4 m;
        m.set(0, 0, d0);
        m.set(1, 1, d1);
        m.set(2, 2, d2);
        m.set(3, 3, d3);
        return m;
    }
    // v v^T rank-one matrix.
    static SymMat4 outer(const Vec4& v) {
        SymMat4 m;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) m.set(i, j, v[i] * v[j]);
        return m;
    }

    SymMat4 operator+(const SymMat4& o) const {
        SymMat4 r;
        for (int k = 0; k < 10; ++k) r.a[k] = a[k] + o.a[k];
        return r;
    }
    SymMat4 operator-(const SymMat4& o) const {
        SymMat4 r;
        for (int k = 0; k < 10; ++k) r.a[k] = a[k] - o.a[k];
        return r;
    }
    SymMat4 operator*(double c) const {
        SymMat4 r;
        for (int k = 0; k < 10; ++k) r.a[k] = c * a[k];
        return r;
    }
    SymMat4 operator-() const { return (*this) * -1.0; }

    double trace() const { return a[0] + a[4] + a[7] + a[9]; }

    Vec4 apply(const Vec4& v) const {
        Vec4 r{};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }

    // M*M; symmetric since M is.
    SymMat4 square() const {
        SymMat4 r;
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += (*this)(i, k) * (*this)(k, j);
                r.set(i, j, s);
            }
        return r;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }
};

// k-th elementary symmetric function of the eigenvalues, computed as the sum
// of k x k principal minors (an exact polynomial in the entries; no eigen
// solve involved). k must lie in 1..4.
double sigma_k(const SymMat4& m, int k);

// Ascending eigenvalues by cyclic Jacobi sweeps. Throws ConvergenceError if
// the off-diagonal mass fails to vanish within the sweep budget (does not
// happen for symmetric input).
std::array<double, 4> eigenvalues(const SymMat4& m);

struct EigenDecomp {
    std::array<double, 4> values;   // ascending
    std::array<Vec4, 4> vectors;    // columns of Q, matching values
};

EigenDecomp eigen_decompose(const SymMat4& m);

struct ConeStatus {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    bool in_gamma2_plus = false;
    bool in_gamma2_minus = false;
    bool on_boundary = false;
};

// Gamma_2^+ = {sigma1 > 0, sigma2 > 0}, Gamma_2^- = {sigma1 < 0, sigma2 > 0}.
// on_boundary: sigma2 vanishes within 1e-12 after normalizing |m|_F to 1,
// while sigma1 != 0.
ConeStatus cone_status(const SymMat4& m);

struct NewtonTensors {
    SymMat4 t1;  // -(tr H) I + H
    SymMat4 t2;  // H t1 + sigma2(-H) I
};

// Newton tensors of sigma2(-hessian) and sigma3(-hessian). Contractions:
// -t1 : H = 2 sigma2(-H) and tr(t2) = 2 sigma2(-H).
NewtonTensors newton_tensors(const SymMat4& hessian);

}  // namespace sigma2lab
