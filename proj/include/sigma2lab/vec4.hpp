#pragma once

#include <array>
#include <cmath>

namespace sigma2lab {

using Vec4 = std::array<double, 4>;
using Vec3 = std::array<double, 3>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double c, const Vec4& a) {
    return {c * a[0], c * a[1], c * a[2], c * a[3]};
}
inline double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

// Symmetric 3x3, upper triangle: (0,0)(0,1)(0,2)(1,1)(1,2)(2,2).
struct SymMat3 {
    std::array<double, 6> a{};

    static int index(int i, int j) {
        if (i > j) std::swap(i, j);
        static constexpr int offs[3] = {0, 3, 5};
        return offs[i] + (j - i);
    }
    double operator()(int i, int j) const { return a[index(i, j)]; }
    void set(int i, int j, double v) { a[index(i, j)] = v; }

    double trace() const { return a[0] + a[3] + a[5]; }

    static SymMat3 identity() {
        SymMat3 m;
        m.a = {1, 0, 0, 1, 0, 1};
        return m;
    }
};

inline double sigma1(const SymMat3& m) { return m.trace(); }

inline double sigma2(const SymMat3& m) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) s += m(i, i) * m(j, j) - m(i, j) * m(i, j);
    return s;
}

}  // namespace sigma2lab
