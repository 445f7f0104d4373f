#pragma once

#include <cmath>
#include <functional>

namespace sigma2lab {

// Neumaier-compensated accumulator; grid reductions use it in a fixed index
// order so repeated runs are bit-identical.
struct Kahan {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

// 3-point Gauss-Legendre on [a, b].
inline double gauss3(const std::function<double(double)>& f, double a, double b) {
    static const double x1 = std::sqrt(3.0 / 5.0);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    return half * ((5.0 / 9.0) * f(mid - half * x1) + (8.0 / 9.0) * f(mid) +
                   (5.0 / 9.0) * f(mid + half * x1));
}

}  // namespace sigma2lab
