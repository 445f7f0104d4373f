#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "sigma2lab/errors.hpp"

namespace sigma2lab {

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) for small fixed-size
// systems. Steps never pass the requested target; an optional reject
// predicate forces step halving so trajectories stop cleanly at barriers
// (used for the cone boundary in the radial solver).
template <int N>
class Rk45 {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;

    Rk45(Rhs rhs, double rtol, double atol) : rhs_(std::move(rhs)), rtol_(rtol), atol_(atol) {}

    void set_reject(std::function<bool(double, const State&)> pred) { reject_ = std::move(pred); }

    // Advance (s, y) to s_target (either direction). Returns false if the
    // reject predicate pinned the trajectory before the target.
    bool advance(double& s, State& y, double s_target) {
        const double dir = (s_target >= s) ? 1.0 : -1.0;
        if (h_ == 0.0 || h_ * dir < 0.0) h_ = dir * 1e-4;
        int halvings_at_barrier = 0;
        while (dir * (s_target - s) > 1e-14 * (1.0 + std::abs(s))) {
            double h = h_;
            if (dir * (s + h - s_target) > 0.0) h = s_target - s;
            State y_new;
            double err = step(s, y, h, y_new);
            if (err > 1.0) {
                h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (std::abs(h_) < 1e-15 * (1.0 + std::abs(s)))
                    throw ConvergenceError("rk45: step size underflow");
                continue;
            }
            if (reject_ && reject_(s + h, y_new)) {
                if (std::abs(h) < 1e-13 * (1.0 + std::abs(s)) || ++halvings_at_barrier > 200)
                    return false;
                h_ = 0.5 * h;
                continue;
            }
            s += h;
            y = y_new;
            const double grow = (err <= 1e-30) ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
            h_ = h * std::max(0.2, grow);
        }
        s = s_target;
        return true;
    }

    void reset_step() { h_ = 0.0; }

private:
    // One trial step; returns the scaled error estimate.
    double step(double s, const State& y, double h, State& out) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        const State k1 = rhs_(s, y);
        State t;
        for (int i = 0; i < N; ++i) t[i] = y[i] + h * a21 * k1[i];
        const State k2 = rhs_(s + c2 * h, t);
        for (int i = 0; i < N; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        const State k3 = rhs_(s + c3 * h, t);
        for (int i = 0; i < N; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        const State k4 = rhs_(s + c4 * h, t);
        for (int i = 0; i < N; ++i)
            t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        const State k5 = rhs_(s + c5 * h, t);
        for (int i = 0; i < N; ++i)
            t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        const State k6 = rhs_(s + h, t);
        for (int i = 0; i < N; ++i)
            out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        const State k7 = rhs_(s + h, out);

        double err = 0.0;
        for (int i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                  e7 * k7[i]);
            const double sc = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(out[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        return err;
    }

    Rhs rhs_;
    double rtol_, atol_;
    double h_ = 0.0;
    std::function<bool(double, const State&)> reject_;
};

}  // namespace sigma2lab
