#include "sigma2lab/symmat.hpp"

#include <algorithm>
#include <cmath>

#include "sigma2lab/errors.hpp"

namespace sigma2lab {

namespace {

double minor2(const SymMat4& m, int i, int j) {
    return m(i, i) * m(j, j) - m(i, j) * m(i, j);
}

double det3(const SymMat4& m, int i, int j, int k) {
    return m(i, i) * (m(j, j) * m(k, k) - m(j, k) * m(j, k)) -
           m(i, j) * (m(i, j) * m(k, k) - m(j, k) * m(i, k)) +
           m(i, k) * (m(i, j) * m(j, k) - m(j, j) * m(i, k));
}

double det4(const SymMat4& m) {
    // Cofactor expansion along the first row against 3x3 determinants.
    double d = 0.0;
    const int rows[3] = {1, 2, 3};
    for (int c = 0; c < 4; ++c) {
        int cols[3];
        int n = 0;
        for (int cc = 0; cc < 4; ++cc)
            if (cc != c) cols[n++] = cc;
        double sub = 0.0;
        const int r0 = rows[0], r1 = rows[1], r2 = rows[2];
        sub = m(r0, cols[0]) * (m(r1, cols[1]) * m(r2, cols[2]) - m(r1, cols[2]) * m(r2, cols[1])) -
              m(r0, cols[1]) * (m(r1, cols[0]) * m(r2, cols[2]) - m(r1, cols[2]) * m(r2, cols[0])) +
              m(r0, cols[2]) * (m(r1, cols[0]) * m(r2, cols[1]) - m(r1, cols[1]) * m(r2, cols[0]));
        d += ((c % 2 == 0) ? 1.0 : -1.0) * m(0, c) * sub;
    }
    return d;
}

}  // namespace

double sigma_k(const SymMat4& m, int k) {
    switch (k) {
        case 1:
            return m.trace();
        case 2: {
            double s = 0.0;
            for (int i = 0; i < 4; ++i)
                for (int j = i + 1; j < 4; ++j) s += minor2(m, i, j);
            return s;
        }
        case 3:
            return det3(m, 0, 1, 2) + det3(m, 0, 1, 3) + det3(m, 0, 2, 3) + det3(m, 1, 2, 3);
        case 4:
            return det4(m);
        default:
            throw Error("sigma_k: k must be in 1..4");
    }
}

EigenDecomp eigen_decompose(const SymMat4& m) {
    double w[4][4], q[4][4];
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            w[i][j] = m(i, j);
            q[i][j] = (i == j) ? 1.0 : 0.0;
        }

    const int max_sweeps = 30;
    const double scale = std::max(m.frobenius_norm(), 1e-300);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 4; ++p)
            for (int r = p + 1; r < 4; ++r) off += w[p][r] * w[p][r];
        if (std::sqrt(off) <= 1e-15 * scale) {
            EigenDecomp ed;
            int order[4] = {0, 1, 2, 3};
            std::sort(order, order + 4, [&](int a, int b) { return w[a][a] < w[b][b]; });
            for (int k = 0; k < 4; ++k) {
                ed.values[k] = w[order[k]][order[k]];
                for (int i = 0; i < 4; ++i) ed.vectors[k][i] = q[i][order[k]];
            }
            return ed;
        }
        for (int p = 0; p < 4; ++p)
            for (int r = p + 1; r < 4; ++r) {
                if (w[p][r] == 0.0) continue;
                const double theta = (w[r][r] - w[p][p]) / (2.0 * w[p][r]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int i = 0; i < 4; ++i) {
                    const double wip = w[i][p], wir = w[i][r];
                    w[i][p] = c * wip - s * wir;
                    w[i][r] = s * wip + c * wir;
                }
                for (int i = 0; i < 4; ++i) {
                    const double wpi = w[p][i], wri = w[r][i];
                    w[p][i] = c * wpi - s * wri;
                    w[r][i] = s * wpi + c * wri;
                }
                for (int i = 0; i < 4; ++i) {
                    const double qip = q[i][p], qir = q[i][r];
                    q[i][p] = c * qip - s * qir;
                    q[i][r] = s * qip + c * qir;
                }
            }
    }
    throw ConvergenceError("eigen_decompose: Jacobi sweep budget exhausted");
}

std::array<double, 4> eigenvalues(const SymMat4& m) { return eigen_decompose(m).values; }

ConeStatus cone_status(const SymMat4& m) {
    ConeStatus st;
    st.sigma1 = sigma_k(m, 1);
    st.sigma2 = sigma_k(m, 2);
    st.in_gamma2_plus = st.sigma1 > 0.0 && st.sigma2 > 0.0;
    st.in_gamma2_minus = st.sigma1 < 0.0 && st.sigma2 > 0.0;
    const double nrm = m.frobenius_norm();
    if (nrm > 0.0) {
        // sigma2 scales quadratically; band the boundary on the normalized
        // matrix since the cone itself is scale invariant.
        const double s2_hat = st.sigma2 / (nrm * nrm);
        if (std::abs(s2_hat) <= 1e-12 && st.sigma1 != 0.0) {
            st.on_boundary = true;
            st.in_gamma2_plus = false;
            st.in_gamma2_minus = false;
        }
    }
    return st;
}

NewtonTensors newton_tensors(const SymMat4& hessian) {
    NewtonTensors nt;
    const double lap = hessian.trace();
    nt.t1 = SymMat4::identity() * (-lap) + hessian;
    // H*t1 = -lap*H + H^2 stays symmetric (t1 is a polynomial in H).
    nt.t2 = hessian * (-lap) + hessian.square() +
            SymMat4::identity() * sigma_k(-hessian, 2);
    return nt;
}

}  // namespace sigma2lab
