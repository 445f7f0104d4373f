#pragma once

#include "sigma2lab/jet.hpp"
#include "sigma2lab/symmat.hpp"
#include "sigma2lab/vec4.hpp"

namespace sigma2lab {

// A(rho,u) = -hess + rho grad grad^T - (rho/2)|grad|^2 Id.
SymMat4 assemble_A(const Jet2& jet, double rho);

// Max componentwise residual over the three scaling identities
//   A(rho, u(ax)+b) = a^2 A(rho, u)
//   A(-rho, -u)     = -A(rho, u)
//   A(rho, u)       = (1/rho) A(1, rho u)   (rho != 0 only)
// with both sides assembled from independently transformed jets.
double scaling_check(const Jet2& jet, double rho, double a, double b);

// div(|grad u|^2 grad u) = 2 grad^T hess grad + |grad|^2 lap, exact in the jet.
double div_norm2_grad(const Jet2& jet);

// Level-set frame data at a non-critical jet. e4 = nu = -grad/|grad|; the
// tangential block a_tilde is h_ab |grad| - (rho/2)|grad|^2 delta_ab with
// h the second fundamental form taken with respect to -nu.
struct FrameDecomp {
    double grad_norm = 0.0;
    Vec4 nu{};
    SymMat3 a_tilde;
    double u44 = 0.0;      // normal-normal second derivative
    Vec3 mixed{};          // u_{alpha 4}
    double mean_curvature = 0.0;
    std::array<Vec4, 3> tangent{};
};

FrameDecomp frame_decompose(const Jet2& jet, double rho, double eps_g = 1e-12);

// A in the adapted frame: [[a_tilde, -mixed],[-mixed^T, -u44 + (rho/2)g^2]].
// Orthogonally conjugate to assemble_A, so all sigma_k agree.
SymMat4 frame_reassemble(const FrameDecomp& fd, double rho);

// sigma1 of the tangential block equals H|grad| - (3 rho/2)|grad|^2.
double sigma1_a_tilde(const FrameDecomp& fd, double rho);

// |sigma2(A) - divergence form| where the right-hand side
// -1/2 d_j[(-lap delta_ij + u_ij - rho|grad|^2 delta_ij) u_j] is expanded
// with the field's third derivatives.
double divergence_residual(const AnalyticField& u, double rho, const Vec4& x);

// max_i |d_j T1_ij| and |d_j T2_ij| for the Newton tensors of the field's
// Hessian, with the outer derivative taken by a 5-point centred stencil on
// exact Hessians (nested differentiation).
double newton_divergence_residual(const AnalyticField& u, const Vec4& x, double h = 0.02);

}  // namespace sigma2lab
