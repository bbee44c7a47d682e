#pragma once

// Rosenau's ancient solution on S^2, written on the cylinder chart (x, theta)
// as u(x,t)(dx^2 + dtheta^2) with u = sinh(-t)/(cosh x + cosh t), times a unit
// circle in phi. Poles x = +-inf are never evaluated; their values are limits.

#include <numbers>

#include "flowlab/tensor.hpp"

namespace flowlab::rosenau {

inline constexpr double kThetaPeriod = 4.0 * std::numbers::pi;
inline constexpr double kPhiPeriod = 2.0 * std::numbers::pi;

/// All evaluators throw DomainError unless t < 0 and x, t are finite.
double conformal_factor(double x, double t);
double scalar_curvature(double x, double t);
double pole_limit(double t);  // coth(-t), the curvature at the poles
double ricci_11(double x, double t);  // R_xx = R_thetatheta, printed
double cotton_york_23(double x, double t);
double round_point_ratio(double x, double t);

enum class DerivativePath { Analytic, FiniteDifference };

/// Coordinate tensors for the product metric diag(u, u, 1) in (x, theta, phi).
struct CoordinateTensors {
    Tensor<2> metric;
    Tensor<2> ric;
    double scalar = 0.0;
    Tensor<3> cotton;
    Tensor<2> cotton_york;
};

/// Christoffels, Ricci, Cotton and Cotton-York from x-derivatives of u up to third
/// order. Analytic uses the exact derivatives; FiniteDifference takes them from
/// fourth-order stencils of width fd_step on conformal_factor.
CoordinateTensors coordinate_cy_oracle(double x, double t, DerivativePath path = DerivativePath::Analytic,
                                       double fd_step = 1e-2);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;  // summed Gauss-Kronrod estimates
    double y_max = 0.0;           // upper limit of y = cosh x actually integrated
    double tail_bound = 0.0;      // exact integral of the omitted tail
};

/// L1 norm of C2 over S^2 x S^1 by adaptive quadrature in y = cosh x.
QuadratureResult l1_norm(double t, double rel_tol = 1e-13);

/// (8 sqrt2 pi^2 / 3) (sinh(-t) / (1 + cosh(-t)))^(3/2)
double l1_closed_form(double t);

/// The same total from the antiderivative of (y + cosh t)^(-5/2) on [1, inf).
double l1_from_antiderivative(double t);

/// |du/dt + R u| / |R u| with du/dt by Richardson-extrapolated central differences.
double ricci_flow_residual(double x, double t);

}  // namespace flowlab::rosenau
