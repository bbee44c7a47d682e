#pragma once

// Tensor calculus for left-invariant diagonal metrics in a Milnor frame.
//
// Conventions
//   * Frame F_1, F_2, F_3 with brackets [F_2,F_3] = 2 lambda F_1, [F_3,F_1] = 2 mu F_2,
//     [F_1,F_2] = 2 nu F_3. Indices are 0-based in code (F_1 is slot 0).
//   * Metric g = A w1(x)w1 + B w2(x)w2 + C w3(x)w3 with constant A, B, C > 0.
//   * Gamma_ijk = <nabla_{F_i} F_j, F_k>, evaluated with the Koszul formula.
//   * R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
//     Ric(Y,Z) = tr(X -> R(X,Y)Z).
//   * eps^{klm} = s eta^{klm} / sqrt(det g) with eta^{123} = 1. Orientation s = +1
//     (F_1 ^ F_2 ^ F_3 positive) reproduces the signs of the closed-form
//     Cotton-York components for all five non-flat geometries.
//   * Divergences contract the derivative slot with the first tensor slot.

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>

#include "flowlab/tensor.hpp"

namespace flowlab::frame {

enum class Geometry { SU2, IsomR2, SL2R, Heisenberg, IsomR11, R3 };

inline constexpr std::array<Geometry, 6> kAllGeometries{
    Geometry::SU2, Geometry::IsomR2, Geometry::SL2R, Geometry::Heisenberg, Geometry::IsomR11, Geometry::R3};

/// Short lowercase name used in CLI flags, CSV and JSON ("su2", "isom_r2", ...).
std::string_view to_string(Geometry g);
/// Accepts the names produced by to_string plus a few aliases; throws DomainError.
Geometry parse_geometry(std::string_view name);

/// Milnor structure constants (lambda, mu, nu), lambda <= mu <= nu, each in {-1,0,1}.
struct StructureTriple {
    int lambda = 0;
    int mu = 0;
    int nu = 0;
    Geometry geometry = Geometry::R3;

    /// Validates the triple and resolves its geometry; throws DomainError naming
    /// the offending component.
    static StructureTriple make(int lambda, int mu, int nu);
    static StructureTriple of(Geometry g);
};

/// Positive diagonal frame metric. Validated once, at construction.
class DiagonalMetric {
public:
    DiagonalMetric(double a, double b, double c);

    double A() const { return g_[0]; }
    double B() const { return g_[1]; }
    double C() const { return g_[2]; }

    double operator[](std::size_t i) const { return g_[i]; }
    double inverse(std::size_t i) const { return 1.0 / g_[i]; }
    double det() const { return g_[0] * g_[1] * g_[2]; }
    double sqrt_det() const;

    const std::array<double, 3>& components() const { return g_; }
    DiagonalMetric scaled(double s) const { return {s * g_[0], s * g_[1], s * g_[2]}; }

    Frame2Tensor as_tensor() const;
    Frame2Tensor inverse_tensor() const;

private:
    std::array<double, 3> g_;
};

/// Bracket table c(i,j,k) = c_ij^k with [F_i,F_j] = sum_k c_ij^k F_k.
using BracketTable = Tensor<3>;

BracketTable structure_constants(const StructureTriple& triple);

struct ConnectionCoefficients {
    Tensor<3> lowered;  // Gamma_ijk
    Tensor<3> mixed;    // Gamma_ij^k, so nabla_{F_i} F_j = Gamma_ij^k F_k
};

ConnectionCoefficients connection(const DiagonalMetric& metric, const BracketTable& sc);

struct RicciResult {
    Frame2Tensor ric;
    double scalar = 0.0;
};

RicciResult ricci(const DiagonalMetric& metric, const BracketTable& sc);

/// (nabla T)_{i j1..jk} = - sum_s Gamma_{i js}^m T_{j1..m..jk}; T must have
/// constant frame components. Ranks above 4 are rejected at compile time.
template <std::size_t R>
    requires(R >= 1 && R <= 4)
Tensor<R + 1> covariant_derivative(const Tensor<R>& t, const ConnectionCoefficients& conn)
{
    Tensor<R + 1> out;
    for (std::size_t n = 0; n < Tensor<R>::size; ++n) {
        const auto idx = Tensor<R>::unflat(n);
        for (std::size_t i = 0; i < kDim; ++i) {
            double acc = 0.0;
            for (std::size_t s = 0; s < R; ++s) {
                auto moved = idx;
                for (std::size_t m = 0; m < kDim; ++m) {
                    moved[s] = m;
                    acc -= conn.mixed(i, idx[s], m) * t.at(moved);
                }
            }
            out[i * Tensor<R>::size + n] = acc;
        }
    }
    return out;
}

/// Gradient of a spatially constant scalar. Always zero on a homogeneous space;
/// kept as an explicit term so scalar-gradient contributions stay visible.
inline Tensor<1> gradient_of_constant(double /*value*/) { return Tensor<1>{}; }

/// g^{ab} (nabla nabla T)_{ab...}
template <std::size_t R>
    requires(R >= 1 && R <= 3)
Tensor<R> laplacian(const Tensor<R>& t, const ConnectionCoefficients& conn, const DiagonalMetric& g)
{
    const auto dd = covariant_derivative(covariant_derivative(t, conn), conn);
    Tensor<R> out;
    for (std::size_t a = 0; a < kDim; ++a) {
        const double w = g.inverse(a);
        for (std::size_t n = 0; n < Tensor<R>::size; ++n)
            out[n] += w * dd[(a * kDim + a) * Tensor<R>::size + n];
    }
    return out;
}

/// (div T)_{j..} = g^{ab} (nabla_a T)_{b j..}
template <std::size_t R>
    requires(R >= 1 && R <= 4)
Tensor<R - 1> divergence(const Tensor<R>& t, const ConnectionCoefficients& conn, const DiagonalMetric& g)
{
    const auto d = covariant_derivative(t, conn);
    Tensor<R - 1> out;
    for (std::size_t a = 0; a < kDim; ++a) {
        const double w = g.inverse(a);
        for (std::size_t n = 0; n < Tensor<R - 1>::size; ++n)
            out[n] += w * d[(a * kDim + a) * Tensor<R - 1>::size + n];
    }
    return out;
}

/// Full contraction <S,T>_g with g^{-1} on every slot.
template <std::size_t R>
double inner(const Tensor<R>& s, const Tensor<R>& t, const DiagonalMetric& g)
{
    double acc = 0.0;
    for (std::size_t n = 0; n < Tensor<R>::size; ++n) {
        const auto idx = Tensor<R>::unflat(n);
        double w = 1.0;
        for (std::size_t r = 0; r < R; ++r) w *= g.inverse(idx[r]);
        acc += w * s[n] * t[n];
    }
    return acc;
}

template <std::size_t R>
double norm_sq(const Tensor<R>& t, const DiagonalMetric& g)
{
    return inner(t, t, g);
}

/// T^2_ij = T_ik g^{kl} T_lj
Frame2Tensor square(const Frame2Tensor& t, const DiagonalMetric& g);

enum class Orientation : int { Positive = 1, Negative = -1 };

struct EpsilonTensor {
    Tensor<3> up;    // eps^{klm}
    Tensor<3> down;  // eps_{klm}
    int orientation = 1;
};

/// Levi-Civita symbol eta with eta_012 = 1.
double levi_civita(std::size_t i, std::size_t j, std::size_t k);

EpsilonTensor epsilon(const DiagonalMetric& metric, Orientation orientation = Orientation::Positive);

/// C_ijk = nabla_i R_jk - nabla_j R_ik - 1/4 (nabla_i R g_jk - nabla_j R g_ik)
Frame3Tensor cotton(const DiagonalMetric& metric, const BracketTable& sc);

/// C_ij = 1/2 g_ik eps^{klm} C_lmj
Frame2Tensor cotton_york(const DiagonalMetric& metric, const BracketTable& sc,
                         Orientation orientation = Orientation::Positive);

/// Everything derived from one (metric, triple) pair, computed once.
struct FrameQuantities {
    DiagonalMetric metric;
    StructureTriple triple;
    BracketTable sc;
    ConnectionCoefficients conn;
    Frame2Tensor ric;
    double scalar = 0.0;
    Tensor<1> grad_scalar;  // zero on homogeneous spaces
    Tensor<3> grad_ric;     // (nabla Ric)_{kij} = nabla_k R_ij
    Frame3Tensor c3;
    Frame2Tensor c2;
    EpsilonTensor eps;
};

FrameQuantities analyze(const DiagonalMetric& metric, const StructureTriple& triple,
                        Orientation orientation = Orientation::Positive);

/// Scalars entering the evolution of the L1-norm, plus identity residuals.
struct InvariantScalars {
    double c2_norm_sq = 0.0;                  // |C2|^2
    double grad_c2_norm_sq = 0.0;             // |nabla C2|^2
    double ric_dot_c2_sq = 0.0;               // <Ric, C2^2>
    double ric_sq_dot_div_c3 = 0.0;           // <Ric^2, div C3>
    double ric_dot_div_d = 0.0;               // <Ric, div D>, D_ijk = C_ijp g^pq R_qk
    double grad_r_dot_div_div_c3 = 0.0;       // <nabla R, div div C3>, zero when R is constant
    double scalar_curvature = 0.0;            // R
    double c3_norm_sq = 0.0;                  // |C3|^2
    double second_div_identity_residual = 0.0;  // max |nabla^j nabla^i C_ijk + C_klm R^lm|
    double second_div_identity_scale = 0.0;     // max magnitude of either side
};

InvariantScalars invariant_scalars(const FrameQuantities& q);
InvariantScalars invariant_scalars(const DiagonalMetric& metric, const StructureTriple& triple);

/// Debug dump: one component per line, `name[i][j][k] = value`, 17 significant digits.
template <std::size_t R>
void dump(std::ostream& os, std::string_view name, const Tensor<R>& t);

std::string format_double(double v);

}  // namespace flowlab::frame
