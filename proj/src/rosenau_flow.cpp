#include "flowlab/rosenau_flow.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "flowlab/errors.hpp"
#include "flowlab/frame_calculus.hpp"

namespace flowlab::rosenau {

namespace {

void check_domain(double x, double t)
{
    if (!std::isfinite(x) || !std::isfinite(t)) throw DomainError("Rosenau evaluators need finite x and t");
    if (!(t < 0.0)) throw DomainError("Rosenau solution is ancient: t must be negative, got " + frame::format_double(t));
}

// Value and first three x-derivatives of a field that depends on x alone.
struct Jet {
    std::array<double, 4> d{};

    static Jet constant(double v) { return {{v, 0.0, 0.0, 0.0}}; }

    Jet derivative() const { return {{d[1], d[2], d[3], std::numeric_limits<double>::quiet_NaN()}}; }

    friend Jet operator+(Jet a, const Jet& b)
    {
        for (int i = 0; i < 4; ++i) a.d[i] += b.d[i];
        return a;
    }
    friend Jet operator-(Jet a, const Jet& b)
    {
        for (int i = 0; i < 4; ++i) a.d[i] -= b.d[i];
        return a;
    }
    friend Jet operator*(double s, Jet a)
    {
        for (auto& v : a.d) v *= s;
        return a;
    }
    friend Jet operator*(const Jet& f, const Jet& g)
    {
        const auto& a = f.d;
        const auto& b = g.d;
        return {{a[0] * b[0], a[1] * b[0] + a[0] * b[1], a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
                 a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3]}};
    }
    Jet reciprocal() const
    {
        const double f = d[0], f1 = d[1], f2 = d[2], f3 = d[3];
        return {{1.0 / f, -f1 / (f * f), 2.0 * f1 * f1 / (f * f * f) - f2 / (f * f),
                 -f3 / (f * f) + 6.0 * f1 * f2 / (f * f * f) - 6.0 * f1 * f1 * f1 / (f * f * f * f)}};
    }
};

using Jet2 = std::array<std::array<Jet, 3>, 3>;

Jet d_dx(const Jet& f, std::size_t k) { return k == 0 ? f.derivative() : Jet{}; }

Jet conformal_jet(double x, double t, DerivativePath path, double h)
{
    if (path == DerivativePath::Analytic) {
        const Jet q{{std::cosh(x) + std::cosh(t), std::sinh(x), std::cosh(x), std::sinh(x)}};
        return std::sinh(-t) * q.reciprocal();
    }
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("fd_step must be positive");
    auto f = [&](int k) { return conformal_factor(x + k * h, t); };
    const double f0 = f(0), f1 = f(1), fm1 = f(-1), f2 = f(2), fm2 = f(-2), f3 = f(3), fm3 = f(-3);
    return {{f0, (-f2 + 8.0 * f1 - 8.0 * fm1 + fm2) / (12.0 * h),
             (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h),
             (-f3 + 8.0 * f2 - 13.0 * f1 + 13.0 * fm1 - 8.0 * fm2 + fm3) / (8.0 * h * h * h)}};
}

}  // namespace

double conformal_factor(double x, double t)
{
    check_domain(x, t);
    return std::sinh(-t) / (std::cosh(x) + std::cosh(t));
}

double scalar_curvature(double x, double t)
{
    check_domain(x, t);
    return (std::cosh(t) * std::cosh(x) + 1.0) / (std::sinh(-t) * (std::cosh(x) + std::cosh(t)));
}

double pole_limit(double t)
{
    check_domain(0.0, t);
    return 1.0 / std::tanh(-t);
}

double ricci_11(double x, double t)
{
    check_domain(x, t);
    const double q = std::cosh(x) + std::cosh(t);
    return (std::cosh(t) * std::cosh(x) + 1.0) / (2.0 * q * q);
}

double cotton_york_23(double x, double t)
{
    check_domain(x, t);
    const double q = std::cosh(x) + std::cosh(t);
    return std::sinh(x) * std::sinh(-t) / (4.0 * q * q);
}

double round_point_ratio(double x, double t) { return scalar_curvature(x, t) / pole_limit(t); }

CoordinateTensors coordinate_cy_oracle(double x, double t, DerivativePath path, double fd_step)
{
    check_domain(x, t);
    const Jet u = conformal_jet(x, t, path, fd_step);
    const std::array<Jet, 3> g{u, u, Jet::constant(1.0)};
    const std::array<Jet, 3> ginv{u.reciprocal(), u.reciprocal(), Jet::constant(1.0)};
    auto gij = [&](std::size_t i, std::size_t j) { return i == j ? g[i] : Jet{}; };

    // Gamma^k_ij = 1/2 g^kk (d_i g_kj + d_j g_ki - d_k g_ij)
    std::array<Jet2, 3> gamma{};
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                gamma[k][i][j] = 0.5 * (ginv[k] * (d_dx(gij(k, j), i) + d_dx(gij(k, i), j) - d_dx(gij(i, j), k)));

    // R_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik
    Jet2 ric{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            Jet acc;
            for (std::size_t k = 0; k < 3; ++k) {
                acc = acc + d_dx(gamma[k][i][j], k) - d_dx(gamma[k][i][k], j);
                for (std::size_t l = 0; l < 3; ++l)
                    acc = acc + gamma[k][k][l] * gamma[l][i][j] - gamma[k][j][l] * gamma[l][i][k];
            }
            ric[i][j] = acc;
        }
    Jet scalar;
    for (std::size_t i = 0; i < 3; ++i) scalar = scalar + ginv[i] * ric[i][i];

    CoordinateTensors out;
    out.scalar = scalar.d[0];
    for (std::size_t i = 0; i < 3; ++i) {
        out.metric(i, i) = g[i].d[0];
        for (std::size_t j = 0; j < 3; ++j) out.ric(i, j) = ric[i][j].d[0];
    }

    // nabla_k R_ij = d_k R_ij - G^l_ki R_lj - G^l_kj R_il (values only)
    Tensor<3> grad_ric;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double v = d_dx(ric[i][j], k).d[0];
                for (std::size_t l = 0; l < 3; ++l)
                    v -= gamma[l][k][i].d[0] * ric[l][j].d[0] + gamma[l][k][j].d[0] * ric[i][l].d[0];
                grad_ric(k, i, j) = v;
            }
    std::array<double, 3> grad_r{};
    for (std::size_t k = 0; k < 3; ++k) grad_r[k] = d_dx(scalar, k).d[0];

    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k)
                out.cotton(i, j, k) = grad_ric(i, j, k) - grad_ric(j, i, k) -
                                      0.25 * (grad_r[i] * out.metric(j, k) - grad_r[j] * out.metric(i, k));

    // C_ij = 1/2 g_ik eps^{klm} C_lmj, eta^{x theta phi} = +1
    const double root = std::sqrt(g[0].d[0] * g[1].d[0] * g[2].d[0]);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < 3; ++l)
                for (std::size_t m = 0; m < 3; ++m)
                    acc += frame::levi_civita(i, l, m) / root * out.cotton(l, m, j);
            out.cotton_york(i, j) = 0.5 * out.metric(i, i) * acc;
        }
    return out;
}

double l1_closed_form(double t)
{
    check_domain(0.0, t);
    const double pi = std::numbers::pi;
    return 8.0 * std::sqrt(2.0) * pi * pi / 3.0 * std::pow(std::sinh(-t) / (1.0 + std::cosh(-t)), 1.5);
}

namespace {

// 4 sqrt2 pi^2 s^(3/2) times the exact integral of (y + c)^(-5/2) over [a, b]
double power_law_integral(double t, double a, double b)
{
    const double pi = std::numbers::pi;
    const double s = std::sinh(-t), c = std::cosh(t);
    const double upper = std::isinf(b) ? 0.0 : std::pow(b + c, -1.5);
    return 4.0 * std::sqrt(2.0) * pi * pi * std::pow(s, 1.5) * (2.0 / 3.0) * (std::pow(a + c, -1.5) - upper);
}

}  // namespace

double l1_from_antiderivative(double t)
{
    check_domain(0.0, t);
    return power_law_integral(t, 1.0, std::numeric_limits<double>::infinity());
}

QuadratureResult l1_norm(double t, double rel_tol)
{
    check_domain(0.0, t);
    const double c = std::cosh(t);
    const double volume = kThetaPeriod * kPhiPeriod;

    // |C2|_h = sqrt(2) |C_23| / sqrt(u) and dmu_h = u dx dtheta dphi; fold x -> |x|
    // and substitute y = cosh x, dx = dy / sinh x.
    auto integrand = [&](double y) {
        const double x = std::acosh(y);
        const double u = conformal_factor(x, t);
        const double c23_over_sinh = cotton_york_23(x, t) / std::sinh(x);
        return 2.0 * volume * std::sqrt(2.0) * std::abs(c23_over_sinh) * std::sqrt(u);
    };

    QuadratureResult r;
    // panels doubling in y + c, until the omitted tail is below 1e-14 of the total
    double a = 1.0;
    double width = 1.0 + c;
    for (int panel = 0; panel < 200; ++panel) {
        const double b = a + width;
        double err = 0.0;
        r.value += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, rel_tol, &err);
        r.error_estimate += err;
        a = b;
        width *= 2.0;
        r.tail_bound = power_law_integral(t, a, std::numeric_limits<double>::infinity());
        if (r.tail_bound < 1e-14 * r.value) break;
    }
    r.y_max = a;
    if (!(r.error_estimate <= 1e-10 * r.value))
        throw NumericalError("Rosenau quadrature did not converge; error estimate " +
                             frame::format_double(r.error_estimate));
    return r;
}

double ricci_flow_residual(double x, double t)
{
    check_domain(x, t);
    const double h = 1e-3 * std::min(1.0, std::abs(t));
    auto central = [&](double step) {
        return (conformal_factor(x, t + step) - conformal_factor(x, t - step)) / (2.0 * step);
    };
    const double d = (4.0 * central(0.5 * h) - central(h)) / 3.0;
    const double ru = scalar_curvature(x, t) * conformal_factor(x, t);
    return std::abs(d + ru) / std::abs(ru);
}

}  // namespace flowlab::rosenau
