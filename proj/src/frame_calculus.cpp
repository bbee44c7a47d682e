#include "flowlab/frame_calculus.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "flowlab/errors.hpp"

namespace flowlab::frame {

std::string_view to_string(Geometry g)
{
    switch (g) {
    case Geometry::SU2: return "su2";
    case Geometry::IsomR2: return "isom_r2";
    case Geometry::SL2R: return "sl2r";
    case Geometry::Heisenberg: return "heisenberg";
    case Geometry::IsomR11: return "isom_r11";
    case Geometry::R3: return "r3";
    }
    return "?";
}

Geometry parse_geometry(std::string_view name)
{
    for (Geometry g : kAllGeometries)
        if (name == to_string(g)) return g;
    if (name == "isomr2" || name == "e2") return Geometry::IsomR2;
    if (name == "sl2" || name == "sl2_r") return Geometry::SL2R;
    if (name == "nil" || name == "heis") return Geometry::Heisenberg;
    if (name == "isomr11" || name == "sol") return Geometry::IsomR11;
    if (name == "flat" || name == "euclidean") return Geometry::R3;
    throw DomainError("unknown geometry '" + std::string(name) +
                      "' (expected su2, isom_r2, sl2r, heisenberg, isom_r11 or r3)");
}

StructureTriple StructureTriple::make(int lambda, int mu, int nu)
{
    const auto check = [](int v, const char* what) {
        if (v < -1 || v > 1)
            throw DomainError(std::string("structure constant ") + what + " = " + std::to_string(v) +
                              " is outside {-1, 0, 1}");
    };
    check(lambda, "lambda");
    check(mu, "mu");
    check(nu, "nu");
    if (lambda > mu)
        throw DomainError("ordering violated: lambda = " + std::to_string(lambda) + " > mu = " + std::to_string(mu));
    if (mu > nu)
        throw DomainError("ordering violated: mu = " + std::to_string(mu) + " > nu = " + std::to_string(nu));

    for (Geometry g : kAllGeometries) {
        const StructureTriple t = of(g);
        if (t.lambda == lambda && t.mu == mu && t.nu == nu) return t;
    }
    // (-1,1,1) etc. are covered above; the remaining ordered triples, e.g. (0,0,1),
    // are not among the six unimodular geometries admitted here.
    throw DomainError("triple (" + std::to_string(lambda) + "," + std::to_string(mu) + "," + std::to_string(nu) +
                      ") does not name one of the six admitted geometries");
}

StructureTriple StructureTriple::of(Geometry g)
{
    switch (g) {
    case Geometry::SU2: return {-1, -1, -1, g};
    case Geometry::IsomR2: return {-1, -1, 0, g};
    case Geometry::SL2R: return {-1, 1, 1, g};
    case Geometry::Heisenberg: return {-1, 0, 0, g};
    case Geometry::IsomR11: return {-1, 0, 1, g};
    case Geometry::R3: return {0, 0, 0, g};
    }
    throw DomainError("invalid geometry tag");
}

DiagonalMetric::DiagonalMetric(double a, double b, double c) : g_{a, b, c}
{
    static constexpr const char* names[] = {"A", "B", "C"};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::isfinite(g_[i]) || g_[i] <= 0.0)
            throw DomainError(std::string("metric component ") + names[i] + " = " + format_double(g_[i]) +
                              " must be finite and positive");
    }
    if (!std::isfinite(det()) || det() <= 0.0) throw DomainError("metric determinant is not finite and positive");
}

double DiagonalMetric::sqrt_det() const { return std::sqrt(det()); }

Frame2Tensor DiagonalMetric::as_tensor() const
{
    Frame2Tensor t;
    for (std::size_t i = 0; i < 3; ++i) t(i, i) = g_[i];
    return t;
}

Frame2Tensor DiagonalMetric::inverse_tensor() const
{
    Frame2Tensor t;
    for (std::size_t i = 0; i < 3; ++i) t(i, i) = 1.0 / g_[i];
    return t;
}

BracketTable structure_constants(const StructureTriple& triple)
{
    BracketTable c;
    c(1, 2, 0) = 2.0 * triple.lambda;
    c(2, 1, 0) = -2.0 * triple.lambda;
    c(2, 0, 1) = 2.0 * triple.mu;
    c(0, 2, 1) = -2.0 * triple.mu;
    c(0, 1, 2) = 2.0 * triple.nu;
    c(1, 0, 2) = -2.0 * triple.nu;
    return c;
}

ConnectionCoefficients connection(const DiagonalMetric& metric, const BracketTable& sc)
{
    // <[F_i,F_j],F_k> = c_ij^k g_kk
    const auto bracket = [&](std::size_t i, std::size_t j, std::size_t k) { return sc(i, j, k) * metric[k]; };

    ConnectionCoefficients conn;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                const double v = 0.5 * (bracket(i, j, k) - bracket(i, k, j) - bracket(j, k, i));
                conn.lowered(i, j, k) = v;
                conn.mixed(i, j, k) = v / metric[k];
            }
    return conn;
}

RicciResult ricci(const DiagonalMetric& metric, const BracketTable& sc)
{
    const auto conn = connection(metric, sc);
    const auto& G = conn.mixed;

    // Ric_jk = sum_i [R(F_i,F_j)F_k]^i with
    // R(F_i,F_j)F_k = (G_jk^m G_im^n - G_ik^m G_jm^n - c_ij^m G_mk^n) F_n
    RicciResult out;
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t m = 0; m < 3; ++m)
                    acc += G(j, k, m) * G(i, m, i) - G(i, k, m) * G(j, m, i) - sc(i, j, m) * G(m, k, i);
            out.ric(j, k) = acc;
        }
    for (std::size_t i = 0; i < 3; ++i) out.scalar += out.ric(i, i) * metric.inverse(i);
    return out;
}

Frame2Tensor square(const Frame2Tensor& t, const DiagonalMetric& g)
{
    Frame2Tensor out;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 3; ++k) acc += t(i, k) * g.inverse(k) * t(k, j);
            out(i, j) = acc;
        }
    return out;
}

double levi_civita(std::size_t i, std::size_t j, std::size_t k)
{
    if (i == j || j == k || i == k) return 0.0;
    // even permutations of (0,1,2)
    if ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) return 1.0;
    return -1.0;
}

EpsilonTensor epsilon(const DiagonalMetric& metric, Orientation orientation)
{
    EpsilonTensor e;
    e.orientation = static_cast<int>(orientation);
    const double s = e.orientation;
    const double root = metric.sqrt_det();
    for (std::size_t n = 0; n < Tensor<3>::size; ++n) {
        const auto idx = Tensor<3>::unflat(n);
        const double eta = levi_civita(idx[0], idx[1], idx[2]);
        e.up[n] = s * eta / root;
        e.down[n] = s * eta * root;
    }
    return e;
}

namespace {

Frame3Tensor cotton_from(const DiagonalMetric& metric, const Tensor<3>& grad_ric, const Tensor<1>& grad_scalar)
{
    Frame3Tensor c3;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                const double gjk = (j == k) ? metric[j] : 0.0;
                const double gik = (i == k) ? metric[i] : 0.0;
                c3(i, j, k) = grad_ric(i, j, k) - grad_ric(j, i, k) -
                              0.25 * (grad_scalar(i) * gjk - grad_scalar(j) * gik);
            }
    return c3;
}

Frame2Tensor cotton_york_from(const DiagonalMetric& metric, const Frame3Tensor& c3, const EpsilonTensor& eps)
{
    // metric is diagonal, so g_ik eps^{klm} reduces to k = i
    Frame2Tensor c2;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (std::size_t l = 0; l < 3; ++l)
                for (std::size_t m = 0; m < 3; ++m) acc += eps.up(i, l, m) * c3(l, m, j);
            c2(i, j) = 0.5 * metric[i] * acc;
        }
    return c2;
}

}  // namespace

FrameQuantities analyze(const DiagonalMetric& metric, const StructureTriple& triple, Orientation orientation)
{
    const auto sc = structure_constants(triple);
    const auto conn = connection(metric, sc);
    const auto rr = ricci(metric, sc);
    const auto grad_ric = covariant_derivative(rr.ric, conn);
    const auto grad_scalar = gradient_of_constant(rr.scalar);
    const auto c3 = cotton_from(metric, grad_ric, grad_scalar);
    const auto eps = epsilon(metric, orientation);
    const auto c2 = cotton_york_from(metric, c3, eps);
    return FrameQuantities{metric, triple, sc, conn, rr.ric, rr.scalar, grad_scalar, grad_ric, c3, c2, eps};
}

Frame3Tensor cotton(const DiagonalMetric& metric, const BracketTable& sc)
{
    const auto conn = connection(metric, sc);
    const auto rr = ricci(metric, sc);
    return cotton_from(metric, covariant_derivative(rr.ric, conn), gradient_of_constant(rr.scalar));
}

Frame2Tensor cotton_york(const DiagonalMetric& metric, const BracketTable& sc, Orientation orientation)
{
    return cotton_york_from(metric, cotton(metric, sc), epsilon(metric, orientation));
}

InvariantScalars invariant_scalars(const FrameQuantities& q)
{
    const auto& g = q.metric;
    InvariantScalars s;
    s.scalar_curvature = q.scalar;
    s.c2_norm_sq = norm_sq(q.c2, g);
    s.c3_norm_sq = norm_sq(q.c3, g);
    s.grad_c2_norm_sq = norm_sq(covariant_derivative(q.c2, q.conn), g);
    s.ric_dot_c2_sq = inner(q.ric, square(q.c2, g), g);

    Tensor<3> d;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                double acc = 0.0;
                for (std::size_t p = 0; p < 3; ++p) acc += q.c3(i, j, p) * g.inverse(p) * q.ric(p, k);
                d(i, j, k) = acc;
            }
    const auto div_d = divergence(d, q.conn, g);
    const auto div_c3 = divergence(q.c3, q.conn, g);
    s.ric_dot_div_d = inner(q.ric, div_d, g);
    s.ric_sq_dot_div_c3 = inner(square(q.ric, g), div_c3, g);

    const auto div_div_c3 = divergence(div_c3, q.conn, g);
    s.grad_r_dot_div_div_c3 = inner(q.grad_scalar, div_div_c3, g);

    // nabla^j nabla^i C_ijk = (div div C3)_k  versus  -C_klm R^lm
    for (std::size_t k = 0; k < 3; ++k) {
        double contracted = 0.0;
        for (std::size_t l = 0; l < 3; ++l)
            for (std::size_t m = 0; m < 3; ++m)
                contracted += q.c3(k, l, m) * g.inverse(l) * g.inverse(m) * q.ric(l, m);
        s.second_div_identity_residual =
            std::max(s.second_div_identity_residual, std::abs(div_div_c3(k) + contracted));
        s.second_div_identity_scale =
            std::max({s.second_div_identity_scale, std::abs(div_div_c3(k)), std::abs(contracted)});
    }
    return s;
}

InvariantScalars invariant_scalars(const DiagonalMetric& metric, const StructureTriple& triple)
{
    return invariant_scalars(analyze(metric, triple));
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <std::size_t R>
void dump(std::ostream& os, std::string_view name, const Tensor<R>& t)
{
    for (std::size_t n = 0; n < Tensor<R>::size; ++n) {
        os << name;
        for (auto i : Tensor<R>::unflat(n)) os << '[' << i << ']';
        os << " = " << format_double(t[n]) << '\n';
    }
}

template void dump<1>(std::ostream&, std::string_view, const Tensor<1>&);
template void dump<2>(std::ostream&, std::string_view, const Tensor<2>&);
template void dump<3>(std::ostream&, std::string_view, const Tensor<3>&);
template void dump<4>(std::ostream&, std::string_view, const Tensor<4>&);

}  // namespace flowlab::frame
