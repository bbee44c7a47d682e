#pragma once

// Dense frame tensors in three dimensions. Components are stored row-major,
// 3^Rank doubles, with no symmetry compression.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

namespace flowlab {

constexpr std::size_t kDim = 3;

constexpr std::size_t pow3(std::size_t rank)
{
    std::size_t n = 1;
    for (std::size_t r = 0; r < rank; ++r) n *= kDim;
    return n;
}

template <std::size_t Rank>
class Tensor {
public:
    static constexpr std::size_t rank = Rank;
    static constexpr std::size_t size = pow3(Rank);
    using Index = std::array<std::size_t, Rank>;

    Tensor() { c_.fill(0.0); }

    template <typename... I>
        requires(sizeof...(I) == Rank)
    double& operator()(I... idx) { return c_[flat(Index{static_cast<std::size_t>(idx)...})]; }

    template <typename... I>
        requires(sizeof...(I) == Rank)
    double operator()(I... idx) const { return c_[flat(Index{static_cast<std::size_t>(idx)...})]; }

    double& at(const Index& idx) { return c_[flat(idx)]; }
    double at(const Index& idx) const { return c_[flat(idx)]; }

    double& operator[](std::size_t n) { return c_[n]; }
    double operator[](std::size_t n) const { return c_[n]; }

    const std::array<double, size>& data() const { return c_; }

    static constexpr std::size_t flat(const Index& idx)
    {
        std::size_t n = 0;
        for (std::size_t r = 0; r < Rank; ++r) n = n * kDim + idx[r];
        return n;
    }

    static constexpr Index unflat(std::size_t n)
    {
        Index idx{};
        for (std::size_t r = Rank; r-- > 0;) {
            idx[r] = n % kDim;
            n /= kDim;
        }
        return idx;
    }

    Tensor& operator+=(const Tensor& o)
    {
        for (std::size_t n = 0; n < size; ++n) c_[n] += o.c_[n];
        return *this;
    }
    Tensor& operator-=(const Tensor& o)
    {
        for (std::size_t n = 0; n < size; ++n) c_[n] -= o.c_[n];
        return *this;
    }
    Tensor& operator*=(double s)
    {
        for (auto& v : c_) v *= s;
        return *this;
    }

    friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
    friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
    friend Tensor operator*(Tensor a, double s) { return a *= s; }
    friend Tensor operator*(double s, Tensor a) { return a *= s; }
    friend Tensor operator-(Tensor a) { return a *= -1.0; }

    double max_abs() const
    {
        double m = 0.0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Returns a tensor with component (i0..iR) = f(i0..iR).
    static Tensor generate(const std::function<double(const Index&)>& f)
    {
        Tensor t;
        for (std::size_t n = 0; n < size; ++n) t.c_[n] = f(unflat(n));
        return t;
    }

    /// Permutes slots: result(idx) = this(idx permuted by `from`), i.e.
    /// result[i_0..i_R] = T[i_{from[0]}..i_{from[R-1]}].
    Tensor permuted(const std::array<std::size_t, Rank>& from) const
    {
        Tensor t;
        for (std::size_t n = 0; n < size; ++n) {
            const Index idx = unflat(n);
            Index src{};
            for (std::size_t r = 0; r < Rank; ++r) src[r] = idx[from[r]];
            t.c_[n] = at(src);
        }
        return t;
    }

private:
    std::array<double, size> c_;
};

using Frame2Tensor = Tensor<2>;
using Frame3Tensor = Tensor<3>;

inline double max_abs_diff(const auto& a, const auto& b)
{
    double m = 0.0;
    for (std::size_t n = 0; n < a.size; ++n) m = std::max(m, std::abs(a[n] - b[n]));
    return m;
}

}  // namespace flowlab
