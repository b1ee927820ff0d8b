#pragma once

// Dense kernels shared by every module. All functions are templated on the
// Eigen expression type so they work for any real scalar.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace levyflow {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Signed logarithmic determinant: det = sign * exp(log_abs). sign == 0 for
/// an exactly singular matrix (log_abs is then -inf).
template <typename Scalar>
struct LogDet {
    Scalar log_abs;
    int sign;
};

/// log|det a| accumulated from the pivots of a partial-pivoting LU, so long
/// products never overflow. Explicit cofactor forms for d <= 3.
template <typename Derived>
LogDet<typename Derived::Scalar> log_abs_det(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    using std::abs;
    using std::log;
    if (a.rows() <= 3) {
        Scalar det;
        if (a.rows() == 1)
            det = a(0, 0);
        else if (a.rows() == 2)
            det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        else
            det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                  a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                  a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        if (det == Scalar(0)) return {-std::numeric_limits<Scalar>::infinity(), 0};
        return {log(abs(det)), det > 0 ? 1 : -1};
    }
    const Eigen::PartialPivLU<Mat<Scalar>> lu(a.eval());
    const auto& m = lu.matrixLU();
    Scalar acc = 0;
    int sign = static_cast<int>(lu.permutationP().determinant());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const Scalar u = m(i, i);
        if (u == Scalar(0)) return {-std::numeric_limits<Scalar>::infinity(), 0};
        if (u < 0) sign = -sign;
        acc += log(abs(u));
    }
    return {acc, sign};
}

/// Spectral (operator 2-) norm.
template <typename Derived>
typename Derived::Scalar op_norm(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    if (a.size() == 0) return Scalar(0);
    if (a.cols() == 1 || a.rows() == 1) return a.norm();
    Eigen::JacobiSVD<Mat<Scalar>> svd(a.eval());
    return svd.singularValues()(0);
}

/// log M(a) with M(a) = max(|a|, |a^{-1}|), computed from the singular values
/// of a (no explicit inverse). Returns +inf for singular a.
template <typename Derived>
typename Derived::Scalar log_m_value(const Eigen::MatrixBase<Derived>& a) {
    using Scalar = typename Derived::Scalar;
    using std::log;
    using std::max;
    Eigen::JacobiSVD<Mat<Scalar>> svd(a.eval());
    const auto& s = svd.singularValues();
    const Scalar smin = s(s.size() - 1);
    if (smin <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return max(log(s(0)), -log(smin));
}

/// Column-stacking vec of a square matrix.
template <typename Derived>
Vec<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& a) {
    Vec<typename Derived::Scalar> v(a.size());
    Eigen::Map<Mat<typename Derived::Scalar>>(v.data(), a.rows(), a.cols()) = a;
    return v;
}

template <typename Derived>
Mat<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v, Eigen::Index d) {
    return Eigen::Map<const Mat<typename Derived::Scalar>>(v.derived().eval().data(), d, d);
}

/// Kronecker product a (x) b.
template <typename A, typename B>
Mat<typename A::Scalar> kron(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    Mat<typename A::Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

namespace detail {

template <typename Scalar, std::size_t N>
Mat<Scalar> pade_odd_even(const Mat<Scalar>& a, const std::array<double, N>& b, Mat<Scalar>& v) {
    // Low-degree Pade: u = a * sum b_odd a^{2k}, v = sum b_even a^{2k}.
    const Eigen::Index n = a.rows();
    const Mat<Scalar> a2 = a * a;
    Mat<Scalar> power = Mat<Scalar>::Identity(n, n);
    Mat<Scalar> odd = Mat<Scalar>::Zero(n, n);
    v = Mat<Scalar>::Zero(n, n);
    for (std::size_t k = 0; 2 * k < N; ++k) {
        v += Scalar(b[2 * k]) * power;
        if (2 * k + 1 < N) odd += Scalar(b[2 * k + 1]) * power;
        power = power * a2;
    }
    return a * odd;
}

}  // namespace detail

/// Matrix exponential by scaling and squaring with diagonal Pade approximants
/// of degree 3..13 (Higham 2005 backward-error thresholds).
template <typename Derived>
Mat<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& input) {
    using Scalar = typename Derived::Scalar;
    using std::ceil;
    using std::log2;
    using std::max;
    const Mat<Scalar> a = input.eval();
    const Eigen::Index n = a.rows();
    if (n == 0) return a;
    const Scalar norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

    static constexpr std::array<double, 4> b3{120., 60., 12., 1.};
    static constexpr std::array<double, 6> b5{30240., 15120., 3360., 420., 30., 1.};
    static constexpr std::array<double, 8> b7{17297280., 8648640., 1995840., 277200.,
                                              25200.,    1512.,    56.,      1.};
    static constexpr std::array<double, 10> b9{17643225600., 8821612800., 2075673600., 302702400.,
                                               30270240.,    2162160.,    110880.,     3960.,
                                               90.,          1.};
    static constexpr std::array<double, 14> b13{
        64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
        129060195264000.,   10559470521600.,    670442572800.,     33522128640.,
        1323241920.,        40840800.,          960960.,           16380.,
        182.,               1.};

    Mat<Scalar> u, v;
    int squarings = 0;
    if (norm1 <= Scalar(1.495585217958292e-2)) {
        u = detail::pade_odd_even(a, b3, v);
    } else if (norm1 <= Scalar(2.539398330063230e-1)) {
        u = detail::pade_odd_even(a, b5, v);
    } else if (norm1 <= Scalar(9.504178996162932e-1)) {
        u = detail::pade_odd_even(a, b7, v);
    } else if (norm1 <= Scalar(2.097847961257068)) {
        u = detail::pade_odd_even(a, b9, v);
    } else {
        const Scalar theta13 = Scalar(5.371920351148152);
        squarings = max(0, static_cast<int>(ceil(log2(norm1 / theta13))));
        const Mat<Scalar> as = a / std::ldexp(Scalar(1), squarings);
        const Mat<Scalar> id = Mat<Scalar>::Identity(n, n);
        const Mat<Scalar> a2 = as * as;
        const Mat<Scalar> a4 = a2 * a2;
        const Mat<Scalar> a6 = a4 * a2;
        const auto c = [&](int k) { return Scalar(b13[static_cast<std::size_t>(k)]); };
        const Mat<Scalar> inner_u = c(13) * a6 + c(11) * a4 + c(9) * a2;
        u = as * (a6 * inner_u + c(7) * a6 + c(5) * a4 + c(3) * a2 + c(1) * id);
        const Mat<Scalar> inner_v = c(12) * a6 + c(10) * a4 + c(8) * a2;
        v = a6 * inner_v + c(6) * a6 + c(4) * a4 + c(2) * a2 + c(0) * id;
    }
    Mat<Scalar> r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = (r * r).eval();
    return r;
}

/// Scalar-vs-identity test used to skip generators without eigen-structure.
template <typename Derived>
bool is_scalar_matrix(const Eigen::MatrixBase<Derived>& a, typename Derived::Scalar tol) {
    const auto n = a.rows();
    const auto c = a.trace() / typename Derived::Scalar(n);
    return (a - c * Mat<typename Derived::Scalar>::Identity(n, n)).norm() <= tol * (1 + a.norm());
}

}  // namespace levyflow
