#include "levyflow/linalg.hpp"
#include "levyflow/rng.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

using namespace levyflow;

namespace {

MatrixXd random_matrix(int d, double scale, Rng& rng) {
    std::normal_distribution<double> n;
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = scale * n(rng);
    return a;
}

// Taylor series in long double after scaling by 2^-s, then squaring.
Mat<long double> taylor_expm(const MatrixXd& a) {
    const int d = static_cast<int>(a.rows());
    Mat<long double> x = a.cast<long double>();
    int s = 0;
    while (x.cwiseAbs().colwise().sum().maxCoeff() > 0.25L) {
        x /= 2;
        ++s;
    }
    Mat<long double> sum = Mat<long double>::Identity(d, d);
    Mat<long double> term = Mat<long double>::Identity(d, d);
    for (int k = 1; k < 30; ++k) {
        term = (term * x / static_cast<long double>(k)).eval();
        sum += term;
    }
    for (int k = 0; k < s; ++k) sum = (sum * sum).eval();
    return sum;
}

}  // namespace

TEST_CASE("expm matches a long double Taylor oracle across Pade orders") {
    Rng rng = make_rng(11, 0);
    for (double scale : {1e-3, 0.05, 0.3, 0.8, 1.5, 4.0, 20.0}) {
        for (int d : {1, 2, 3, 4}) {
            const MatrixXd a = random_matrix(d, scale / d, rng);
            const MatrixXd e = expm(a);
            const MatrixXd ref = taylor_expm(a).cast<double>();
            CHECK((e - ref).norm() <= 1e-12 * ref.norm());
        }
    }
}

TEST_CASE("expm agrees with the Eigen unsupported implementation") {
    Rng rng = make_rng(12, 0);
    for (int k = 0; k < 20; ++k) {
        const MatrixXd a = random_matrix(3, 0.7, rng);
        const MatrixXd ref = a.exp();
        CHECK((expm(a) - ref).norm() <= 1e-12 * ref.norm());
    }
}

TEST_CASE("expm closed forms") {
    MatrixXd j(2, 2);
    j << 0, -1, 1, 0;
    const MatrixXd r = expm(j * (EIGEN_PI / 2));
    MatrixXd rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK((r - rot).norm() < 1e-14);
    CHECK((expm(MatrixXd::Zero(3, 3)) - MatrixXd::Identity(3, 3)).norm() == 0);
    const Mat<float> f = expm(Mat<float>::Identity(2, 2));
    CHECK(f(0, 0) == doctest::Approx(std::exp(1.0f)).epsilon(1e-6));
}

TEST_CASE("log_abs_det matches the determinant") {
    Rng rng = make_rng(13, 0);
    for (int d = 1; d <= 6; ++d) {
        const MatrixXd a = random_matrix(d, 1.0, rng);
        const double det = a.determinant();
        const auto ld = log_abs_det(a);
        CHECK(ld.sign == (det > 0 ? 1 : -1));
        CHECK(ld.log_abs == doctest::Approx(std::log(std::abs(det))).epsilon(1e-12));
    }
    const auto z = log_abs_det(MatrixXd::Zero(4, 4));
    CHECK(z.sign == 0);
    CHECK(std::isinf(z.log_abs));
}

TEST_CASE("norms and M value") {
    MatrixXd a(2, 2);
    a << 2, 0, 0, 0.5;
    CHECK(op_norm(a) == doctest::Approx(2.0));
    CHECK(std::exp(log_m_value(a)) == doctest::Approx(2.0));
    CHECK(log_m_value(MatrixXd::Identity(3, 3)) == doctest::Approx(0.0));
    CHECK(std::isinf(log_m_value(MatrixXd::Zero(2, 2))));
}

TEST_CASE("vec, unvec and kron satisfy vec(AXB) = (B^T kron A) vec X") {
    Rng rng = make_rng(14, 0);
    const MatrixXd a = random_matrix(3, 1, rng), x = random_matrix(3, 1, rng), b = random_matrix(3, 1, rng);
    const VectorXd lhs = vec(MatrixXd(a * x * b));
    const VectorXd rhs = kron(b.transpose(), a) * vec(x);
    CHECK((lhs - rhs).norm() < 1e-12);
    CHECK((unvec(vec(x), 3) - x).norm() == 0);
    CHECK(vec(x)(1) == x(1, 0));
}

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a = make_rng(5, 3), b = make_rng(5, 3), c = make_rng(5, 4);
    const auto va = a(), vb = b(), vc = c();
    CHECK(va == vb);
    CHECK(va != vc);
}
