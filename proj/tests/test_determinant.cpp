#include "levyflow/determinant.hpp"
#include "levyflow/errors.hpp"
#include "levyflow/path_sampler.hpp"
#include "levyflow/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace levyflow;

namespace {

MatrixXd m2(double a, double b, double c, double d) {
    MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("check triplet of the zero triplet") {
    const auto c = check_characteristics(builtin_triplet("zero(3)"));
    CHECK(c.sigma_D == 0);
    CHECK(c.gamma_D == 0);
    CHECK(c.nu_D.empty());
    CHECK(c.mean_exists);
    CHECK(*c.mean == 0);
}

TEST_CASE("check triplet of standard brownian motion") {
    for (int d : {1, 2, 3, 4}) {
        const auto c = check_characteristics(builtin_triplet("standard_brownian(" + std::to_string(d) + ")"));
        CHECK(c.sigma_D == doctest::Approx(d));
        CHECK(c.gamma_D == doctest::Approx(-d / 2.0));
        CHECK(*c.mean == doctest::Approx(-d / 2.0));
    }
}

TEST_CASE("single atom pushes forward to log|det(I + a)|") {
    const MatrixXd a = m2(0.5, 0.2, 0.1, -0.3);
    const auto t = MatrixLevyTriplet::from_drift(2, {}, MatrixXd::Zero(2, 2), JumpSpec{0.7, {{1.0, a}}, std::nullopt});
    const auto c = check_characteristics(t);
    REQUIRE(c.nu_D.size() == 1);
    CHECK(c.nu_D[0].rate == doctest::Approx(0.7));
    CHECK(c.nu_D[0].value == doctest::Approx(std::log(std::abs((MatrixXd::Identity(2, 2) + a).determinant()))));

    // det(I + a) = 1 is dropped.
    const auto u = MatrixLevyTriplet::from_drift(2, {}, MatrixXd::Zero(2, 2),
                                                 JumpSpec{1.0, {{1.0, m2(1, 0, 0, -0.5)}}, std::nullopt});
    CHECK(check_characteristics(u).nu_D.empty());
}

TEST_CASE("growth mean with a unit-norm atom") {
    const MatrixXd a = m2(1, 0, 0, 0);
    // gamma_L = 0: drift0 = -a cancels the compensator.
    const auto t = MatrixLevyTriplet::from_drift(2, {}, -a, JumpSpec{1.0, {{1.0, a}}, std::nullopt});
    CHECK(t.gamma.norm() == 0);
    CHECK(det_growth_mean(t) == doctest::Approx(std::log(2.0) - 1.0));
    CHECK(det_growth_mean(builtin_triplet("sl2_conservative")) == doctest::Approx(0).epsilon(1e-14));
    CHECK(det_growth_mean(builtin_triplet("standard_brownian(2)")) == doctest::Approx(-1.0));
}

TEST_CASE("trace-free drift gives D = 1") {
    const auto t = builtin_triplet("pure_rotation");
    const auto p = sample_levy_path(t, 3.0, 0.1, 1);
    for (const auto& pt : det_closed_form(p, t)) {
        CHECK(std::abs(pt.log_abs) < 1e-14);
        CHECK(pt.sign == 1);
    }
}

TEST_CASE("closed form matches exact products on CPP + drift paths") {
    JumpSpec js{2.0, {{0.5, m2(0.4, -0.2, 0.3, 0.5)}, {0.5, m2(-1.6, 0.1, 0.2, 0.4)}}, std::nullopt};
    const auto t = MatrixLevyTriplet::from_drift(2, {}, m2(0.3, -1, 0.8, -0.6), js);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto p = sample_levy_path(t, 5.0, 0.5, seed);
        const auto exact = det_of_path(exact_cpp_exponential(p, t));
        const auto closed = det_closed_form(p, t);
        REQUIRE(exact.size() == closed.size());
        for (std::size_t k = 0; k < exact.size(); ++k) {
            CHECK(exact[k].sign == closed[k].sign);
            CHECK(std::abs(std::expm1(exact[k].log_abs - closed[k].log_abs)) < 1e-10);
        }
    }
}

TEST_CASE("closed form vs emery error shrinks with dt") {
    const auto base_t = builtin_triplet("sl2_conservative");
    const auto t = MatrixLevyTriplet::from_drift(2, base_t.sigma, m2(0.3, 0, 0, 0.1), base_t.jumps);
    std::vector<double> mse(4, 0.0);
    const std::vector<std::size_t> factors{64, 16, 4, 1};
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto base = sample_levy_path(t, 1.0, 1.0 / 4096, seed);
        const double closed = det_closed_form(base, t).back().log_abs;
        for (std::size_t k = 0; k < factors.size(); ++k) {
            const auto e = emery_exponential(coarsen(base, factors[k]), false);
            mse[k] += std::pow(log_abs_det(e.X.back()).log_abs - closed, 2);
        }
    }
    for (std::size_t k = 1; k < mse.size(); ++k) CHECK(mse[k] < mse[k - 1]);
    CHECK(std::sqrt(mse.back() / 20) < 0.05);
}

TEST_CASE("clt parameters") {
    const MatrixXd a = m2(1, 0, 0, 0);  // log det(I + a) = log 2 < 1
    const auto t = MatrixLevyTriplet::from_drift(2, MatrixXd::Identity(4, 4), MatrixXd::Zero(2, 2),
                                                 JumpSpec{1.0, {{1.0, a}}, std::nullopt});
    const auto p = det_clt_params(t, 10.0);
    CHECK(p.t2_at_1 == 0);
    CHECK(p.t2_tail_integral == 0);
    CHECK(p.t1_vanishes_beyond == doctest::Approx(std::log(2.0)));
    CHECK(p.applicable);
    CHECK(p.scale == doctest::Approx(std::sqrt(20.0)));

    const MatrixXd big = m2(9, 0, 0, 0);  // log 10 > 1
    const auto u = MatrixLevyTriplet::from_drift(2, MatrixXd::Identity(4, 4), MatrixXd::Zero(2, 2),
                                                 JumpSpec{2.0, {{1.0, big}}, std::nullopt});
    const auto q = det_clt_params(u, 1.0);
    CHECK(q.t2_at_1 == doctest::Approx(2.0));
    CHECK(q.t2_tail_integral == doctest::Approx(2.0 * (std::log(10.0) - 1.0)));
    // centering then equals the mean of log|D_1|
    CHECK(q.centering == doctest::Approx(det_growth_mean(u)));
}

TEST_CASE("SL membership") {
    CHECK(sl_membership(builtin_triplet("sl2_conservative")).member);
    CHECK(sl_membership(builtin_triplet("zero(2)")).member);
    const auto b = sl_membership(builtin_triplet("standard_brownian(2)"));
    CHECK_FALSE(b.member);
    REQUIRE_FALSE(b.failed_conditions.empty());
    CHECK(b.failed_conditions.front() == "brownian-trace");
    const auto r1 = sl_membership(builtin_triplet("rotation_rank1"));
    CHECK_FALSE(r1.member);
    CHECK(std::find(r1.failed_conditions.begin(), r1.failed_conditions.end(), "jump-det") !=
          r1.failed_conditions.end());

    // D stays 1 along sl2_conservative paths.
    const auto t = builtin_triplet("sl2_conservative");
    for (const auto& pt : det_closed_form(sample_levy_path(t, 2.0, 0.01, 8), t)) CHECK(std::abs(pt.log_abs) < 1e-10);
}

TEST_CASE("sampled log-det sources agree") {
    const auto t = builtin_triplet("nonnegative_cpp");
    const auto a = sample_log_det(t, 5.0, 5.0, 50, 3, DetSource::closed_form);
    const auto b = sample_log_det(t, 5.0, 5.0, 50, 3, DetSource::exact_product);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
    CHECK_THROWS_AS(sample_log_det(builtin_triplet("standard_brownian(2)"), 1, 0.1, 2, 1, DetSource::exact_product),
                    HasGaussianPart);
}

TEST_CASE("standard brownian log-det is gaussian with rate -d/2") {
    const auto t = builtin_triplet("standard_brownian(2)");
    const auto x = sample_log_det(t, 4.0, 1e-2, 1000, 5, DetSource::closed_form);
    const MeanSe m = mean_se(x);
    CHECK(std::abs(m.mean + 4.0) < 3 * m.se);
    CHECK(m.var == doctest::Approx(8.0).epsilon(0.15));
}
