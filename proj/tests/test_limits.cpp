#include "levyflow/errors.hpp"
#include "levyflow/limits.hpp"
#include "levyflow/stats.hpp"

#include <doctest.h>

#include <cmath>

using namespace levyflow;

namespace {

VectorXd e1() { return VectorXd::Unit(2, 0); }

}  // namespace

TEST_CASE("functional values") {
    MatrixXd x(2, 2);
    x << 3, 0, 4, -2;
    CHECK(FunctionalSpec::vector_norm(e1()).value(x) == doctest::Approx(3));
    CHECK(FunctionalSpec::entry(1, 1).value(x) == doctest::Approx(2));
    CHECK(FunctionalSpec::abs_inner(VectorXd::Unit(2, 1), VectorXd::Unit(2, 0)).value(x) == doctest::Approx(4));
    CHECK(FunctionalSpec::op_norm().value(x) == doctest::Approx(op_norm(x)));
    CHECK_THROWS_AS(FunctionalSpec::vector_norm(VectorXd::Ones(2)).check(2), InvalidArgument);
    CHECK_THROWS_AS(FunctionalSpec::entry(2, 0).check(2), InvalidArgument);
    for (auto k : {FunctionalSpec::Kind::op_norm, FunctionalSpec::Kind::vector_norm, FunctionalSpec::Kind::entry,
                   FunctionalSpec::Kind::abs_inner})
        CHECK(functional_kind_from_string(to_string(k)) == k);
}

TEST_CASE("gbm lyapunov exponent") {
    const auto t = builtin_triplet("gbm1(0.1, 0.2)");
    const auto est = lyapunov_estimate(t, FunctionalSpec::op_norm(), 20.0, 1000, 1);
    CHECK(std::abs(est.lambda_hat - 0.08) <= 3 * est.se);
    CHECK_THROWS_AS(lyapunov_estimate(t, FunctionalSpec::entry(0, 0), 1.0, 10, 1), InvalidArgument);
}

TEST_CASE("deterministic scalar growth") {
    const auto t = MatrixLevyTriplet::from_drift(2, {}, 0.3 * MatrixXd::Identity(2, 2));
    const auto est = lyapunov_estimate(t, FunctionalSpec::op_norm(), 10.0, 8, 1);
    CHECK(est.lambda_hat == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(est.se == 0);
}

TEST_CASE("brownian lyapunov exponent across estimators") {
    const auto bm = builtin_triplet("standard_brownian(2)");
    const auto est = lyapunov_estimate(bm, FunctionalSpec::op_norm(), 10.0, 800, 2, {0.02});
    const auto mf = lambda_moment_function(bm, {-0.1, 0.1}, 10.0, 800, 3, {0.02});
    CHECK(std::abs(est.lambda_hat - mf.d1) <= 3 * std::hypot(est.se, mf.d1_se));

    const auto v = lyapunov_estimate(bm, FunctionalSpec::vector_norm(e1()), 10.0, 2000, 4, {0.05});
    // log|y X_t| is exactly N(0, t) for d = 2.
    CHECK(std::abs(v.lambda_hat) <= 3 * v.se);
}

TEST_CASE("gbm clt is exactly normal") {
    const auto r = clt_diagnostic(builtin_triplet("gbm1(0.1, 0.2)"), FunctionalSpec::op_norm(), 50.0, 2000, 7);
    CHECK(r.ks_p > 0.01);
    CHECK_FALSE(r.degenerate);
    CHECK(std::abs(r.sigma2_hat - 0.04) <= 3 * r.sigma2_se);
}

TEST_CASE("pure rotation is degenerate") {
    const auto r = clt_diagnostic(builtin_triplet("pure_rotation"), FunctionalSpec::op_norm(), 20.0, 50, 1);
    CHECK(r.degenerate);
}

TEST_CASE("rotation_rank1 entry clt") {
    const auto r = clt_diagnostic(builtin_triplet("rotation_rank1"), FunctionalSpec::entry(0, 0), 40.0, 1000, 5);
    CHECK_FALSE(r.degenerate);
    CHECK(r.ks_p > 0.01);
}

TEST_CASE("abs_inner diagnostic exposes the delta term") {
    const auto r = clt_diagnostic(builtin_triplet("rotation_rank1"),
                                  FunctionalSpec::abs_inner(e1(), VectorXd::Unit(2, 1)), 10.0, 100, 6);
    CHECK(r.log_delta.size() == 100);
    for (double v : r.log_delta) CHECK(v <= 1e-12);
}

TEST_CASE("moment function") {
    const auto t = builtin_triplet("gbm1(0.1, 0.2)");
    const std::vector<double> s{-0.2, -0.1, 0.0, 0.1, 0.2};
    const auto r = lambda_moment_function(t, s, 10.0, 4000, 8);
    REQUIRE(r.rows.size() == 5);
    CHECK(r.rows[2].value == 0);
    for (const auto& row : r.rows) {
        const double exact = row.s * 0.08 + row.s * row.s * 0.02;
        CHECK(std::abs(row.value - exact) <= 3 * row.se + 1e-14);
    }
    for (std::size_t k = 1; k + 1 < r.rows.size(); ++k)
        CHECK(r.rows[k].value <= 0.5 * (r.rows[k - 1].value + r.rows[k + 1].value) + 1e-12);
    CHECK(std::abs(r.d1 - 0.08) <= 3 * r.d1_se);
    CHECK(std::abs(r.d2 - 0.04) <= 3 * r.d2_se);
}

TEST_CASE("joint statistic with phi = 1 is the plain sup distance") {
    Rng rng = make_rng(3, 0);
    std::normal_distribution<double> n;
    std::vector<double> w(500);
    for (auto& v : w) v = n(rng);
    const double ks = ks_statistic(w, normal_cdf);
    CHECK(joint_sup_distance(w, {}, 1.0) == doctest::Approx(ks).epsilon(1e-12));
    CHECK(joint_sup_distance(w, std::vector<double>(500, 1.0), 1.0) == doctest::Approx(ks).epsilon(1e-12));
    CHECK(joint_sup_distance(w, {}, 1.0, {-1, 0, 1}) <= ks + 1e-15);
}

TEST_CASE("berry esseen options") {
    const auto bm = builtin_triplet("standard_brownian(2)");
    BerryEsseenOptions o;
    o.phi = cos2theta_fn();
    CHECK_THROWS_AS(berry_esseen_curve(bm, FunctionalSpec::vector_norm(e1()), {1, 2}, 10, 1, o),
                    RequiresInvariantMeasure);
    o.pi_phi = 0.0;
    CHECK_THROWS_AS(berry_esseen_curve(bm, FunctionalSpec::op_norm(), {1, 2}, 10, 1, o), InvalidArgument);
    o.sim.dt = 0.1;
    const auto r = berry_esseen_curve(bm, FunctionalSpec::vector_norm(e1()), {1, 2, 4}, 200, 1, o);
    CHECK(r.rows.size() == 3);

    const auto g = berry_esseen_curve(builtin_triplet("gbm1(0.1, 0.2)"), FunctionalSpec::op_norm(), {1, 4, 16},
                                      2000, 2);
    for (const auto& row : g.rows) CHECK(row.sup_dist < 1.63 / std::sqrt(2000.0));
}

TEST_CASE("M statistics") {
    ExpPath id;
    id.d = 2;
    id.grid = {0, 1};
    id.X = {MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2)};
    const auto a = m_statistics(id, {e1()});
    CHECK(a.M[1] == doctest::Approx(1));
    CHECK(a.violations == 0);

    ExpPath dg = id;
    dg.X[1] = VectorXd((VectorXd(2) << 2, 0.5).finished()).asDiagonal();
    CHECK(m_statistics(dg, {e1()}).M[1] == doctest::Approx(2));

    Rng rng = make_rng(5, 0);
    std::vector<VectorXd> probes;
    for (int k = 0; k < 10; ++k) probes.push_back(sample_uniform_point(2, rng).v);
    for (const char* name : {"standard_brownian(2)", "rotation_rank1", "sl2_conservative", "nonnegative_cpp"}) {
        const auto t = builtin_triplet(name);
        const auto p = sample_levy_path(t, 5.0, 0.01, 9);
        const auto e = t.has_gaussian_part() ? emery_exponential(p) : exact_cpp_exponential(p, t, true);
        const auto m = m_statistics(e, probes);
        CHECK(m.violations == 0);
        CHECK(m.det_violations == 0);
    }
}
