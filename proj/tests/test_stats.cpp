#include "levyflow/rng.hpp"
#include "levyflow/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace levyflow;

TEST_CASE("normal cdf reference values") {
    CHECK(normal_cdf(0) == doctest::Approx(0.5));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-3) == doctest::Approx(0.0013498980316301).epsilon(1e-10));
}

TEST_CASE("mean and standard error") {
    const MeanSe m = mean_se({1, 2, 3, 4});
    CHECK(m.mean == doctest::Approx(2.5));
    CHECK(m.var == doctest::Approx(5.0 / 3.0));
    CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(mean_se({2, 2, 2}).se == 0);
}

TEST_CASE("ks statistic by hand") {
    // Uniform cdf, sample {0.1, 0.5, 0.9}: max over i of i/n - x, x - (i-1)/n.
    const double d = ks_statistic({0.9, 0.1, 0.5}, [](double x) { return x; });
    CHECK(d == doctest::Approx(0.2333333333333333));
}

TEST_CASE("kolmogorov tail reference values") {
    CHECK(kolmogorov_tail(1.358) == doctest::Approx(0.05).epsilon(2e-3));
    CHECK(kolmogorov_tail(1.628) == doctest::Approx(0.01).epsilon(5e-3));
    CHECK(kolmogorov_tail(0) == 1.0);
}

TEST_CASE("ks p-value is uniform-ish under the null") {
    Rng rng = make_rng(21, 0);
    std::normal_distribution<double> n;
    int rejections = 0;
    for (int r = 0; r < 200; ++r) {
        std::vector<double> x(500);
        for (auto& v : x) v = n(rng);
        if (ks_pvalue(ks_statistic(x, normal_cdf), 500) < 0.05) ++rejections;
    }
    CHECK(rejections < 25);
}

TEST_CASE("linear fit recovers an exact line") {
    const LinearFit f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.r2 == doctest::Approx(1));
    CHECK(f.slope_se == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("integrated autocorrelation time of AR(1)") {
    Rng rng = make_rng(22, 0);
    std::normal_distribution<double> n;
    const double rho = 0.8;
    std::vector<double> x(200000);
    double v = 0;
    for (auto& s : x) s = v = rho * v + n(rng);
    // tau = (1 + rho) / (1 - rho) = 9
    CHECK(integrated_autocorr_time(x) == doctest::Approx(9.0).epsilon(0.1));
    std::vector<double> iid(50000);
    for (auto& s : iid) s = n(rng);
    CHECK(integrated_autocorr_time(iid) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("quantile interpolates") {
    CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({3, 1, 2, 4}, 0.0) == 1);
    CHECK(quantile({3, 1, 2, 4}, 1.0) == 4);
}
