#include "levyflow/stats.hpp"

#include "levyflow/errors.hpp"

#include <algorithm>
#include <cmath>

namespace levyflow {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

MeanSe mean_se(const std::vector<double>& x) {
    MeanSe r;
    const std::size_t n = x.size();
    if (n == 0) return r;
    double s = 0;
    for (double v : x) s += v;
    r.mean = s / static_cast<double>(n);
    if (n < 2) return r;
    double ss = 0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.var = ss / static_cast<double>(n - 1);
    r.se = std::sqrt(r.var / static_cast<double>(n));
    return r;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InvalidArgument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return std::clamp(d, 0.0, 1.0);
}

double kolmogorov_tail(double x) {
    if (x <= 0) return 1.0;
    if (x < 1.18) {
        // small-x form converges faster
        const double pi2 = M_PI * M_PI;
        double s = 0;
        for (int k = 1; k <= 50; ++k) {
            const double j = 2.0 * k - 1.0;
            s += std::exp(-j * j * pi2 / (8.0 * x * x));
        }
        return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / x * s, 0.0, 1.0);
    }
    double s = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        s += (k % 2 == 1 ? term : -term);
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_pvalue(double d, double n) {
    const double rn = std::sqrt(n);
    return kolmogorov_tail((rn + 0.12 + 0.11 / rn) * d);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear_fit: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw InvalidArgument("linear_fit: constant abscissa");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double ssr = std::max(0.0, syy - f.slope * sxy);
    f.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
    if (x.size() > 2) f.slope_se = std::sqrt(ssr / (n - 2) / sxx);
    return f;
}

double integrated_autocorr_time(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 4) return 1.0;
    const MeanSe m = mean_se(x);
    double c0 = 0;
    for (double v : x) c0 += (v - m.mean) * (v - m.mean);
    c0 /= static_cast<double>(n);
    if (c0 <= 0) return 1.0;
    double tau = 1.0;
    for (std::size_t lag = 1; lag < n / 2; ++lag) {
        double c = 0;
        for (std::size_t i = 0; i + lag < n; ++i) c += (x[i] - m.mean) * (x[i + lag] - m.mean);
        c /= static_cast<double>(n) * c0;
        tau += 2.0 * c;
        if (static_cast<double>(lag) >= 5.0 * tau) break;
    }
    return std::max(1.0, tau);
}

double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw InvalidArgument("quantile: empty sample");
    std::sort(x.begin(), x.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

}  // namespace levyflow
