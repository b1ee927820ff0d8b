#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace levyflow {

double normal_cdf(double z);

struct MeanSe {
    double mean = 0;
    double se = 0;
    double var = 0;  // unbiased sample variance
};

/// Mean, unbiased variance and standard error, summed in index order.
MeanSe mean_se(const std::vector<double>& x);

/// sup_z |F_n(z) - cdf(z)| over the sample.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov tail P(K > x).
double kolmogorov_tail(double x);

/// KS p-value for statistic d at sample size n (Stephens' correction).
double ks_pvalue(double d, double n);

struct LinearFit {
    double intercept = 0;
    double slope = 0;
    double r2 = 0;
    double slope_se = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Integrated autocorrelation time with Sokal's adaptive window (c = 5).
double integrated_autocorr_time(const std::vector<double>& x);

/// Order statistic interpolation, q in [0,1].
double quantile(std::vector<double> x, double q);

}  // namespace levyflow
