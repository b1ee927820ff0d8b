#pragma once

#include "levyflow/levy_model.hpp"
#include "levyflow/path_sampler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace levyflow {

struct CheckAtom {
    double rate = 0;
    double value = 0;  // log|det(I + a)|
};

/// Scalar characteristics of log|D|.
struct CheckTriplet {
    double sigma_D = 0;
    double gamma_D = 0;
    std::vector<CheckAtom> nu_D;
    bool mean_exists = true;
    std::optional<double> mean;
};

/// sum_{m,n} sigma_{(m,m),(n,n)}
double trace_variance(const MatrixLevyTriplet& triplet);
/// sum_{m,n} sigma_{(m,n),(n,m)}
double transpose_trace(const MatrixLevyTriplet& triplet);

CheckTriplet check_characteristics(const MatrixLevyTriplet& triplet);

struct DetPoint {
    double t = 0;
    double log_abs = 0;
    int sign = 1;
};

/// D_t = exp(trace(L^c_t) - t/2 sum sigma_{(m,n),(n,m)}) prod det(I + dL_s) at every grid point.
std::vector<DetPoint> det_closed_form(const LevyPath& path, const MatrixLevyTriplet& triplet);

/// log|det X_t| of an exponential path, via LU pivots.
std::vector<DetPoint> det_of_path(const ExpPath& exp_path);

double det_growth_mean(const MatrixLevyTriplet& triplet);

struct DetCltParams {
    double centering = 0;
    double scale = 0;
    bool applicable = false;
    double t1_vanishes_beyond = 0;  // max_i |log|det(I + a_i)||
    double t2_at_1 = 0;
    double t2_tail_integral = 0;
};

DetCltParams det_clt_params(const MatrixLevyTriplet& triplet, double T);

struct SlMembership {
    bool member = true;
    std::vector<std::string> failed_conditions;  // brownian-trace, drift-trace, jump-det
};

SlMembership sl_membership(const MatrixLevyTriplet& triplet);

enum class DetSource { closed_form, emery_product, exact_product };

/// log|D_T| over n_paths independent paths (stream i of `seed`).
std::vector<double> sample_log_det(const MatrixLevyTriplet& triplet, double T, double dt, std::size_t n_paths,
                                   std::uint64_t seed, DetSource source);

void write_det_csv(const std::string& file, const std::vector<DetPoint>& series);

}  // namespace levyflow
