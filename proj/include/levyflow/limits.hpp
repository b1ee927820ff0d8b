#pragma once

#include "levyflow/levy_model.hpp"
#include "levyflow/path_sampler.hpp"
#include "levyflow/projective.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace levyflow {

/// F(X) for the norm-like functionals of the limit theorems. All are
/// positively homogeneous of degree one in X.
struct FunctionalSpec {
    enum class Kind { op_norm, vector_norm, entry, abs_inner };

    Kind kind = Kind::op_norm;
    VectorXd y;  // vector_norm, abs_inner
    VectorXd z;  // abs_inner
    int i = 0, j = 0;  // entry, 0-based

    static FunctionalSpec op_norm();
    static FunctionalSpec vector_norm(const VectorXd& y);
    static FunctionalSpec entry(int i, int j);
    static FunctionalSpec abs_inner(const VectorXd& y, const VectorXd& z);

    void check(int d) const;
    double value(const MatrixXd& x) const;
    /// Row vector whose direction is projected (vector_norm, abs_inner).
    std::optional<VectorXd> direction_seed() const;
    std::string describe() const;
};

std::string to_string(FunctionalSpec::Kind k);
FunctionalSpec::Kind functional_kind_from_string(const std::string& s);

struct SimulationOptions {
    double dt = 1e-2;  // Emery step when a Gaussian part is present
};

/// log F(X_t) per path for each t in `times` (increasing), shared paths.
/// result[path][time]
std::vector<std::vector<double>> sample_log_functional(const MatrixLevyTriplet& triplet, const FunctionalSpec& F,
                                                       const std::vector<double>& times, std::size_t n_paths,
                                                       std::uint64_t seed, const SimulationOptions& opts = {},
                                                       std::vector<std::vector<ProjPoint>>* directions = nullptr,
                                                       std::vector<std::vector<double>>* log_delta = nullptr);

struct LyapunovEstimate {
    double lambda_hat = 0;
    double se = 0;
    double T = 0;
    std::size_t n_paths = 0;
};

LyapunovEstimate lyapunov_estimate(const MatrixLevyTriplet& triplet, const FunctionalSpec& F, double T,
                                   std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts = {});

struct CltReport {
    double lambda_hat = 0, lambda_se = 0;
    double sigma2_hat = 0, sigma2_se = 0;
    double ks_stat = 1, ks_p = 0;
    std::size_t n_paths = 0;
    double T = 0;
    bool degenerate = false;
    std::vector<double> log_delta;  // abs_inner only
};

CltReport clt_diagnostic(const MatrixLevyTriplet& triplet, const FunctionalSpec& F, double T, std::size_t n_paths,
                         std::uint64_t seed, const SimulationOptions& opts = {});

struct MomentFunctionRow {
    double s = 0;
    double value = 0;
    double se = 0;
};

struct MomentFunctionReport {
    std::vector<MomentFunctionRow> rows;
    double step = 0;
    double d1 = 0, d1_se = 0;  // Lambda'(0)
    double d2 = 0, d2_se = 0;  // Lambda''(0)
    double n = 0;
};

/// Lambda(s) = n^{-1} log E |X_n|^s with F = op_norm unless given.
MomentFunctionReport lambda_moment_function(const MatrixLevyTriplet& triplet, const std::vector<double>& s_grid,
                                            double n, std::size_t n_paths, std::uint64_t seed,
                                            const SimulationOptions& opts = {},
                                            const FunctionalSpec& F = FunctionalSpec::op_norm());

struct BerryEsseenOptions {
    std::optional<HolderFn> phi;
    std::optional<double> pi_phi;             // pi(phi), or
    const EmpiricalMeasure* measure = nullptr;  // to integrate phi
    std::optional<double> lambda, sigma;      // default: estimated per t
    std::vector<double> z_grid;               // default: exact sup over sample points
    SimulationOptions sim;
};

struct BerryEsseenRow {
    double t = 0;
    double sup_dist = 0;
    std::size_t n_paths = 0;
    double lambda_used = 0;
    double sigma_used = 0;
};

struct BerryEsseenReport {
    std::vector<BerryEsseenRow> rows;
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    double pi_phi = 1;
};

/// sup_z |E[phi(Z) 1{W <= z}] - pi(phi) Phi(z)| (phi = 1 if absent) for the
/// standardized samples W at each t.
double joint_sup_distance(const std::vector<double>& w, const std::vector<double>& phi_values, double pi_phi,
                          const std::vector<double>& z_grid = {});

BerryEsseenReport berry_esseen_curve(const MatrixLevyTriplet& triplet, const FunctionalSpec& F,
                                     const std::vector<double>& t_grid, std::size_t n_paths, std::uint64_t seed,
                                     const BerryEsseenOptions& opts = {});

struct MStatistics {
    std::vector<double> t;
    std::vector<double> M;
    std::size_t checks = 0;
    std::size_t violations = 0;      // |log |yX_t|| > log M(X_t)
    std::size_t det_violations = 0;  // |log |det X_t|| > d log M(X_t)
};

MStatistics m_statistics(const ExpPath& exp_path, const std::vector<VectorXd>& probes, double tol = 1e-9);

}  // namespace levyflow
