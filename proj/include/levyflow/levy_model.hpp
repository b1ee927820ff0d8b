#pragma once

#include "levyflow/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace levyflow {

struct JumpAtom {
    double prob = 0;
    MatrixXd mark;
};

/// Finite-activity jump measure: rate * sum_i prob_i * delta_{mark_i}.
struct JumpSpec {
    double rate = 0;
    std::vector<JumpAtom> atoms;
    std::optional<double> truncation_eps;

    bool active() const { return rate > 0 && !atoms.empty(); }
};

/// Characteristic triplet of a Levy process on d x d matrices.
///
/// sigma is the covariance of vec(L) (column stacking), so the covariance of
/// L^{(m,j)} and L^{(n,l)} sits at sigma(j*d + m, l*d + n) with 0-based indices.
struct MatrixLevyTriplet {
    int d = 1;
    MatrixXd sigma;
    MatrixXd gamma;
    std::optional<MatrixXd> drift0;
    JumpSpec jumps;
    std::string name;

    double sigma_entry(int m, int j, int n, int l) const { return sigma(j * d + m, l * d + n); }

    /// sum_i rate * p_i * a_i * 1{|vec a_i| <= 1}
    MatrixXd small_jump_compensator() const;
    /// gamma^0; derived from gamma when not stored.
    MatrixXd drift() const;
    /// E[L_1] = gamma^0 + rate * sum_i p_i a_i
    MatrixXd mean_L1() const;
    bool has_gaussian_part() const { return sigma.size() > 0 && sigma.cwiseAbs().maxCoeff() > 0; }

    /// Triplet from drift gamma^0; gamma is filled in consistently.
    static MatrixLevyTriplet from_drift(int d, const MatrixXd& sigma, const MatrixXd& drift0,
                                        JumpSpec jumps = {}, std::string name = {});
};

struct Violation {
    std::string rule;
    std::string message;
    long index = -1;
};

struct ValidationReport {
    bool valid = true;
    std::vector<Violation> violations;
};

inline constexpr double kDetTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;

ValidationReport validate(const MatrixLevyTriplet& triplet);

/// Throws ValidationError carrying the report text when invalid.
void require_valid(const MatrixLevyTriplet& triplet);

struct MomentReport {
    double epsilon = 0;
    double integral_big = 0;
    double integral_inv = 0;
    bool finite = true;
    std::optional<double> sufficient_small_jump_bound;
};

MomentReport moment_check(const MatrixLevyTriplet& triplet, double epsilon);

/// Catalog: standard_brownian(d), rotation_rank1, irrational_rotation(phi),
/// sl2_conservative, diagonal_reducible, gbm1(mu,sigma), zero(d),
/// pure_rotation, nonnegative_cpp.
MatrixLevyTriplet builtin_triplet(const std::string& name);
std::vector<std::string> builtin_names();

}  // namespace levyflow
