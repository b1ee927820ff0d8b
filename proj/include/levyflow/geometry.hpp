#pragma once

#include "levyflow/levy_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace levyflow {

/// Simple dominant eigenvalue, real, with |l1| - |l2| > tol |l1|.
bool is_proximal(const MatrixXd& a, double tol = 1e-9);

enum class IpStatus { certified, falsified_irreducibility, unknown };
enum class IpRoute { brownian_full_rank, cpp_semigroup, truncated_semigroup, search };

std::string to_string(IpStatus s);
std::string to_string(IpRoute r);

/// Proper subspace acting on row vectors: a line R*v or (d = 3) the plane v^perp.
struct Subspace {
    enum class Kind { line, plane };
    Kind kind = Kind::line;
    VectorXd v;
};

struct IpCertificate {
    IpStatus status = IpStatus::unknown;
    IpRoute route = IpRoute::search;
    bool proximal_found = false;
    std::string irreducibility;  // certified | falsified | unknown, plus reason
    std::vector<MatrixXd> generators;
    std::vector<std::string> generator_labels;
    std::optional<std::vector<std::size_t>> witness;  // word over generators
    std::optional<std::vector<Subspace>> counterexample;

    /// Product of the witness word.
    MatrixXd witness_matrix() const;
};

IpCertificate ip_certify(const MatrixLevyTriplet& triplet, std::size_t search_depth = 3,
                         std::size_t n_samples = 2000, std::uint64_t seed = 1);

/// f on d x d matrices with its gradient (d x d, df/dx_ij) and Hessian in
/// vec coordinates (d^2 x d^2).
struct SmoothTestFunction {
    std::function<double(const MatrixXd&)> value;
    std::function<MatrixXd(const MatrixXd&)> gradient;
    std::function<MatrixXd(const MatrixXd&)> hessian;
    std::string name;
};

SmoothTestFunction linear_test_function(const MatrixXd& c);
/// 1/2 vec(x)' S vec(x) + <c, x>
SmoothTestFunction quadratic_test_function(const MatrixXd& s, const MatrixXd& c);
/// exp(-|x - center|_F^2 / (2 width^2))
SmoothTestFunction bump_test_function(const MatrixXd& center, double width);

SmoothTestFunction combine(double alpha, const SmoothTestFunction& f, double beta, const SmoothTestFunction& g);

/// Throws InconsistentDerivatives if gradient or Hessian disagree with central
/// differences at x beyond 1e-4 relative.
void check_derivatives(const SmoothTestFunction& f, const MatrixXd& x);

/// A f(x) with the jump integral as an exact atom sum.
double generator_apply(const MatrixLevyTriplet& triplet, const SmoothTestFunction& f, const MatrixXd& x,
                       bool spot_check = true);

struct GeneratorCheckRow {
    double h = 0;
    double quotient = 0;
    double se = 0;
    double generator = 0;
    double z = 0;
    double abs_error = 0;
};

/// (E f(x X_h) - f(x)) / h against A f(x); X_h uses `substeps` cells.
std::vector<GeneratorCheckRow> generator_mc_check(const MatrixLevyTriplet& triplet, const SmoothTestFunction& f,
                                                  const MatrixXd& x, const std::vector<double>& h_grid,
                                                  std::size_t n_paths, std::uint64_t seed, int substeps = 4);

}  // namespace levyflow
