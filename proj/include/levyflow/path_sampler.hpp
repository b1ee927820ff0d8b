#pragma once

#include "levyflow/levy_model.hpp"
#include "levyflow/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace levyflow {

struct JumpEvent {
    double time = 0;
    MatrixXd mark;
    long atom = -1;  // index into the generating JumpSpec, -1 if unknown
};

/// Sampled trajectory of L: continuous (Brownian + drift) increments per grid
/// cell plus explicit jump events.
struct LevyPath {
    int d = 1;
    std::vector<double> grid;  // t_0 = 0 < t_1 < ... < t_n = T
    MatrixXd increments;       // d^2 x n; column k is vec of the increment on (t_k, t_{k+1}]
    std::vector<JumpEvent> jumps;
    std::uint64_t seed = 0;
    std::optional<MatrixXd> drift;  // gamma^0 used for the continuous part, when known

    std::size_t cells() const { return grid.empty() ? 0 : grid.size() - 1; }
    double horizon() const { return grid.empty() ? 0.0 : grid.back(); }
    MatrixXd increment(std::size_t k) const { return unvec(increments.col(static_cast<Eigen::Index>(k)), d); }
    /// Cumulative L at every grid point, jumps included.
    std::vector<MatrixXd> cumulative() const;
};

enum class Scheme { exact_cpp, emery };

std::string to_string(Scheme s);

/// exact_cpp without a Gaussian part, emery otherwise.
Scheme natural_scheme(const MatrixLevyTriplet& triplet);

struct JumpState {
    double time = 0;
    MatrixXd before;
    MatrixXd after;
};

struct ExpPath {
    int d = 1;
    std::vector<double> grid;
    std::vector<MatrixXd> X;
    std::optional<std::vector<MatrixXd>> Xinv;
    std::vector<JumpState> jump_states;
    Scheme method = Scheme::emery;
};

/// Grid with cells of length dt and a final (possibly shorter) cell ending at T.
std::vector<double> make_grid(double T, double dt);

LevyPath sample_levy_path(const MatrixLevyTriplet& triplet, double T, double dt, std::uint64_t seed);

/// Jumps and Brownian increments drawn from `rng` (caller-owned stream).
LevyPath sample_levy_path(const MatrixLevyTriplet& triplet, double T, double dt, Rng& rng);

/// Merge `factor` consecutive cells (the last group may be shorter); jumps kept.
LevyPath coarsen(const LevyPath& path, std::size_t factor);

/// One multiplicative factor of the time-ordered product. `cell` is the grid
/// cell it belongs to; `jump` is the jump index for jump factors (else -1);
/// `closes_cell` is set on the last factor of a cell.
struct Factor {
    const MatrixXd* matrix = nullptr;
    std::size_t cell = 0;
    long jump = -1;
    bool closes_cell = false;
};

/// Streams the factors of X_T = F_1 F_2 ... in time order.
/// exact_cpp uses expm(len * drift) between jumps and ignores increments;
/// emery uses I + increment, split linearly in time around interior jumps.
void walk_factors(const LevyPath& path, Scheme scheme, const std::function<void(const Factor&)>& visit);

/// X_T only, without storing intermediate states.
MatrixXd terminal_state(const LevyPath& path, Scheme scheme);

ExpPath exact_cpp_exponential(const LevyPath& path, const MatrixLevyTriplet& triplet, bool with_inverse = false);

/// X_T = e^{tau_1 g}(I + a_1)e^{(tau_2 - tau_1) g} ... e^{(T - tau_k) g} accumulated in Scalar.
template <typename Scalar>
Mat<Scalar> exact_cpp_terminal(const LevyPath& path, const MatrixXd& drift) {
    const Eigen::Index d = path.d;
    const Mat<Scalar> g = drift.cast<Scalar>();
    const Mat<Scalar> id = Mat<Scalar>::Identity(d, d);
    Mat<Scalar> x = id;
    Scalar now(0);
    for (const auto& j : path.jumps) {
        const Scalar at(j.time);
        x = (x * expm(Mat<Scalar>((at - now) * g)) * (id + j.mark.cast<Scalar>())).eval();
        now = at;
    }
    return x * expm(Mat<Scalar>((Scalar(path.horizon()) - now) * g));
}

ExpPath emery_exponential(const LevyPath& path, bool with_inverse = true);

/// X_T from the alternating sum over jumps with operator norm >= eps.
MatrixXd skorokhod_reconstruct(const LevyPath& path, double eps, Scheme scheme = Scheme::emery);

LevyPath stochastic_logarithm(const ExpPath& exp_path);

struct MeanCheckReport {
    double t = 0;
    std::size_t n_paths = 0;
    Scheme scheme = Scheme::exact_cpp;
    MatrixXd mc_mean;
    MatrixXd se;
    MatrixXd target;
    MatrixXd z;
    double max_abs_z = 0;
};

/// E[X_t] against exp(t E[L_1]); exact scheme without a Gaussian part,
/// otherwise Emery with step dt.
MeanCheckReport mean_check(const MatrixLevyTriplet& triplet, double t, std::size_t n_paths, std::uint64_t seed,
                           double dt = 1e-2);

/// Columns t, L_ij..., X_ij..., jump (vec order).
void write_path_csv(const std::string& file, const LevyPath& path, const ExpPath& exp_path);

}  // namespace levyflow
