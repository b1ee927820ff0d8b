#pragma once

#include "levyflow/levy_model.hpp"
#include "levyflow/path_sampler.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace levyflow {

/// Unit representative of a line: first coordinate with |v_i| > 1e-12 is positive.
VectorXd canonical(const VectorXd& v);

struct ProjPoint {
    VectorXd v;

    ProjPoint() = default;
    explicit ProjPoint(const VectorXd& x) : v(canonical(x)) {}

    int dim() const { return static_cast<int>(v.size()); }
    /// d = 2 only: angle of the line in [0, pi).
    double angle() const;
    static ProjPoint from_angle(double theta);
};

/// |sin| of the angle between the lines, in [0, 1].
double angular_distance(const ProjPoint& a, const ProjPoint& b);

struct HolderFn {
    std::function<double(const ProjPoint&)> eval;
    double gamma = 1.0;
    std::optional<double> seminorm_bound;
    std::string name;
};

/// cos(2 theta) for d = 2; Lipschitz in the angular metric with constant 2.
HolderFn cos2theta_fn();
/// <v, e_i>^2 (0-based i); Lipschitz with constant 1.
HolderFn coordinate_square_fn(int i);
HolderFn constant_fn(double c);

/// Uniform law on the sphere pushed to projective space.
ProjPoint sample_uniform_point(int d, Rng& rng);

struct ProjectedChain {
    std::vector<ProjPoint> points;
    std::vector<double> log_norm;  // log |y0 X_t|
};

ProjectedChain project_chain(const ExpPath& exp_path, const ProjPoint& y0);

struct MeasureMeta {
    std::string triplet;
    double h = 0;
    std::size_t n_steps = 0;
    std::size_t burn_in = 0;
    std::size_t chains = 0;
    std::uint64_t seed = 0;
};

/// Pooled chain-major samples: chain c contributes entries
/// [c * per_chain, (c + 1) * per_chain).
struct EmpiricalMeasure {
    std::vector<ProjPoint> points;
    std::vector<double> weights;
    MeasureMeta meta;

    std::size_t per_chain() const { return meta.chains ? points.size() / meta.chains : points.size(); }
    double integrate(const HolderFn& f) const;
};

struct SkeletonOptions {
    double dt = 1e-2;                 // Emery sub-step when a Gaussian part is present
    std::optional<ProjPoint> start;   // default: each chain starts from a uniform point
};

EmpiricalMeasure estimate_invariant_measure(const MatrixLevyTriplet& triplet, double h, std::size_t n_steps,
                                            std::size_t burn_in, std::size_t n_chains, std::uint64_t seed,
                                            const SkeletonOptions& opts = {});

struct UniformityTest {
    double ks_stat = 0;
    double p_nominal = 0;
    double p_effective = 0;
    double tau = 1;       // integrated autocorrelation time of the chains
    double n_effective = 0;
};

/// d = 2: pooled angles vs uniform on [0, pi), p-value at the effective size.
UniformityTest uniformity_test(const EmpiricalMeasure& m);

/// 1-Wasserstein distance between the angle laws on the circle of length pi.
double angle_wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

struct ContractionReport {
    double c_hat = 0;
    bool contracting = false;
    std::size_t n_pairs_evaluated = 0;
};

/// Max over pairs of E[d^g(u X_n, w X_n) / d^g(u, w)], X_n at time n * h.
ContractionReport contraction_estimate(const MatrixLevyTriplet& triplet, std::size_t n, double gamma,
                                       std::size_t n_pairs, std::size_t n_paths, std::uint64_t seed,
                                       double h = 1.0, double dt = 1e-2);

struct MixingRow {
    double t = 0;
    double sup_diff = 0;
    double se = 0;  // of the maximizing paired difference
};

struct MixingReport {
    std::vector<MixingRow> rows;
    bool fitted = false;
    double rate = 0;       // d-hat
    double rate_se = 0;
    double prefactor = 0;  // D-hat
    double r2 = 0;
    bool no_decay = false;
};

/// Common paths drive every start, so the differences are paired.
MixingReport mixing_rate(const MatrixLevyTriplet& triplet, const HolderFn& f, const std::vector<ProjPoint>& starts,
                         const std::vector<double>& t_grid, std::size_t n_paths, std::uint64_t seed,
                         double dt = 1e-2);

void write_measure_csv(const std::string& file, const EmpiricalMeasure& m);
void write_angle_histogram(const std::string& file, const EmpiricalMeasure& m, std::size_t bins);

}  // namespace levyflow
