#include "levyflow/determinant.hpp"

#include "levyflow/csv.hpp"
#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace levyflow {

double trace_variance(const MatrixLevyTriplet& t) {
    double s = 0;
    for (int m = 0; m < t.d; ++m)
        for (int n = 0; n < t.d; ++n) s += t.sigma_entry(m, m, n, n);
    return s;
}

double transpose_trace(const MatrixLevyTriplet& t) {
    double s = 0;
    for (int m = 0; m < t.d; ++m)
        for (int n = 0; n < t.d; ++n) s += t.sigma_entry(m, n, n, m);
    return s;
}

namespace {

double atom_log_det(const MatrixXd& a) {
    const auto ld = log_abs_det(MatrixXd(MatrixXd::Identity(a.rows(), a.cols()) + a));
    if (ld.sign == 0) throw SingularJump("det(I + a) = 0");
    return ld.log_abs;
}

}  // namespace

CheckTriplet check_characteristics(const MatrixLevyTriplet& t) {
    CheckTriplet c;
    c.sigma_D = std::max(0.0, trace_variance(t));
    const double base = t.gamma.trace() - 0.5 * transpose_trace(t);
    c.gamma_D = base;
    double mean = base;
    for (const auto& atom : t.jumps.atoms) {
        const double w = t.jumps.rate * atom.prob;
        const double v = atom_log_det(atom.mark);
        const double comp = atom.mark.norm() <= 1.0 ? atom.mark.trace() : 0.0;
        c.gamma_D += w * ((std::abs(v) <= 1.0 ? v : 0.0) - comp);
        mean += w * (v - comp);
        if (v != 0.0 && w > 0) c.nu_D.push_back({w, v});
    }
    c.mean = mean;
    return c;
}

std::vector<DetPoint> det_closed_form(const LevyPath& path, const MatrixLevyTriplet& t) {
    const double corr = 0.5 * transpose_trace(t);
    std::vector<DetPoint> out;
    out.reserve(path.grid.size());
    double tr = 0, jump_log = 0;
    int sign = 1;
    out.push_back({0.0, 0.0, 1});
    std::size_t j = 0;
    const int d = path.d;
    for (std::size_t k = 0; k < path.cells(); ++k) {
        const auto col = path.increments.col(static_cast<Eigen::Index>(k));
        for (int m = 0; m < d; ++m) tr += col(m * d + m);
        while (j < path.jumps.size() && path.jumps[j].time <= path.grid[k + 1]) {
            const auto ld = log_abs_det(MatrixXd(MatrixXd::Identity(d, d) + path.jumps[j].mark));
            if (ld.sign == 0) throw SingularJump("jump with det(I + dL) = 0 at t = " + std::to_string(path.jumps[j].time));
            jump_log += ld.log_abs;
            sign *= ld.sign;
            ++j;
        }
        const double time = path.grid[k + 1];
        out.push_back({time, tr - corr * time + jump_log, sign});
    }
    return out;
}

std::vector<DetPoint> det_of_path(const ExpPath& e) {
    std::vector<DetPoint> out;
    out.reserve(e.X.size());
    for (std::size_t k = 0; k < e.X.size(); ++k) {
        const auto ld = log_abs_det(e.X[k]);
        out.push_back({e.grid[k], ld.log_abs, ld.sign});
    }
    return out;
}

double det_growth_mean(const MatrixLevyTriplet& t) { return *check_characteristics(t).mean; }

DetCltParams det_clt_params(const MatrixLevyTriplet& t, double T) {
    const CheckTriplet c = check_characteristics(t);
    DetCltParams p;
    for (const auto& a : c.nu_D) {
        const double v = a.value;
        p.t1_vanishes_beyond = std::max(p.t1_vanishes_beyond, std::abs(v));
        if (v > 1) p.t2_at_1 += a.rate;
        if (v < -1) p.t2_at_1 -= a.rate;
        p.t2_tail_integral += a.rate * (std::max(v - 1.0, 0.0) - std::max(-v - 1.0, 0.0));
    }
    p.centering = T * (c.gamma_D + p.t2_at_1 + p.t2_tail_integral);
    p.applicable = c.sigma_D > 0;
    p.scale = std::sqrt(c.sigma_D * T);
    return p;
}

SlMembership sl_membership(const MatrixLevyTriplet& t) {
    SlMembership r;
    const double scale = 1.0 + (t.sigma.size() ? t.sigma.cwiseAbs().maxCoeff() : 0.0);
    if (std::abs(trace_variance(t)) > 1e-12 * scale) r.failed_conditions.push_back("brownian-trace");
    if (std::abs(2.0 * t.drift().trace() - transpose_trace(t)) > 1e-12 * (scale + t.drift().cwiseAbs().maxCoeff()))
        r.failed_conditions.push_back("drift-trace");
    for (const auto& atom : t.jumps.atoms)
        if (std::abs((MatrixXd::Identity(t.d, t.d) + atom.mark).determinant() - 1.0) > 1e-12) {
            r.failed_conditions.push_back("jump-det");
            break;
        }
    r.member = r.failed_conditions.empty();
    return r;
}

std::vector<double> sample_log_det(const MatrixLevyTriplet& t, double T, double dt, std::size_t n_paths,
                                   std::uint64_t seed, DetSource source) {
    require_valid(t);
    if (source == DetSource::exact_product && t.has_gaussian_part())
        throw HasGaussianPart("exact product needs sigma = 0");
    std::vector<double> out(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        const LevyPath p = sample_levy_path(t, T, dt, rng);
        if (source == DetSource::closed_form) {
            out[i] = det_closed_form(p, t).back().log_abs;
            return;
        }
        double acc = 0;
        walk_factors(p, source == DetSource::emery_product ? Scheme::emery : Scheme::exact_cpp,
                     [&](const Factor& f) {
                         const auto ld = log_abs_det(*f.matrix);
                         if (ld.sign == 0) throw SingularFactor("singular factor", f.cell);
                         acc += ld.log_abs;
                     });
        out[i] = acc;
    });
    return out;
}

void write_det_csv(const std::string& file, const std::vector<DetPoint>& series) {
    CsvWriter csv(file, {"t", "log_abs_D", "sign_D"});
    for (const auto& p : series) csv.row(std::vector<double>{p.t, p.log_abs, static_cast<double>(p.sign)});
}

}  // namespace levyflow
