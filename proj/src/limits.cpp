#include "levyflow/limits.hpp"

#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace levyflow {

FunctionalSpec FunctionalSpec::op_norm() { return {}; }

FunctionalSpec FunctionalSpec::vector_norm(const VectorXd& y) {
    FunctionalSpec f;
    f.kind = Kind::vector_norm;
    f.y = y;
    return f;
}

FunctionalSpec FunctionalSpec::entry(int i, int j) {
    FunctionalSpec f;
    f.kind = Kind::entry;
    f.i = i;
    f.j = j;
    return f;
}

FunctionalSpec FunctionalSpec::abs_inner(const VectorXd& y, const VectorXd& z) {
    FunctionalSpec f;
    f.kind = Kind::abs_inner;
    f.y = y;
    f.z = z;
    return f;
}

void FunctionalSpec::check(int d) const {
    auto unit = [d](const VectorXd& v, const char* what) {
        if (v.size() != d) throw InvalidArgument(std::string(what) + " has wrong dimension");
        if (std::abs(v.norm() - 1.0) > 1e-10) throw InvalidArgument(std::string(what) + " must be a unit vector");
    };
    switch (kind) {
        case Kind::op_norm:
            break;
        case Kind::vector_norm:
            unit(y, "y");
            break;
        case Kind::abs_inner:
            unit(y, "y");
            unit(z, "z");
            break;
        case Kind::entry:
            if (i < 0 || j < 0 || i >= d || j >= d) throw InvalidArgument("entry index out of range");
            break;
    }
}

double FunctionalSpec::value(const MatrixXd& x) const {
    switch (kind) {
        case Kind::op_norm:
            return levyflow::op_norm(x);
        case Kind::vector_norm:
            return (y.transpose() * x).norm();
        case Kind::entry:
            return std::abs(x(i, j));
        case Kind::abs_inner:
            return std::abs((y.transpose() * x).dot(z.transpose()));
    }
    return 0;
}

std::optional<VectorXd> FunctionalSpec::direction_seed() const {
    if (kind == Kind::vector_norm || kind == Kind::abs_inner) return y;
    return std::nullopt;
}

std::string FunctionalSpec::describe() const {
    switch (kind) {
        case Kind::op_norm:
            return "op_norm";
        case Kind::vector_norm:
            return "vector_norm";
        case Kind::entry:
            return "entry(" + std::to_string(i) + "," + std::to_string(j) + ")";
        case Kind::abs_inner:
            return "abs_inner";
    }
    return "";
}

std::string to_string(FunctionalSpec::Kind k) {
    switch (k) {
        case FunctionalSpec::Kind::op_norm:
            return "op_norm";
        case FunctionalSpec::Kind::vector_norm:
            return "vector_norm";
        case FunctionalSpec::Kind::entry:
            return "entry";
        case FunctionalSpec::Kind::abs_inner:
            return "abs_inner";
    }
    return "";
}

FunctionalSpec::Kind functional_kind_from_string(const std::string& s) {
    if (s == "op_norm") return FunctionalSpec::Kind::op_norm;
    if (s == "vector_norm") return FunctionalSpec::Kind::vector_norm;
    if (s == "entry") return FunctionalSpec::Kind::entry;
    if (s == "abs_inner") return FunctionalSpec::Kind::abs_inner;
    throw UnknownName("unknown functional kind '" + s + "'");
}

namespace {

/// X = exp(scale) * m, rescaled so long horizons never overflow.
struct ScaledState {
    MatrixXd m;
    double scale = 0;
    MatrixXd tmp;

    explicit ScaledState(int d) : m(MatrixXd::Identity(d, d)), tmp(d, d) {}

    void multiply(const MatrixXd& f) {
        tmp.noalias() = m * f;
        m.swap(tmp);
    }
    void renormalize() {
        const double c = m.cwiseAbs().maxCoeff();
        if (!(c > 0) || !std::isfinite(c)) throw DegenerateNorm("state collapsed or overflowed");
        m /= c;
        scale += std::log(c);
    }
};

double log_functional(const FunctionalSpec& F, const ScaledState& s) {
    const double v = F.value(s.m);
    if (!(v > 0)) throw DegenerateNorm("F(X_t) = 0");
    return s.scale + std::log(v);
}

}  // namespace

std::vector<std::vector<double>> sample_log_functional(const MatrixLevyTriplet& t, const FunctionalSpec& F,
                                                       const std::vector<double>& times, std::size_t n_paths,
                                                       std::uint64_t seed, const SimulationOptions& opts,
                                                       std::vector<std::vector<ProjPoint>>* directions,
                                                       std::vector<std::vector<double>>* log_delta) {
    require_valid(t);
    F.check(t.d);
    if (times.empty()) throw InvalidArgument("empty time grid");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (!(times[k] > (k ? times[k - 1] : 0.0))) throw InvalidArgument("times must be positive increasing");
    const Scheme scheme = natural_scheme(t);
    const auto seedvec = F.direction_seed();
    if (directions) {
        if (!seedvec)
            throw InvalidArgument("directions need a vector_norm or abs_inner functional");
        directions->assign(n_paths, std::vector<ProjPoint>(times.size()));
    }
    const bool want_delta = log_delta && F.kind == FunctionalSpec::Kind::abs_inner;
    if (want_delta) log_delta->assign(n_paths, std::vector<double>(times.size()));
    std::vector<std::vector<double>> out(n_paths, std::vector<double>(times.size()));
    parallel_for(n_paths, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        ScaledState s(t.d);
        double now = 0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double len = times[k] - now;
            const LevyPath p = sample_levy_path(t, len, std::min(opts.dt, len), rng);
            std::size_t count = 0;
            walk_factors(p, scheme, [&](const Factor& f) {
                s.multiply(*f.matrix);
                if (++count % 32 == 0) s.renormalize();
            });
            s.renormalize();
            now = times[k];
            out[i][k] = log_functional(F, s);
            if (directions || want_delta) {
                const VectorXd yx = (F.y.transpose() * s.m).transpose();
                if (directions) (*directions)[i][k] = ProjPoint(yx);
                if (want_delta) (*log_delta)[i][k] = std::log(std::abs(yx.dot(F.z)) / yx.norm());
            }
        }
    });
    return out;
}

LyapunovEstimate lyapunov_estimate(const MatrixLevyTriplet& t, const FunctionalSpec& F, double T,
                                   std::size_t n_paths, std::uint64_t seed, const SimulationOptions& opts) {
    if (F.kind != FunctionalSpec::Kind::op_norm && F.kind != FunctionalSpec::Kind::vector_norm)
        throw InvalidArgument("lyapunov_estimate needs op_norm or vector_norm");
    if (n_paths == 0) throw InvalidArgument("n_paths must be >= 1");
    const auto samples = sample_log_functional(t, F, {T}, n_paths, seed, opts);
    std::vector<double> x(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) x[i] = samples[i][0] / T;
    const MeanSe m = mean_se(x);
    return {m.mean, m.se, T, n_paths};
}

CltReport clt_diagnostic(const MatrixLevyTriplet& t, const FunctionalSpec& F, double T, std::size_t n_paths,
                         std::uint64_t seed, const SimulationOptions& opts) {
    if (n_paths < 4) throw InvalidArgument("clt_diagnostic needs n_paths >= 4");
    std::vector<std::vector<double>> delta;
    const auto samples = sample_log_functional(t, F, {T}, n_paths, seed, opts, nullptr, &delta);
    std::vector<double> x(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) x[i] = samples[i][0];
    const MeanSe m = mean_se(x);
    CltReport r;
    r.n_paths = n_paths;
    r.T = T;
    r.lambda_hat = m.mean / T;
    r.lambda_se = m.se / T;
    r.sigma2_hat = m.var / T;
    double m4 = 0;
    for (double v : x) m4 += std::pow(v - m.mean, 4);
    m4 /= static_cast<double>(n_paths);
    r.sigma2_se = std::sqrt(std::max(0.0, m4 - m.var * m.var) / static_cast<double>(n_paths)) / T;
    if (!delta.empty())
        for (const auto& row : delta) r.log_delta.push_back(row[0]);
    r.degenerate = m.var < 1e-10 * T;
    if (r.degenerate) {
        r.ks_stat = 1;
        r.ks_p = 0;
        return r;
    }
    const double sd = std::sqrt(m.var);
    std::vector<double> z(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) z[i] = (x[i] - m.mean) / sd;
    r.ks_stat = ks_statistic(z, normal_cdf);
    r.ks_p = ks_pvalue(r.ks_stat, static_cast<double>(n_paths));
    return r;
}

namespace {

/// log mean exp(s x_i) and the per-sample weights exp(s x_i) / mean.
double log_mean_exp(const std::vector<double>& x, double s, std::vector<double>* w = nullptr) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x) mx = std::max(mx, s * v);
    double acc = 0;
    for (double v : x) acc += std::exp(s * v - mx);
    const double mean = acc / static_cast<double>(x.size());
    if (w) {
        w->resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) (*w)[i] = std::exp(s * x[i] - mx) / mean;
    }
    return mx + std::log(mean);
}

double influence_se(const std::vector<double>& psi) {
    const MeanSe m = mean_se(psi);
    return m.se;
}

}  // namespace

MomentFunctionReport lambda_moment_function(const MatrixLevyTriplet& t, const std::vector<double>& s_grid, double n,
                                            std::size_t n_paths, std::uint64_t seed,
                                            const SimulationOptions& opts, const FunctionalSpec& F) {
    if (s_grid.empty()) throw InvalidArgument("empty s_grid");
    if (n_paths < 2) throw InvalidArgument("n_paths must be >= 2");
    const auto samples = sample_log_functional(t, F, {n}, n_paths, seed, opts);
    std::vector<double> x(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) x[i] = samples[i][0];
    MomentFunctionReport r;
    r.n = n;
    std::vector<double> w;
    for (double s : s_grid) {
        MomentFunctionRow row;
        row.s = s;
        row.value = log_mean_exp(x, s, &w) / n;
        // influence of sample i on log(mean): w_i - 1
        for (double& v : w) v = (v - 1.0) / n;
        row.se = influence_se(w);
        r.rows.push_back(row);
    }
    double smax = 0;
    for (double s : s_grid) smax = std::max(smax, std::abs(s));
    r.step = smax > 0 ? 0.1 * smax : 0.01;
    const double hs = r.step;
    std::vector<double> wp, wm;
    const double lp = log_mean_exp(x, hs, &wp) / n;
    const double lm = log_mean_exp(x, -hs, &wm) / n;
    r.d1 = (lp - lm) / (2 * hs);
    r.d2 = (lp + lm) / (hs * hs);  // Lambda(0) = 0 exactly
    std::vector<double> psi1(n_paths), psi2(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double a = (wp[i] - 1.0) / n, b = (wm[i] - 1.0) / n;
        psi1[i] = (a - b) / (2 * hs);
        psi2[i] = (a + b) / (hs * hs);
    }
    r.d1_se = influence_se(psi1);
    r.d2_se = influence_se(psi2);
    return r;
}

double joint_sup_distance(const std::vector<double>& w, const std::vector<double>& phi, double pi_phi,
                          const std::vector<double>& z_grid) {
    const std::size_t n = w.size();
    if (n == 0) throw InvalidArgument("empty sample");
    if (!phi.empty() && phi.size() != n) throw InvalidArgument("phi values size mismatch");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
    const double inv = 1.0 / static_cast<double>(n);
    auto weight = [&](std::size_t i) { return phi.empty() ? 1.0 : phi[i]; };
    double sup = 0;
    if (z_grid.empty()) {
        // Left and right limits at every sample point.
        double acc = 0;
        for (std::size_t k = 0; k < n;) {
            const double z = w[idx[k]];
            const double target = pi_phi * normal_cdf(z);
            sup = std::max(sup, std::abs(acc - target));
            while (k < n && w[idx[k]] == z) acc += weight(idx[k++]) * inv;
            sup = std::max(sup, std::abs(acc - target));
        }
        return sup;
    }
    std::vector<double> zs = z_grid;
    std::sort(zs.begin(), zs.end());
    double acc = 0;
    std::size_t k = 0;
    for (double z : zs) {
        while (k < n && w[idx[k]] <= z) acc += weight(idx[k++]) * inv;
        sup = std::max(sup, std::abs(acc - pi_phi * normal_cdf(z)));
    }
    return sup;
}

BerryEsseenReport berry_esseen_curve(const MatrixLevyTriplet& t, const FunctionalSpec& F,
                                     const std::vector<double>& t_grid, std::size_t n_paths, std::uint64_t seed,
                                     const BerryEsseenOptions& opts) {
    if (n_paths < 4) throw InvalidArgument("berry_esseen_curve needs n_paths >= 4");
    BerryEsseenReport r;
    const bool joint = opts.phi.has_value();
    if (joint) {
        if (F.kind != FunctionalSpec::Kind::vector_norm)
            throw InvalidArgument("the joint statistic needs F = vector_norm");
        if (opts.pi_phi)
            r.pi_phi = *opts.pi_phi;
        else if (opts.measure)
            r.pi_phi = opts.measure->integrate(*opts.phi);
        else
            throw RequiresInvariantMeasure("phi given without an invariant measure or pi(phi)");
    }
    std::vector<std::vector<ProjPoint>> dirs;
    const auto samples = sample_log_functional(t, F, t_grid, n_paths, seed, opts.sim, joint ? &dirs : nullptr);
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double tk = t_grid[k];
        std::vector<double> x(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) x[i] = samples[i][k];
        const MeanSe m = mean_se(x);
        const double lambda = opts.lambda ? *opts.lambda : m.mean / tk;
        const double sigma = opts.sigma ? *opts.sigma : std::sqrt(m.var / tk);
        if (!(sigma > 0)) throw DegenerateNorm("zero variance of log F(X_t)");
        std::vector<double> w(n_paths), phi;
        for (std::size_t i = 0; i < n_paths; ++i) w[i] = (x[i] - tk * lambda) / (sigma * std::sqrt(tk));
        if (joint) {
            phi.resize(n_paths);
            for (std::size_t i = 0; i < n_paths; ++i) phi[i] = opts.phi->eval(dirs[i][k]);
        }
        BerryEsseenRow row{tk, joint_sup_distance(w, phi, r.pi_phi, opts.z_grid), n_paths, lambda, sigma};
        r.rows.push_back(row);
        if (row.sup_dist > 0) {
            lx.push_back(std::log(tk));
            ly.push_back(std::log(row.sup_dist));
        }
    }
    if (lx.size() >= 2) {
        const LinearFit fit = linear_fit(lx, ly);
        r.slope = fit.slope;
        r.intercept = fit.intercept;
        r.r2 = fit.r2;
    }
    return r;
}

MStatistics m_statistics(const ExpPath& e, const std::vector<VectorXd>& probes, double tol) {
    MStatistics r;
    const int d = e.d;
    for (std::size_t k = 0; k < e.X.size(); ++k) {
        const MatrixXd& x = e.X[k];
        double log_m;
        if (e.Xinv) {
            log_m = std::max(std::log(op_norm(x)), std::log(op_norm((*e.Xinv)[k])));
        } else {
            log_m = log_m_value(x);
        }
        if (!std::isfinite(log_m)) throw SingularState("singular state at t = " + std::to_string(e.grid[k]));
        r.t.push_back(e.grid[k]);
        r.M.push_back(std::exp(log_m));
        const double slack = tol * std::max(1.0, log_m);
        for (const auto& y : probes) {
            const double ly = std::log((y.transpose() * x).norm() / y.norm());
            ++r.checks;
            if (std::abs(ly) > log_m + slack) ++r.violations;
        }
        const auto ld = log_abs_det(x);
        if (ld.sign == 0) throw SingularState("singular state at t = " + std::to_string(e.grid[k]));
        if (std::abs(ld.log_abs) > d * log_m + d * slack) ++r.det_violations;
    }
    return r;
}

}  // namespace levyflow
