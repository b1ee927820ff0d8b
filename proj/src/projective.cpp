#include "levyflow/projective.hpp"

#include "levyflow/errors.hpp"
#include "levyflow/csv.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/stats.hpp"

#include <algorithm>
#include <cmath>

namespace levyflow {

VectorXd canonical(const VectorXd& x) {
    const double n = x.norm();
    if (!(n > 0) || !std::isfinite(n)) throw InvalidArgument("projective point needs a finite nonzero vector");
    VectorXd v = x / n;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            if (v(i) < 0) v = -v;
            break;
        }
    }
    return v;
}

double ProjPoint::angle() const {
    if (v.size() != 2) throw InvalidArgument("angle() needs d = 2");
    double a = std::atan2(v(1), v(0));
    if (a < 0) a += M_PI;
    if (a >= M_PI) a -= M_PI;
    return a;
}

ProjPoint ProjPoint::from_angle(double theta) {
    VectorXd v(2);
    v << std::cos(theta), std::sin(theta);
    return ProjPoint(v);
}

double angular_distance(const ProjPoint& a, const ProjPoint& b) {
    // 2 s sqrt(1 - s^2) with s = half the chordal distance: no cancellation near 0.
    const double s = 0.5 * std::min((a.v - b.v).norm(), (a.v + b.v).norm());
    return std::clamp(2.0 * s * std::sqrt(std::max(0.0, 1.0 - s * s)), 0.0, 1.0);
}

HolderFn cos2theta_fn() {
    HolderFn f;
    f.eval = [](const ProjPoint& p) {
        if (p.v.size() != 2) throw InvalidArgument("cos2theta needs d = 2");
        return p.v(0) * p.v(0) - p.v(1) * p.v(1);
    };
    f.gamma = 1.0;
    f.seminorm_bound = 2.0;
    f.name = "cos2theta";
    return f;
}

HolderFn coordinate_square_fn(int i) {
    HolderFn f;
    f.eval = [i](const ProjPoint& p) {
        if (i < 0 || i >= p.v.size()) throw InvalidArgument("coordinate index out of range");
        return p.v(i) * p.v(i);
    };
    f.gamma = 1.0;
    f.seminorm_bound = 1.0;
    f.name = "coord_sq_" + std::to_string(i);
    return f;
}

HolderFn constant_fn(double c) {
    HolderFn f;
    f.eval = [c](const ProjPoint&) { return c; };
    f.seminorm_bound = 0.0;
    f.name = "constant";
    return f;
}

ProjPoint sample_uniform_point(int d, Rng& rng) {
    std::normal_distribution<double> normal;
    VectorXd z(d);
    do {
        for (int i = 0; i < d; ++i) z(i) = normal(rng);
    } while (z.norm() == 0);
    return ProjPoint(z);
}

ProjectedChain project_chain(const ExpPath& e, const ProjPoint& y0) {
    ProjectedChain c;
    c.points.reserve(e.X.size());
    c.log_norm.reserve(e.X.size());
    for (const auto& x : e.X) {
        const VectorXd y = (y0.v.transpose() * x).transpose();
        const double n = y.norm();
        if (!(n > 0)) throw DegenerateNorm("y0 X_t = 0");
        c.points.emplace_back(y);
        c.log_norm.push_back(std::log(n));
    }
    return c;
}

double EmpiricalMeasure::integrate(const HolderFn& f) const {
    double s = 0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f.eval(points[i]);
    return s;
}

namespace {

/// Propagates row vectors through X over [0, len]; renormalizes each vector and
/// returns the accumulated log-norms.
void advance_rows(const MatrixLevyTriplet& t, Scheme scheme, double len, double dt, Rng& rng,
                  std::vector<VectorXd>& rows, std::vector<double>* log_norm = nullptr) {
    const LevyPath p = sample_levy_path(t, len, std::min(dt, len), rng);
    VectorXd tmp(t.d);
    std::size_t count = 0;
    auto renorm = [&] {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const double n = rows[r].norm();
            if (!(n > 0) || !std::isfinite(n)) throw DegenerateNorm("row vector collapsed");
            rows[r] /= n;
            if (log_norm) (*log_norm)[r] += std::log(n);
        }
    };
    walk_factors(p, scheme, [&](const Factor& f) {
        for (auto& y : rows) {
            tmp.noalias() = f.matrix->transpose() * y;
            y.swap(tmp);
        }
        if (++count % 32 == 0) renorm();
    });
    renorm();
}

}  // namespace

EmpiricalMeasure estimate_invariant_measure(const MatrixLevyTriplet& t, double h, std::size_t n_steps,
                                            std::size_t burn_in, std::size_t n_chains, std::uint64_t seed,
                                            const SkeletonOptions& opts) {
    require_valid(t);
    if (!(h > 0)) throw InvalidStep("h must be positive");
    if (n_steps <= burn_in) throw InvalidArgument("n_steps must exceed burn_in");
    if (n_chains == 0) throw InvalidArgument("n_chains must be >= 1");
    if (opts.start && opts.start->dim() != t.d) throw InvalidArgument("start point dimension mismatch");
    const std::size_t keep = n_steps - burn_in;
    const Scheme scheme = natural_scheme(t);
    EmpiricalMeasure m;
    m.points.resize(keep * n_chains);
    parallel_for(n_chains, [&](std::size_t c) {
        Rng rng = make_rng(seed, c);
        std::vector<VectorXd> rows{opts.start ? opts.start->v : sample_uniform_point(t.d, rng).v};
        for (std::size_t s = 1; s <= n_steps; ++s) {
            advance_rows(t, scheme, h, opts.dt, rng, rows);
            if (s > burn_in) m.points[c * keep + (s - burn_in - 1)] = ProjPoint(rows[0]);
        }
    });
    m.weights.assign(m.points.size(), 1.0 / static_cast<double>(m.points.size()));
    m.meta = {t.name, h, n_steps, burn_in, n_chains, seed};
    return m;
}

UniformityTest uniformity_test(const EmpiricalMeasure& m) {
    if (m.points.empty() || m.points[0].dim() != 2) throw InvalidArgument("uniformity_test needs d = 2 samples");
    std::vector<double> angles(m.points.size());
    for (std::size_t i = 0; i < m.points.size(); ++i) angles[i] = m.points[i].angle();
    UniformityTest r;
    r.ks_stat = ks_statistic(angles, [](double a) { return std::clamp(a / M_PI, 0.0, 1.0); });
    const double n = static_cast<double>(angles.size());
    r.p_nominal = ks_pvalue(r.ks_stat, n);
    const std::size_t chains = std::max<std::size_t>(1, m.meta.chains);
    const std::size_t per = m.points.size() / chains;
    double tau = 1.0;
    for (int harmonic = 0; harmonic < 2; ++harmonic) {
        double acc = 0;
        for (std::size_t c = 0; c < chains; ++c) {
            std::vector<double> x(per);
            for (std::size_t i = 0; i < per; ++i) {
                const double a = 2.0 * angles[c * per + i];
                x[i] = harmonic == 0 ? std::cos(a) : std::sin(a);
            }
            acc += integrated_autocorr_time(x);
        }
        tau = std::max(tau, acc / static_cast<double>(chains));
    }
    r.tau = tau;
    r.n_effective = n / tau;
    r.p_effective = ks_pvalue(r.ks_stat, r.n_effective);
    return r;
}

double angle_wasserstein1(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    auto angles = [](const EmpiricalMeasure& m) {
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < m.points.size(); ++i) out.emplace_back(m.points[i].angle(), m.weights[i]);
        return out;
    };
    // Events: +w for a, -w for b; the cdf difference G is piecewise constant.
    std::vector<std::pair<double, double>> ev;
    for (auto [x, w] : angles(a)) ev.emplace_back(x, w);
    for (auto [x, w] : angles(b)) ev.emplace_back(x, -w);
    std::sort(ev.begin(), ev.end());
    std::vector<double> g, len;
    double cur = 0, prev = 0;
    for (const auto& [x, w] : ev) {
        g.push_back(cur);
        len.push_back(x - prev);
        cur += w;
        prev = x;
    }
    g.push_back(cur);
    len.push_back(M_PI - prev);
    // Circle: W1 = min_c int |G - c|; c is a weighted median of G.
    std::vector<std::size_t> idx(g.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return g[i] < g[j]; });
    double half = 0;
    for (double l : len) half += l;
    half *= 0.5;
    double run = 0, c = 0;
    for (std::size_t i : idx) {
        run += len[i];
        c = g[i];
        if (run >= half) break;
    }
    double w1 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) w1 += len[i] * std::abs(g[i] - c);
    return w1;
}

ContractionReport contraction_estimate(const MatrixLevyTriplet& t, std::size_t n, double gamma, std::size_t n_pairs,
                                       std::size_t n_paths, std::uint64_t seed, double h, double dt) {
    require_valid(t);
    if (!(gamma > 0 && gamma <= 1)) throw InvalidArgument("gamma must lie in (0, 1]");
    if (n_paths == 0) throw InvalidArgument("n_paths must be >= 1");
    Rng pair_rng = make_rng(seed, ~std::uint64_t{0});
    std::vector<std::pair<ProjPoint, ProjPoint>> pairs;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        ProjPoint u = sample_uniform_point(t.d, pair_rng), w = sample_uniform_point(t.d, pair_rng);
        if (angular_distance(u, w) > 1e-8) pairs.emplace_back(std::move(u), std::move(w));
    }
    if (t.d == 2) {
        const int grid = 12;
        for (int k = 0; k < grid; ++k) {
            const double a = M_PI * (k + 0.5) / grid;
            pairs.emplace_back(ProjPoint::from_angle(a), ProjPoint::from_angle(a + M_PI / 2));
            pairs.emplace_back(ProjPoint::from_angle(a), ProjPoint::from_angle(a + M_PI / 7));
        }
    }
    if (pairs.empty()) throw InvalidArgument("no evaluable pairs");
    const Scheme scheme = natural_scheme(t);
    const double horizon = static_cast<double>(n) * h;
    // ratios[path][pair]
    std::vector<std::vector<double>> ratios(n_paths, std::vector<double>(pairs.size()));
    parallel_for(n_paths, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        std::vector<VectorXd> rows;
        for (const auto& [u, w] : pairs) {
            rows.push_back(u.v);
            rows.push_back(w.v);
        }
        if (horizon > 0) advance_rows(t, scheme, horizon, dt, rng, rows);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double after = angular_distance(ProjPoint(rows[2 * k]), ProjPoint(rows[2 * k + 1]));
            const double before = angular_distance(pairs[k].first, pairs[k].second);
            ratios[i][k] = std::pow(after, gamma) / std::pow(before, gamma);
        }
    });
    ContractionReport r;
    r.n_pairs_evaluated = pairs.size();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        double s = 0;
        for (std::size_t i = 0; i < n_paths; ++i) s += ratios[i][k];
        r.c_hat = std::max(r.c_hat, s / static_cast<double>(n_paths));
    }
    r.contracting = r.c_hat < 1.0;
    return r;
}

MixingReport mixing_rate(const MatrixLevyTriplet& t, const HolderFn& f, const std::vector<ProjPoint>& starts,
                         const std::vector<double>& t_grid, std::size_t n_paths, std::uint64_t seed, double dt) {
    require_valid(t);
    if (starts.size() < 2) throw InvalidArgument("mixing_rate needs at least two starts");
    if (n_paths < 2) throw InvalidArgument("mixing_rate needs n_paths >= 2");
    if (t_grid.empty()) throw InvalidArgument("empty t_grid");
    for (std::size_t k = 0; k < t_grid.size(); ++k)
        if (!(t_grid[k] > (k ? t_grid[k - 1] : 0.0))) throw InvalidArgument("t_grid must be positive increasing");
    const Scheme scheme = natural_scheme(t);
    const std::size_t ns = starts.size(), nt = t_grid.size();
    // values[path][time * ns + start]
    std::vector<std::vector<double>> values(n_paths, std::vector<double>(nt * ns));
    parallel_for(n_paths, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        std::vector<VectorXd> rows;
        for (const auto& s : starts) rows.push_back(s.v);
        double now = 0;
        for (std::size_t k = 0; k < nt; ++k) {
            advance_rows(t, scheme, t_grid[k] - now, dt, rng, rows);
            now = t_grid[k];
            for (std::size_t s = 0; s < ns; ++s) values[i][k * ns + s] = f.eval(ProjPoint(rows[s]));
        }
    });
    MixingReport r;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < nt; ++k) {
        MixingRow row;
        row.t = t_grid[k];
        for (std::size_t a = 0; a < ns; ++a)
            for (std::size_t b = a + 1; b < ns; ++b) {
                std::vector<double> diff(n_paths);
                for (std::size_t i = 0; i < n_paths; ++i)
                    diff[i] = values[i][k * ns + a] - values[i][k * ns + b];
                const MeanSe ms = mean_se(diff);
                if (std::abs(ms.mean) >= row.sup_diff) {
                    row.sup_diff = std::abs(ms.mean);
                    row.se = ms.se;
                }
            }
        r.rows.push_back(row);
        if (row.sup_diff > 0) {
            xs.push_back(row.t);
            ys.push_back(std::log(row.sup_diff));
        }
    }
    if (xs.size() >= 3) {
        const LinearFit fit = linear_fit(xs, ys);
        r.fitted = true;
        r.rate = -fit.slope;
        r.rate_se = fit.slope_se;
        r.prefactor = std::exp(fit.intercept);
        r.r2 = fit.r2;
        r.no_decay = !(r.rate > 2.0 * r.rate_se && r.rate > 0);
    }
    return r;
}

void write_measure_csv(const std::string& file, const EmpiricalMeasure& m) {
    const int d = m.points.empty() ? 0 : m.points[0].dim();
    std::vector<std::string> header;
    for (int i = 0; i < d; ++i) header.push_back("v" + std::to_string(i + 1));
    if (d == 2) header.push_back("angle");
    header.push_back("weight");
    CsvWriter csv(file, header);
    for (std::size_t k = 0; k < m.points.size(); ++k) {
        std::vector<double> row(m.points[k].v.data(), m.points[k].v.data() + d);
        if (d == 2) row.push_back(m.points[k].angle());
        row.push_back(m.weights[k]);
        csv.row(row);
    }
}

void write_angle_histogram(const std::string& file, const EmpiricalMeasure& m, std::size_t bins) {
    if (bins == 0) throw InvalidArgument("bins must be >= 1");
    std::vector<double> mass(bins, 0.0);
    for (std::size_t k = 0; k < m.points.size(); ++k) {
        auto b = static_cast<std::size_t>(m.points[k].angle() / M_PI * static_cast<double>(bins));
        mass[std::min(b, bins - 1)] += m.weights[k];
    }
    CsvWriter csv(file, {"angle_lo", "angle_hi", "mass"});
    for (std::size_t b = 0; b < bins; ++b)
        csv.row(std::vector<double>{M_PI * static_cast<double>(b) / static_cast<double>(bins),
                                    M_PI * static_cast<double>(b + 1) / static_cast<double>(bins), mass[b]});
}

}  // namespace levyflow
