#include "levyflow/path_sampler.hpp"

#include "levyflow/csv.hpp"
#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace levyflow {

std::string to_string(Scheme s) { return s == Scheme::exact_cpp ? "exact_cpp" : "emery"; }

Scheme natural_scheme(const MatrixLevyTriplet& t) {
    return t.has_gaussian_part() ? Scheme::emery : Scheme::exact_cpp;
}

std::vector<MatrixXd> LevyPath::cumulative() const {
    std::vector<MatrixXd> out;
    out.reserve(grid.size());
    MatrixXd acc = MatrixXd::Zero(d, d);
    out.push_back(acc);
    std::size_t j = 0;
    for (std::size_t k = 0; k < cells(); ++k) {
        acc += increment(k);
        while (j < jumps.size() && jumps[j].time <= grid[k + 1]) acc += jumps[j++].mark;
        out.push_back(acc);
    }
    return out;
}

std::vector<double> make_grid(double T, double dt) {
    if (!(dt > 0) || !std::isfinite(dt)) throw InvalidStep("dt must be positive");
    if (!(T > 0) || !std::isfinite(T)) throw InvalidStep("T must be positive");
    if (dt > T * (1 + 1e-12)) throw InvalidStep("dt must not exceed T");
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(T / dt - 1e-9)));
    std::vector<double> grid(n + 1);
    for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) * dt;
    grid[n] = T;
    return grid;
}

namespace {

/// C with C C^T = sigma via the symmetric eigendecomposition (sigma may be singular).
MatrixXd covariance_factor(const MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (sigma + sigma.transpose()));
    const VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

LevyPath sample_levy_path(const MatrixLevyTriplet& t, double T, double dt, Rng& rng) {
    LevyPath p;
    p.d = t.d;
    p.grid = make_grid(T, dt);
    const std::size_t n = p.cells();
    const Eigen::Index d2 = static_cast<Eigen::Index>(t.d) * t.d;
    const MatrixXd drift = t.drift();
    p.drift = drift;

    if (t.jumps.active()) {
        std::poisson_distribution<long> count(t.jumps.rate * T);
        const long k = count(rng);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> cum;
        double c = 0;
        for (const auto& a : t.jumps.atoms) cum.push_back(c += a.prob);
        p.jumps.reserve(static_cast<std::size_t>(k));
        for (long i = 0; i < k; ++i) {
            JumpEvent e;
            e.time = T * (1.0 - unif(rng));
            const double u = unif(rng) * c;
            const auto it = std::upper_bound(cum.begin(), cum.end(), u);
            e.atom = std::min<long>(static_cast<long>(it - cum.begin()), static_cast<long>(cum.size()) - 1);
            e.mark = t.jumps.atoms[static_cast<std::size_t>(e.atom)].mark;
            p.jumps.push_back(std::move(e));
        }
        std::stable_sort(p.jumps.begin(), p.jumps.end(),
                         [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    }

    p.increments.resize(d2, static_cast<Eigen::Index>(n));
    const VectorXd vdrift = vec(drift);
    if (t.has_gaussian_part()) {
        const MatrixXd c = covariance_factor(t.sigma);
        std::normal_distribution<double> normal;
        VectorXd z(d2);
        for (std::size_t k = 0; k < n; ++k) {
            const double h = p.grid[k + 1] - p.grid[k];
            for (Eigen::Index i = 0; i < d2; ++i) z(i) = normal(rng);
            p.increments.col(static_cast<Eigen::Index>(k)).noalias() = std::sqrt(h) * (c * z) + h * vdrift;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k)
            p.increments.col(static_cast<Eigen::Index>(k)) = (p.grid[k + 1] - p.grid[k]) * vdrift;
    }
    return p;
}

LevyPath sample_levy_path(const MatrixLevyTriplet& t, double T, double dt, std::uint64_t seed) {
    require_valid(t);
    Rng rng = make_rng(seed, 0);
    LevyPath p = sample_levy_path(t, T, dt, rng);
    p.seed = seed;
    return p;
}

LevyPath coarsen(const LevyPath& path, std::size_t factor) {
    if (factor == 0) throw InvalidArgument("coarsen: factor must be >= 1");
    LevyPath out;
    out.d = path.d;
    out.seed = path.seed;
    out.drift = path.drift;
    out.jumps = path.jumps;
    const std::size_t n = path.cells();
    const std::size_t m = (n + factor - 1) / factor;
    out.grid.resize(m + 1);
    out.increments = MatrixXd::Zero(path.increments.rows(), static_cast<Eigen::Index>(m));
    out.grid[0] = path.grid[0];
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t hi = std::min(n, (k + 1) * factor);
        for (std::size_t i = k * factor; i < hi; ++i)
            out.increments.col(static_cast<Eigen::Index>(k)) += path.increments.col(static_cast<Eigen::Index>(i));
        out.grid[k + 1] = path.grid[hi];
    }
    return out;
}

void walk_factors(const LevyPath& path, Scheme scheme, const std::function<void(const Factor&)>& visit) {
    const int d = path.d;
    const std::size_t n = path.cells();
    const MatrixXd id = MatrixXd::Identity(d, d);
    MatrixXd drift;
    if (scheme == Scheme::exact_cpp) {
        if (!path.drift) throw InvalidArgument("exact scheme needs the path drift");
        drift = *path.drift;
    }
    const double h0 = n > 0 ? path.grid[1] - path.grid[0] : 0.0;
    const MatrixXd cell_exp = scheme == Scheme::exact_cpp ? expm(MatrixXd(h0 * drift)) : MatrixXd();

    MatrixXd piece(d, d), jump(d, d), inc(d, d);
    auto continuous_piece = [&](std::size_t k, double len, double cell_len, bool closes) {
        if (scheme == Scheme::exact_cpp) {
            if (len == h0)
                piece = cell_exp;
            else
                piece = expm(MatrixXd(len * drift));
        } else {
            piece = id + (len / cell_len) * inc;
        }
        visit(Factor{&piece, k, -1, closes});
    };

    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t0 = path.grid[k], t1 = path.grid[k + 1];
        const double cell_len = t1 - t0;
        if (scheme == Scheme::emery) inc = path.increment(k);
        double s = t0;
        while (j < path.jumps.size() && path.jumps[j].time <= t1) {
            const double tj = std::max(path.jumps[j].time, t0);
            if (tj > s) continuous_piece(k, tj - s, cell_len, false);
            s = tj;
            jump = id + path.jumps[j].mark;
            const bool last = (tj == t1) && !(j + 1 < path.jumps.size() && path.jumps[j + 1].time <= t1);
            visit(Factor{&jump, k, static_cast<long>(j), last});
            ++j;
        }
        if (s < t1) continuous_piece(k, t1 - s, cell_len, true);
    }
}

MatrixXd terminal_state(const LevyPath& path, Scheme scheme) {
    MatrixXd x = MatrixXd::Identity(path.d, path.d), tmp(path.d, path.d);
    walk_factors(path, scheme, [&](const Factor& f) {
        tmp.noalias() = x * *f.matrix;
        x.swap(tmp);
    });
    return x;
}

namespace {

ExpPath build(const LevyPath& path, Scheme scheme, bool with_inverse) {
    ExpPath out;
    out.d = path.d;
    out.grid = path.grid;
    out.method = scheme;
    const MatrixXd id = MatrixXd::Identity(path.d, path.d);
    MatrixXd x = id, xinv = id, tmp(path.d, path.d);
    out.X.reserve(path.grid.size());
    out.X.push_back(x);
    if (with_inverse) {
        out.Xinv.emplace();
        out.Xinv->reserve(path.grid.size());
        out.Xinv->push_back(xinv);
    }
    walk_factors(path, scheme, [&](const Factor& f) {
        const MatrixXd& m = *f.matrix;
        if (scheme == Scheme::emery || with_inverse) {
            const Eigen::PartialPivLU<MatrixXd> lu(m);
            const double det = lu.determinant();
            if (!(std::abs(det) >= kDetTol))
                throw SingularFactor("singular product factor in cell " + std::to_string(f.cell), f.cell);
            if (with_inverse) {
                tmp.noalias() = lu.inverse() * xinv;
                xinv.swap(tmp);
            }
        }
        if (f.jump >= 0) {
            JumpState js;
            js.time = path.jumps[static_cast<std::size_t>(f.jump)].time;
            js.before = x;
            js.after = x * m;
            out.jump_states.push_back(std::move(js));
        }
        tmp.noalias() = x * m;
        x.swap(tmp);
        if (f.closes_cell) {
            out.X.push_back(x);
            if (with_inverse) out.Xinv->push_back(xinv);
        }
    });
    return out;
}

}  // namespace

ExpPath exact_cpp_exponential(const LevyPath& path, const MatrixLevyTriplet& triplet, bool with_inverse) {
    if (triplet.has_gaussian_part()) throw HasGaussianPart("exact_cpp_exponential needs sigma = 0");
    LevyPath p = path;
    p.drift = triplet.drift();
    return build(p, Scheme::exact_cpp, with_inverse);
}

ExpPath emery_exponential(const LevyPath& path, bool with_inverse) { return build(path, Scheme::emery, with_inverse); }

MatrixXd skorokhod_reconstruct(const LevyPath& path, double eps, Scheme scheme) {
    const int d = path.d;
    const MatrixXd id = MatrixXd::Identity(d, d);
    // Segments of the full process between big jumps: X_T = S_0 J_1 S_1 ... J_N S_N.
    std::vector<MatrixXd> seg{id};
    std::vector<MatrixXd> big;
    walk_factors(path, scheme, [&](const Factor& f) {
        if (f.jump >= 0) {
            const MatrixXd& a = path.jumps[static_cast<std::size_t>(f.jump)].mark;
            if (op_norm(a) >= eps) {
                big.push_back(a);
                seg.push_back(id);
                return;
            }
        }
        seg.back() = seg.back() * *f.matrix;
    });
    const std::size_t n = big.size();
    if (n > 24) throw InvalidArgument("skorokhod_reconstruct: too many big jumps (" + std::to_string(n) + ")");

    MatrixXd x_eps = seg[0];
    for (std::size_t i = 1; i <= n; ++i) x_eps = x_eps * seg[i];

    // Full-process factor between chosen jumps includes the unchosen big jumps.
    MatrixXd total = x_eps;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        MatrixXd term = seg[0];
        int chosen = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1) {
                term = term * big[i];
                ++chosen;
            } else {
                term = term * (id + big[i]);
            }
            term = term * seg[i + 1];
        }
        total += (chosen % 2 == 1 ? 1.0 : -1.0) * term;
    }
    return total;
}

LevyPath stochastic_logarithm(const ExpPath& e) {
    LevyPath out;
    out.d = e.d;
    out.grid = e.grid;
    const std::size_t n = e.grid.empty() ? 0 : e.grid.size() - 1;
    out.increments = MatrixXd::Zero(static_cast<Eigen::Index>(e.d) * e.d, static_cast<Eigen::Index>(n));
    auto log_step = [&](const MatrixXd& from, const MatrixXd& to) -> MatrixXd {
        const Eigen::PartialPivLU<MatrixXd> lu(from);
        if (!(std::abs(lu.determinant()) > 0)) throw SingularState("stochastic_logarithm: singular state");
        return lu.solve(MatrixXd(to - from));
    };
    std::size_t j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        MatrixXd start = e.X[k];
        MatrixXd inc = MatrixXd::Zero(e.d, e.d);
        while (j < e.jump_states.size() && e.jump_states[j].time <= e.grid[k + 1]) {
            const auto& js = e.jump_states[j];
            inc += log_step(start, js.before);
            out.jumps.push_back({js.time, log_step(js.before, js.after), -1});
            start = js.after;
            ++j;
        }
        inc += log_step(start, e.X[k + 1]);
        out.increments.col(static_cast<Eigen::Index>(k)) = vec(inc);
    }
    return out;
}

MeanCheckReport mean_check(const MatrixLevyTriplet& t, double horizon, std::size_t n_paths, std::uint64_t seed,
                           double dt) {
    require_valid(t);
    if (n_paths < 2) throw InvalidArgument("mean_check: n_paths must be >= 2");
    MeanCheckReport r;
    r.t = horizon;
    r.n_paths = n_paths;
    r.scheme = t.has_gaussian_part() ? Scheme::emery : Scheme::exact_cpp;
    const double step = r.scheme == Scheme::exact_cpp ? horizon : std::min(dt, horizon);
    std::vector<MatrixXd> xs(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        const LevyPath p = sample_levy_path(t, horizon, step, rng);
        xs[i] = terminal_state(p, r.scheme);
    });
    const int d = t.d;
    MatrixXd sum = MatrixXd::Zero(d, d);
    for (const auto& x : xs) sum += x;
    r.mc_mean = sum / static_cast<double>(n_paths);
    MatrixXd ss = MatrixXd::Zero(d, d);
    for (const auto& x : xs) ss += (x - r.mc_mean).cwiseAbs2();
    r.se = (ss / static_cast<double>(n_paths - 1) / static_cast<double>(n_paths)).cwiseSqrt();
    r.target = expm(MatrixXd(horizon * t.mean_L1()));
    r.z = MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) {
            const double diff = r.mc_mean(i, k) - r.target(i, k);
            if (r.se(i, k) > 0)
                r.z(i, k) = diff / r.se(i, k);
            else
                r.z(i, k) = std::abs(diff) <= 1e-12 * (1 + std::abs(r.target(i, k)))
                                ? 0.0
                                : std::copysign(std::numeric_limits<double>::infinity(), diff);
        }
    r.max_abs_z = r.z.cwiseAbs().maxCoeff();
    return r;
}

void write_path_csv(const std::string& file, const LevyPath& path, const ExpPath& e) {
    const int d = path.d;
    std::vector<std::string> header{"t"};
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) header.push_back("L_" + std::to_string(i + 1) + std::to_string(j + 1));
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) header.push_back("X_" + std::to_string(i + 1) + std::to_string(j + 1));
    header.push_back("jump");
    CsvWriter csv(file, header);
    const auto cum = path.cumulative();
    std::size_t jj = 0;
    for (std::size_t k = 0; k < path.grid.size(); ++k) {
        std::vector<double> row{path.grid[k]};
        const VectorXd l = vec(cum[k]);
        const VectorXd x = vec(e.X[k]);
        row.insert(row.end(), l.data(), l.data() + l.size());
        row.insert(row.end(), x.data(), x.data() + x.size());
        int flag = 0;
        while (k > 0 && jj < path.jumps.size() && path.jumps[jj].time <= path.grid[k]) {
            flag = 1;
            ++jj;
        }
        row.push_back(flag);
        csv.row(row);
    }
}

}  // namespace levyflow
