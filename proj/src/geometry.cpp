#include "levyflow/geometry.hpp"

#include "levyflow/errors.hpp"
#include "levyflow/parallel.hpp"
#include "levyflow/path_sampler.hpp"
#include "levyflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>

namespace levyflow {

bool is_proximal(const MatrixXd& a, double tol) {
    if (a.rows() != a.cols() || a.rows() == 0) throw InvalidArgument("is_proximal needs a square matrix");
    if (a.rows() == 1) return a(0, 0) != 0;
    Eigen::EigenSolver<MatrixXd> es(a, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
    std::sort(ev.begin(), ev.end(), [](auto x, auto y) { return std::abs(x) > std::abs(y); });
    const double top = std::abs(ev[0]);
    if (!(top > 0)) return false;
    if (std::abs(ev[0].imag()) > tol * top) return false;
    return top - std::abs(ev[1]) > tol * top;
}

std::string to_string(IpStatus s) {
    switch (s) {
        case IpStatus::certified:
            return "certified";
        case IpStatus::falsified_irreducibility:
            return "falsified_irreducibility";
        case IpStatus::unknown:
            return "unknown";
    }
    return "";
}

std::string to_string(IpRoute r) {
    switch (r) {
        case IpRoute::brownian_full_rank:
            return "brownian_full_rank";
        case IpRoute::cpp_semigroup:
            return "cpp_semigroup";
        case IpRoute::truncated_semigroup:
            return "truncated_semigroup";
        case IpRoute::search:
            return "search";
    }
    return "";
}

MatrixXd IpCertificate::witness_matrix() const {
    if (!witness || generators.empty()) throw InvalidArgument("certificate has no witness word");
    MatrixXd m = MatrixXd::Identity(generators[0].rows(), generators[0].cols());
    for (std::size_t i : *witness) m = m * generators.at(i);
    return m;
}

namespace {

constexpr double kEigTol = 1e-9;

/// Real eigenvectors of m (columns), one per real eigenvalue.
std::vector<VectorXd> real_eigenvectors(const MatrixXd& m) {
    std::vector<VectorXd> out;
    Eigen::EigenSolver<MatrixXd> es(m, true);
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        if (std::abs(es.eigenvalues()(k).imag()) > kEigTol * scale) continue;
        VectorXd v = es.eigenvectors().col(k).real();
        if (v.norm() > 0) out.push_back(v.normalized());
    }
    return out;
}

bool parallel_to(const VectorXd& a, const VectorXd& b) {
    // |sin| between directions, zero vectors count as parallel (0 lies in every subspace)
    const double na = a.norm(), nb = b.norm();
    if (na <= 1e-14 || nb <= 1e-14) return true;
    const double c = std::abs(a.dot(b)) / (na * nb);
    return std::sqrt(std::max(0.0, 1.0 - c * c)) <= 1e-8;
}

VectorXd canon(const VectorXd& v) {
    VectorXd u = v.normalized();
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (std::abs(u(i)) > 1e-10) {
            if (u(i) < 0) u = -u;
            break;
        }
    return u;
}

/// Image of the subspace under right multiplication by g.
VectorXd act(const Subspace::Kind kind, const VectorXd& v, const MatrixXd& g) {
    if (kind == Subspace::Kind::line) return canon((v.transpose() * g).transpose());
    return canon(g.partialPivLu().solve(v));  // (v^perp) g = (g^{-1} v)^perp
}

/// The subspace is mapped into itself by right multiplication with the
/// generator of a continuous flow m.
bool infinitesimally_invariant(Subspace::Kind kind, const VectorXd& v, const MatrixXd& m) {
    if (kind == Subspace::Kind::line) return parallel_to((v.transpose() * m).transpose(), v);
    return parallel_to(m * v, v);
}

bool same(const VectorXd& a, const VectorXd& b) { return (a - b).norm() <= 1e-8 || (a + b).norm() <= 1e-8; }

/// Orbit of v under the jump generators, or empty if larger than cap.
std::vector<VectorXd> orbit(Subspace::Kind kind, const VectorXd& v, const std::vector<MatrixXd>& gens,
                            std::size_t cap) {
    std::vector<VectorXd> out{canon(v)};
    for (std::size_t head = 0; head < out.size(); ++head) {
        for (const auto& g : gens) {
            const VectorXd w = act(kind, out[head], g);
            if (std::none_of(out.begin(), out.end(), [&](const VectorXd& u) { return same(u, w); })) {
                out.push_back(w);
                if (out.size() > cap) return {};
            }
        }
    }
    return out;
}

/// Non-real eigenvalue pair with rotation angle theta, theta/pi not close to p/q.
bool irrational_rotation_like(const MatrixXd& g) {
    if (g.rows() != 2) return false;
    Eigen::EigenSolver<MatrixXd> es(g, false);
    const std::complex<double> l = es.eigenvalues()(0);
    if (std::abs(l.imag()) <= kEigTol * std::abs(l)) return false;
    const double r = std::abs(std::arg(l)) / M_PI;
    for (int q = 1; q <= 10000; ++q) {
        const double p = std::round(r * q);
        if (std::abs(r - p / q) <= 1e-12) return false;
    }
    return true;
}

bool has_complex_spectrum(const MatrixXd& m) {
    if (m.rows() != 2) return false;
    Eigen::EigenSolver<MatrixXd> es(m, false);
    const auto l = es.eigenvalues()(0);
    return std::abs(l.imag()) > kEigTol * (1.0 + std::abs(l));
}

}  // namespace

IpCertificate ip_certify(const MatrixLevyTriplet& t, std::size_t search_depth, std::size_t n_samples,
                         std::uint64_t seed) {
    require_valid(t);
    const int d = t.d;
    const MatrixXd id = MatrixXd::Identity(d, d);
    IpCertificate cert;

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (t.sigma + t.sigma.transpose()));
    const double smax = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() > 1e-10 * smax) {
        cert.status = IpStatus::certified;
        cert.route = IpRoute::brownian_full_rank;
        cert.irreducibility = "certified: positive definite Gaussian covariance";
        cert.proximal_found = true;
        return cert;
    }
    // Brownian directions (range of sigma) as d x d matrices.
    std::vector<MatrixXd> brownian;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()(k) > 1e-10 * smax) brownian.push_back(unvec(es.eigenvectors().col(k), d));

    const MatrixXd drift = t.drift();
    const bool gaussian = !brownian.empty();
    const bool truncated = !gaussian && t.jumps.truncation_eps.has_value();
    cert.route = gaussian ? IpRoute::search : truncated ? IpRoute::truncated_semigroup : IpRoute::cpp_semigroup;

    // Generators of the semigroup.
    Rng rng = make_rng(seed, 0);
    const bool use_drift = !truncated && drift.cwiseAbs().maxCoeff() > 0;
    if (use_drift) {
        for (int k = 0; k <= 6; ++k) {
            const double s = M_PI * std::ldexp(1.0, -k);
            cert.generators.push_back(expm(MatrixXd(s * drift)));
            cert.generator_labels.push_back("exp(" + std::to_string(s) + " * drift)");
        }
        std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
        for (int k = 0; k < 4; ++k) {
            const double s = unif(rng);
            cert.generators.push_back(expm(MatrixXd(s * drift)));
            cert.generator_labels.push_back("exp(" + std::to_string(s) + " * drift)");
        }
    }
    std::vector<MatrixXd> jump_gens;
    for (std::size_t i = 0; i < t.jumps.atoms.size(); ++i) {
        const MatrixXd& a = t.jumps.atoms[i].mark;
        if (truncated && op_norm(a) < *t.jumps.truncation_eps) continue;
        if (!(t.jumps.rate > 0)) continue;
        cert.generators.push_back(id + a);
        cert.generator_labels.push_back("I + atom[" + std::to_string(i) + "]");
        jump_gens.push_back(id + a);
    }

    // Proximality: exhaustive words up to length 3, then random words.
    const std::size_t ng = cert.generators.size();
    auto try_word = [&](const std::vector<std::size_t>& w) {
        MatrixXd m = id;
        for (std::size_t i : w) m = m * cert.generators[i];
        if (is_proximal(m)) {
            cert.witness = w;
            cert.proximal_found = true;
            return true;
        }
        return false;
    };
    if (ng > 0) {
        const std::size_t exhaustive = std::min<std::size_t>(search_depth, 3);
        std::vector<std::size_t> w;
        std::function<bool(std::size_t)> rec = [&](std::size_t len) -> bool {
            if (w.size() == len) return try_word(w);
            for (std::size_t i = 0; i < ng; ++i) {
                w.push_back(i);
                if (rec(len)) return true;
                w.pop_back();
            }
            return false;
        };
        for (std::size_t len = 1; len <= exhaustive && !cert.proximal_found; ++len) {
            w.clear();
            rec(len);
        }
        std::uniform_int_distribution<std::size_t> pick(0, ng - 1);
        std::uniform_int_distribution<std::size_t> length(1, std::max<std::size_t>(1, search_depth));
        for (std::size_t s = 0; s < n_samples && !cert.proximal_found; ++s) {
            std::vector<std::size_t> rw(length(rng));
            for (auto& i : rw) i = pick(rng);
            try_word(rw);
        }
    }

    // Strong irreducibility: falsify by finite invariant families (d <= 3).
    if (d >= 2 && d <= 3) {
        std::vector<Subspace> found;
        auto consider = [&](Subspace::Kind kind, const VectorXd& v) {
            const auto orb = orbit(kind, v, jump_gens, std::max<std::size_t>(1, search_depth));
            if (orb.empty()) return;
            for (const auto& u : orb) {
                if (!infinitesimally_invariant(kind, u, drift)) return;
                for (const auto& b : brownian)
                    if (!infinitesimally_invariant(kind, u, b)) return;
            }
            for (const auto& u : orb)
                if (std::none_of(found.begin(), found.end(),
                                 [&](const Subspace& s) { return s.kind == kind && same(s.v, u); }))
                    found.push_back({kind, u});
        };
        std::vector<MatrixXd> sources = jump_gens;
        sources.push_back(drift);
        for (const auto& b : brownian) sources.push_back(b);
        for (const auto& g : jump_gens) {
            MatrixXd p = g;
            for (std::size_t k = 2; k <= search_depth; ++k) {
                p = p * g;
                sources.push_back(p);
            }
        }
        for (int i = 0; i < d; ++i) sources.push_back(MatrixXd(VectorXd::Unit(d, i).asDiagonal()));
        for (const auto& m : sources) {
            if (is_scalar_matrix(m, 1e-12)) continue;
            for (const auto& v : real_eigenvectors(m.transpose())) consider(Subspace::Kind::line, v);
            if (d == 3)
                for (const auto& v : real_eigenvectors(m)) consider(Subspace::Kind::plane, v);
        }
        if (!found.empty()) {
            cert.counterexample = found;
            cert.status = IpStatus::falsified_irreducibility;
            cert.irreducibility = "falsified: finite invariant family of proper subspaces";
            return cert;
        }
    }

    // Sufficient patterns for strong irreducibility in d = 2.
    std::string reason;
    if (d == 2 && !gaussian) {
        if (use_drift && has_complex_spectrum(drift)) {
            reason = "drift exponentials contain every conjugated rotation";
        } else {
            for (std::size_t i = 0; i < ng && reason.empty(); ++i)
                if (irrational_rotation_like(cert.generators[i]))
                    reason = "generator " + cert.generator_labels[i] + " is an irrational rotation up to conjugacy";
            for (std::size_t i = 0; i < ng && reason.empty(); ++i)
                for (std::size_t j = 0; j < ng && reason.empty(); ++j)
                    if (irrational_rotation_like(MatrixXd(cert.generators[i] * cert.generators[j])))
                        reason = "word (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") is an irrational rotation up to conjugacy";
        }
    }
    if (!reason.empty()) {
        cert.irreducibility = "certified: " + reason;
        cert.status = cert.proximal_found ? IpStatus::certified : IpStatus::unknown;
    } else {
        cert.irreducibility = "unknown";
        cert.status = IpStatus::unknown;
    }
    return cert;
}

SmoothTestFunction linear_test_function(const MatrixXd& c) {
    SmoothTestFunction f;
    f.value = [c](const MatrixXd& x) { return (c.array() * x.array()).sum(); };
    f.gradient = [c](const MatrixXd&) { return c; };
    f.hessian = [c](const MatrixXd&) { return MatrixXd(MatrixXd::Zero(c.size(), c.size())); };
    f.name = "linear";
    return f;
}

SmoothTestFunction quadratic_test_function(const MatrixXd& s, const MatrixXd& c) {
    const MatrixXd sym = 0.5 * (s + s.transpose());
    const Eigen::Index d = c.rows();
    SmoothTestFunction f;
    f.value = [sym, c](const MatrixXd& x) {
        const VectorXd v = vec(x);
        return 0.5 * v.dot(sym * v) + (c.array() * x.array()).sum();
    };
    f.gradient = [sym, c, d](const MatrixXd& x) { return MatrixXd(unvec(VectorXd(sym * vec(x)), d) + c); };
    f.hessian = [sym](const MatrixXd&) { return sym; };
    f.name = "quadratic";
    return f;
}

SmoothTestFunction bump_test_function(const MatrixXd& center, double width) {
    if (!(width > 0)) throw InvalidArgument("bump width must be positive");
    const double w2 = width * width;
    SmoothTestFunction f;
    f.value = [center, w2](const MatrixXd& x) { return std::exp(-(x - center).squaredNorm() / (2 * w2)); };
    f.gradient = [center, w2](const MatrixXd& x) {
        const double v = std::exp(-(x - center).squaredNorm() / (2 * w2));
        return MatrixXd(-v / w2 * (x - center));
    };
    f.hessian = [center, w2](const MatrixXd& x) {
        const double v = std::exp(-(x - center).squaredNorm() / (2 * w2));
        const VectorXd u = vec(MatrixXd(x - center));
        const MatrixXd id = MatrixXd::Identity(u.size(), u.size());
        return MatrixXd(v * (u * u.transpose() / (w2 * w2) - id / w2));
    };
    f.name = "bump";
    return f;
}

SmoothTestFunction combine(double alpha, const SmoothTestFunction& f, double beta, const SmoothTestFunction& g) {
    SmoothTestFunction h;
    h.value = [=](const MatrixXd& x) { return alpha * f.value(x) + beta * g.value(x); };
    h.gradient = [=](const MatrixXd& x) { return MatrixXd(alpha * f.gradient(x) + beta * g.gradient(x)); };
    h.hessian = [=](const MatrixXd& x) { return MatrixXd(alpha * f.hessian(x) + beta * g.hessian(x)); };
    h.name = f.name + "+" + g.name;
    return h;
}

void check_derivatives(const SmoothTestFunction& f, const MatrixXd& x) {
    const Eigen::Index d = x.rows(), d2 = x.size();
    const double step = 1e-4 * std::max(1.0, x.cwiseAbs().maxCoeff());
    const VectorXd g = vec(f.gradient(x));
    const MatrixXd hess = f.hessian(x);
    if (g.size() != d2 || hess.rows() != d2 || hess.cols() != d2)
        throw InconsistentDerivatives("gradient/Hessian have wrong shape");
    auto close = [](double fd, double an) { return std::abs(fd - an) <= 1e-4 * std::max(1.0, std::abs(an)); };
    for (Eigen::Index k = 0; k < d2; ++k) {
        MatrixXd xp = x, xm = x;
        xp(k % d, k / d) += step;
        xm(k % d, k / d) -= step;
        const double fd = (f.value(xp) - f.value(xm)) / (2 * step);
        if (!close(fd, g(k)))
            throw InconsistentDerivatives("gradient entry " + std::to_string(k) + ": analytic " +
                                          std::to_string(g(k)) + ", finite difference " + std::to_string(fd));
        const VectorXd hd = (vec(f.gradient(xp)) - vec(f.gradient(xm))) / (2 * step);
        for (Eigen::Index l = 0; l < d2; ++l)
            if (!close(hd(l), hess(l, k)))
                throw InconsistentDerivatives("Hessian entry (" + std::to_string(l) + "," + std::to_string(k) +
                                              ") disagrees with finite differences");
    }
}

double generator_apply(const MatrixLevyTriplet& t, const SmoothTestFunction& f, const MatrixXd& x, bool spot_check) {
    require_valid(t);
    const int d = t.d;
    if (x.rows() != d || x.cols() != d) throw InvalidArgument("x must be d x d");
    if (spot_check) check_derivatives(f, x);
    const MatrixXd grad = f.gradient(x);
    auto pair = [](const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); };

    MatrixXd ell = x * t.gamma;
    double jump_part = 0;
    const double fx = f.value(x);
    for (const auto& atom : t.jumps.atoms) {
        const double w = t.jumps.rate * atom.prob;
        const MatrixXd xa = x * atom.mark;
        const double in_x = xa.norm() <= 1.0 ? 1.0 : 0.0;
        const double in_a = atom.mark.norm() <= 1.0 ? 1.0 : 0.0;
        ell += w * xa * (in_x - in_a);
        jump_part += w * (f.value(x + xa) - fx - pair(xa, grad) * in_x);
    }
    double second = 0;
    if (t.has_gaussian_part()) {
        const MatrixXd k = kron(MatrixXd(MatrixXd::Identity(d, d)), x);
        const MatrixXd q = k * t.sigma * k.transpose();
        second = 0.5 * (q.array() * f.hessian(x).array()).sum();
    }
    return pair(ell, grad) + second + jump_part;
}

std::vector<GeneratorCheckRow> generator_mc_check(const MatrixLevyTriplet& t, const SmoothTestFunction& f,
                                                  const MatrixXd& x, const std::vector<double>& h_grid,
                                                  std::size_t n_paths, std::uint64_t seed, int substeps) {
    if (n_paths < 2) throw InvalidArgument("n_paths must be >= 2");
    if (substeps < 1) throw InvalidArgument("substeps must be >= 1");
    const double af = generator_apply(t, f, x);
    const double fx = f.value(x);
    const Scheme scheme = natural_scheme(t);
    std::vector<GeneratorCheckRow> rows;
    for (std::size_t k = 0; k < h_grid.size(); ++k) {
        const double h = h_grid[k];
        if (!(h > 0)) throw InvalidStep("h must be positive");
        std::vector<double> v(n_paths);
        parallel_for(n_paths, [&](std::size_t i) {
            Rng rng = make_rng(seed, k * n_paths + i);
            const LevyPath p = sample_levy_path(t, h, h / substeps, rng);
            v[i] = f.value(x * terminal_state(p, scheme)) - fx;
        });
        const MeanSe m = mean_se(v);
        const bool deterministic = std::all_of(v.begin(), v.end(), [&](double u) { return u == v[0]; });
        GeneratorCheckRow row;
        row.h = h;
        row.quotient = m.mean / h;
        row.se = deterministic ? 0.0 : m.se / h;
        row.generator = af;
        row.abs_error = std::abs(row.quotient - af);
        if (row.se > 0)
            row.z = (row.quotient - af) / row.se;
        else
            row.z = row.abs_error <= 1e-12 * (1 + std::abs(af))
                        ? 0.0
                        : std::copysign(std::numeric_limits<double>::infinity(), row.quotient - af);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace levyflow
