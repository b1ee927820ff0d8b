// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "levyflow/config_io.hpp"
#include "levyflow/determinant.hpp"
#include "levyflow/geometry.hpp"
#include "levyflow/limits.hpp"
#include "levyflow/path_sampler.hpp"
#include "levyflow/projective.hpp"
#include "levyflow/scenario.hpp"
#include "levyflow/stats.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace levyflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

MatrixXd gaussian_matrix(int d, double scale, Rng& rng) {
    std::normal_distribution<double> n(0.0, scale);
    MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = n(rng);
    return a;
}

// Random CPP + drift triplet; atoms keep |det(I + a)| away from 0.
MatrixLevyTriplet random_cpp_triplet(std::uint64_t seed, int d, double drift_scale = 0.5) {
    Rng rng = make_rng(seed, 0xC0FFEE);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    JumpSpec js;
    js.rate = 0.5 + 2.5 * u(rng);
    const int n_atoms = 1 + static_cast<int>(3 * u(rng));
    for (int k = 0; k < n_atoms; ++k) {
        MatrixXd a;
        do {
            a = gaussian_matrix(d, 0.5, rng);
        } while (std::abs((MatrixXd::Identity(d, d) + a).determinant()) < 0.05);
        js.atoms.push_back({1.0 / n_atoms, a});
    }
    const MatrixXd drift = drift_scale > 0 ? gaussian_matrix(d, drift_scale, rng) : MatrixXd::Zero(d, d);
    return MatrixLevyTriplet::from_drift(d, {}, drift, js, "random_cpp_" + std::to_string(seed));
}

using Quad = boost::multiprecision::cpp_bin_float_quad;
using QuadMat = Eigen::Matrix<Quad, Eigen::Dynamic, Eigen::Dynamic>;

// Taylor series after scaling below norm 1/2, then squaring back.
QuadMat quad_expm(const QuadMat& a) {
    int s = 0;
    Quad n = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (n > 0.5) {
        n /= 2;
        ++s;
    }
    const QuadMat x = a / Quad(std::ldexp(1.0, s));
    QuadMat sum = QuadMat::Identity(a.rows(), a.cols());
    QuadMat term = sum;
    for (int k = 1; k <= 40; ++k) {
        term = (term * x / Quad(k)).eval();
        sum += term;
    }
    for (int k = 0; k < s; ++k) sum = (sum * sum).eval();
    return sum;
}

// det X_T of the exact CPP product, accumulated and evaluated in quad precision.
Quad quad_det_terminal(const LevyPath& path, const MatrixXd& drift) {
    const QuadMat g = drift.cast<Quad>();
    const QuadMat id = QuadMat::Identity(path.d, path.d);
    QuadMat x = id;
    Quad now = 0;
    for (const auto& j : path.jumps) {
        const Quad at = j.time;
        x = (x * quad_expm(QuadMat((at - now) * g)) * (id + j.mark.cast<Quad>())).eval();
        now = at;
    }
    x = (x * quad_expm(QuadMat((Quad(path.horizon()) - now) * g))).eval();
    return x.determinant();
}

Outcome c1_determinant_oracle() {
    double worst = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const int d = s % 2 ? 3 : 2;
        const auto t = random_cpp_triplet(s, d);
        const auto path = sample_levy_path(t, 5.0, 0.5, 1000 + s);
        const Quad direct = quad_det_terminal(path, t.drift());
        const auto c = det_closed_form(path, t).back();
        const Quad closed = Quad(c.sign) * boost::multiprecision::exp(Quad(c.log_abs));
        const double rel = static_cast<double>(boost::multiprecision::abs(direct - closed) / boost::multiprecision::abs(closed));
        worst = std::max(worst, rel);
    }
    return {worst <= 1e-10, "max relative error " + fmt("%.3e", worst)};
}

Outcome c2_emery_convergence() {
    auto t = builtin_triplet("rotation_rank1");
    t = MatrixLevyTriplet::from_drift(2, 0.01 * MatrixXd::Identity(4, 4), t.drift(), t.jumps, "rotation_rank1+bm");
    const double dt0 = 0.1;
    int monotone = 0;
    std::string worst;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto fine = sample_levy_path(t, 1.0, dt0 / 16, 500 + s);
        const MatrixXd ref = emery_exponential(fine, false).X.back();
        std::vector<double> err;
        for (std::size_t f : {16u, 8u, 4u, 2u}) err.push_back((emery_exponential(coarsen(fine, f), false).X.back() - ref).norm());
        bool ok = true;
        for (std::size_t k = 1; k < err.size(); ++k) ok = ok && err[k] < err[k - 1];
        if (ok) ++monotone;
        else worst = " (seed " + std::to_string(s) + " not monotone)";
    }
    return {monotone == 10, std::to_string(monotone) + "/10 seeds monotone over 3 halvings" + worst};
}

Outcome c3_skorokhod() {
    int cases = 0;
    double worst = 0;
    std::size_t max_big = 0, total_big = 0;
    const double eps = 0.6;
    for (std::uint64_t s = 0; cases < 100; ++s) {
        const auto t = random_cpp_triplet(10000 + s, s % 2 ? 3 : 2, s % 3 == 0 ? 0.0 : 0.5);
        const auto path = sample_levy_path(t, 2.0, 0.25, 20000 + s);
        std::size_t big = 0;
        for (const auto& j : path.jumps)
            if (op_norm(j.mark) >= eps) ++big;
        if (big > 4) continue;
        ++cases;
        max_big = std::max(max_big, big);
        total_big += big;
        const MatrixXd direct = exact_cpp_exponential(path, t).X.back();
        const MatrixXd recon = skorokhod_reconstruct(path, eps, Scheme::exact_cpp);
        worst = std::max(worst, (recon - direct).norm() / std::max(1.0, direct.norm()));
    }
    return {worst <= 1e-10, "100 cases, " + std::to_string(total_big) + " big jumps (max " +
                                std::to_string(max_big) + "/path), max error " + fmt("%.3e", worst)};
}

Outcome c4_det_slln() {
    const double T = 200;
    auto x = sample_log_det(builtin_triplet("standard_brownian(2)"), T, 1e-3, 200, 4004, DetSource::emery_product);
    for (auto& v : x) v /= T;
    const MeanSe m = mean_se(x);
    const double z = (m.mean + 1.0) / m.se;
    return {std::abs(z) <= 3, "mean " + fmt("%.5f", m.mean) + " se " + fmt("%.5f", m.se) + " z " + fmt("%.2f", z)};
}

Outcome c5_det_clt() {
    const double T = 50;
    auto x = sample_log_det(builtin_triplet("standard_brownian(2)"), T, 1e-3, 2000, 5005, DetSource::emery_product);
    for (auto& v : x) v = (v + T) / std::sqrt(2 * T);
    const double d = ks_statistic(x, normal_cdf);
    const double p = ks_pvalue(d, static_cast<double>(x.size()));
    return {p > 0.01, "KS D " + fmt("%.4f", d) + " p " + fmt("%.3f", p)};
}

Outcome c6_scalar() {
    const auto t = builtin_triplet("gbm1(0.1, 0.2)");
    const double T = 100;
    const auto est = lyapunov_estimate(t, FunctionalSpec::op_norm(), T, 2000, 6006);
    bool ok = std::abs(est.lambda_hat - 0.08) <= 3 * est.se;
    std::ostringstream os;
    os << "lambda " << fmt("%.5f", est.lambda_hat) << " se " << fmt("%.5f", est.se) << "; Lambda z:";
    const auto mf = lambda_moment_function(t, {-0.2, -0.1, 0.0, 0.1, 0.2}, T, 2000, 6006);
    for (const auto& r : mf.rows) {
        const double exact = r.s * 0.08 + r.s * r.s * 0.02;
        const double z = r.se > 0 ? (r.value - exact) / r.se : (r.value == exact ? 0.0 : INFINITY);
        ok = ok && std::abs(z) <= 3;
        os << ' ' << fmt("%.2f", z);
    }
    return {ok, os.str()};
}

Outcome c7_invariant_uniform() {
    const auto m = estimate_invariant_measure(builtin_triplet("standard_brownian(2)"), 0.1, 2500, 500, 50, 7007);
    const auto u = uniformity_test(m);
    return {u.p_effective > 0.01, "N " + std::to_string(m.points.size()) + " tau " + fmt("%.2f", u.tau) + " KS D " +
                                      fmt("%.4f", u.ks_stat) + " p_eff " + fmt("%.3f", u.p_effective)};
}

Outcome c8_cone() {
    const auto t = builtin_triplet("nonnegative_cpp");
    SkeletonOptions opts;
    VectorXd y(2);
    y << 0.6, 0.8;
    opts.start = ProjPoint(y);
    const auto m = estimate_invariant_measure(t, 0.5, 2200, 200, 20, 8008, opts);
    std::size_t outside = 0;
    for (const auto& p : m.points)
        if (p.v.minCoeff() < -1e-12) ++outside;
    return {outside == 0, std::to_string(outside) + " of " + std::to_string(m.points.size()) + " outside the orthant"};
}

Outcome c9_mixing() {
    std::vector<ProjPoint> starts;
    for (double a : {0.0, M_PI / 4, M_PI / 2, 3 * M_PI / 4}) starts.push_back(ProjPoint::from_angle(a));
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k) grid.push_back(k);
    const auto r = mixing_rate(builtin_triplet("standard_brownian(2)"), cos2theta_fn(), starts, grid, 2000, 9009);
    return {r.fitted && r.rate > 0 && r.r2 > 0.8,
            "d_hat " + fmt("%.4f", r.rate) + " se " + fmt("%.4f", r.rate_se) + " R2 " + fmt("%.4f", r.r2)};
}

Outcome c10_berry_esseen() {
    BerryEsseenOptions o;
    o.sim.dt = 0.25;
    const auto r = berry_esseen_curve(builtin_triplet("standard_brownian(2)"),
                                      FunctionalSpec::vector_norm(VectorXd::Unit(2, 0)), {4, 8, 16, 32, 64}, 50000,
                                      1010, o);
    std::ostringstream os;
    os << "slope " << fmt("%.3f", r.slope) << " R2 " << fmt("%.3f", r.r2) << "; sup dist:";
    for (const auto& row : r.rows) os << ' ' << fmt("%.4f", row.sup_dist);
    return {r.slope >= -0.8 && r.slope <= -0.2, os.str()};
}

Outcome c11_pathwise_bounds() {
    std::size_t checks = 0, viol = 0, det_viol = 0;
    const std::vector<std::string> names{"standard_brownian(2)", "rotation_rank1", "sl2_conservative",
                                         "nonnegative_cpp", "standard_brownian(3)"};
    Rng probe_rng = make_rng(1111, 0);
    for (std::size_t p = 0; p < 100; ++p) {
        const auto t = builtin_triplet(names[p % names.size()]);
        std::vector<VectorXd> probes;
        for (int k = 0; k < 10; ++k) probes.push_back(sample_uniform_point(t.d, probe_rng).v);
        const bool bm = t.has_gaussian_part();
        const auto path = sample_levy_path(t, 10.0, bm ? 0.01 : 1.0, 11000 + p);
        const auto e = bm ? emery_exponential(path) : exact_cpp_exponential(path, t, true);
        // 10 times per path: t = 1..10
        ExpPath sub;
        sub.d = e.d;
        const std::size_t stride = (e.grid.size() - 1) / 10;
        for (std::size_t k = stride; k < e.grid.size(); k += stride) {
            sub.grid.push_back(e.grid[k]);
            sub.X.push_back(e.X[k]);
        }
        const auto m = m_statistics(sub, probes, 1e-9);
        checks += m.checks;
        viol += m.violations;
        det_viol += m.det_violations;
    }
    return {checks >= 10000 && viol == 0 && det_viol == 0,
            std::to_string(checks) + " triples, " + std::to_string(viol) + " norm and " + std::to_string(det_viol) +
                " determinant violations"};
}

Outcome c12_mean() {
    const auto r = mean_check(builtin_triplet("rotation_rank1"), 1.0, 10000, 1212);
    return {r.max_abs_z <= 3, "max |z| " + fmt("%.3f", r.max_abs_z)};
}

Outcome c13_certification() {
    std::ostringstream os;
    bool ok = true;
    for (const char* name : {"standard_brownian(2)", "rotation_rank1", "irrational_rotation(1.0)"}) {
        const auto c = ip_certify(builtin_triplet(name));
        bool good = c.status == IpStatus::certified;
        if (good && c.route != IpRoute::brownian_full_rank) good = c.witness && is_proximal(c.witness_matrix());
        ok = ok && good;
        os << name << "=" << to_string(c.status) << "/" << to_string(c.route) << ' ';
    }
    const auto c = ip_certify(builtin_triplet("diagonal_reducible"));
    ok = ok && c.status == IpStatus::falsified_irreducibility;
    os << "diagonal_reducible=" << to_string(c.status);
    return {ok, os.str()};
}

Outcome c14_generator() {
    MatrixXd g0(2, 2), c(2, 2);
    g0 << 0.2, -1, 0.7, 0.1;
    c << 1, 2, -1, 0.5;
    const auto drift = MatrixLevyTriplet::from_drift(2, {}, g0, {}, "drift_only");
    const auto rows = generator_mc_check(drift, linear_test_function(c), MatrixXd::Identity(2, 2),
                                         {0.1, 0.05, 0.025, 0.0125}, 4, 1414);
    bool ok = true;
    std::ostringstream os;
    os << "linear errors:";
    for (std::size_t k = 0; k < rows.size(); ++k) {
        os << ' ' << fmt("%.2e", rows[k].abs_error);
        ok = ok && rows[k].se == 0 && rows[k].abs_error <= 2 * rows[k].h * std::abs(rows[k].generator) + 1e-12;
        if (k) {
            const double ratio = rows[k].abs_error / rows[k - 1].abs_error;
            ok = ok && ratio > 0.4 && ratio < 0.6;
        }
    }
    const auto bm = generator_mc_check(builtin_triplet("standard_brownian(2)"),
                                       bump_test_function(MatrixXd::Identity(2, 2), 1.0), MatrixXd::Identity(2, 2),
                                       {1e-3}, 100000, 1415);
    ok = ok && std::abs(bm[0].z) <= 3;
    os << "; bump quotient " << fmt("%.4f", bm[0].quotient) << " vs " << fmt("%.4f", bm[0].generator) << " z "
       << fmt("%.2f", bm[0].z);
    return {ok, os.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome c15_determinism() {
    const fs::path base = fs::temp_directory_path() / "levyflow_acceptance_c15";
    fs::remove_all(base);
    Json doc;
    doc["experiment"] = "determinant";
    doc["triplet"] = triplet_to_json(random_cpp_triplet(0, 2));
    doc["seed"] = 1000;
    doc["params"] = {{"T", 5}, {"dt", 0.5}, {"n_paths", 50}};
    std::vector<RunManifest> runs;
    for (const char* dir : {"a", "b"}) {
        doc["output_dir"] = (base / dir).string();
        runs.push_back(run_scenario(parse_scenario(doc)));
    }
    bool ok = runs[0].files == runs[1].files && !runs[0].files.empty();
    std::size_t bytes = 0;
    for (const auto& f : runs[0].files) {
        const std::string a = slurp(base / "a" / f), b = slurp(base / "b" / f);
        ok = ok && a == b && !a.empty();
        bytes += a.size();
    }
    return {ok, std::to_string(runs[0].files.size()) + " CSV files, " + std::to_string(bytes) + " bytes identical"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"C1 determinant oracle equality", c1_determinant_oracle},
        {"C2 emery convergence", c2_emery_convergence},
        {"C3 skorokhod reconstruction", c3_skorokhod},
        {"C4 determinant growth rate", c4_det_slln},
        {"C5 determinant normal limit", c5_det_clt},
        {"C6 scalar closed form", c6_scalar},
        {"C7 invariant measure uniform", c7_invariant_uniform},
        {"C8 cone invariance", c8_cone},
        {"C9 mixing decay", c9_mixing},
        {"C10 berry-esseen slope", c10_berry_esseen},
        {"C11 pathwise bounds", c11_pathwise_bounds},
        {"C12 mean identity", c12_mean},
        {"C13 ip certification", c13_certification},
        {"C14 generator check", c14_generator},
        {"C15 determinism", c15_determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt("%.1f", secs) << " s]"
                  << std::endl;
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << (15 - failed) << "/15" << std::endl;
    return failed ? 1 : 0;
}
