#include "levyflow/scenario.hpp"

#include "levyflow/csv.hpp"
#include "levyflow/determinant.hpp"
#include "levyflow/errors.hpp"
#include "levyflow/geometry.hpp"
#include "levyflow/limits.hpp"
#include "levyflow/path_sampler.hpp"
#include "levyflow/projective.hpp"
#include "levyflow/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace levyflow {

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"simulate", "determinant",       "lyapunov", "clt",
                                                "berry_esseen", "invariant_measure", "mixing",   "ip_certify",
                                                "generator_check", "mean_check"};
    return names;
}

namespace {

/// Typed access to the params object with key paths in errors.
class Params {
public:
    explicit Params(const Json& j) : j_(j) {}

    bool has(const std::string& k) const { return j_.contains(k); }

    double num(const std::string& k) const { return as_num(at(k), k); }
    double num_or(const std::string& k, double def) const { return has(k) ? num(k) : def; }
    double positive(const std::string& k) const {
        const double v = num(k);
        if (!(v > 0)) throw ConfigError(path(k), "must be positive");
        return v;
    }
    double positive_or(const std::string& k, double def) const { return has(k) ? positive(k) : def; }

    std::size_t count(const std::string& k) const {
        const Json& v = at(k);
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path(k), "expected a nonnegative integer");
        return v.get<std::size_t>();
    }
    std::size_t count_or(const std::string& k, std::size_t def) const { return has(k) ? count(k) : def; }

    std::vector<double> list(const std::string& k) const {
        const Json& v = at(k);
        if (!v.is_array() || v.empty()) throw ConfigError(path(k), "expected a nonempty list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_num(v[i], k + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::string str_or(const std::string& k, const std::string& def) const {
        if (!has(k)) return def;
        if (!at(k).is_string()) throw ConfigError(path(k), "expected a string");
        return at(k).get<std::string>();
    }

    const Json& at(const std::string& k) const {
        const auto it = j_.find(k);
        if (it == j_.end()) throw ConfigError(path(k), "missing");
        return *it;
    }

    static std::string path(const std::string& k) { return "params." + k; }

private:
    static double as_num(const Json& v, const std::string& k) {
        if (!v.is_number()) throw ConfigError(path(k), "expected a number");
        return v.get<double>();
    }
    const Json& j_;
};

VectorXd vector_from_json(const Json& v, int d, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != d)
        throw ConfigError(where, "expected a list of " + std::to_string(d) + " numbers");
    VectorXd out(d);
    for (int i = 0; i < d; ++i) {
        if (!v[static_cast<std::size_t>(i)].is_number()) throw ConfigError(where, "expected numbers");
        out(i) = v[static_cast<std::size_t>(i)].get<double>();
    }
    return out;
}

VectorXd unit_from_json(const Json& v, int d, const std::string& where) {
    const VectorXd u = vector_from_json(v, d, where);
    if (!(u.norm() > 0)) throw ConfigError(where, "zero vector");
    return u.normalized();
}

FunctionalSpec functional_from(const Params& p, const std::string& key, int d, FunctionalSpec def) {
    if (!p.has(key)) return def;
    const Json& j = p.at(key);
    const std::string where = Params::path(key);
    if (j.is_string()) {
        if (j.get<std::string>() == "op_norm") return FunctionalSpec::op_norm();
        throw ConfigError(where, "string form only allows op_norm");
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigError(where + ".kind", "missing functional kind");
    FunctionalSpec f;
    try {
        f.kind = functional_kind_from_string(j["kind"].get<std::string>());
    } catch (const UnknownName& e) {
        throw ConfigError(where + ".kind", e.what());
    }
    if (f.kind == FunctionalSpec::Kind::vector_norm || f.kind == FunctionalSpec::Kind::abs_inner) {
        if (!j.contains("y")) throw ConfigError(where + ".y", "missing");
        f.y = unit_from_json(j["y"], d, where + ".y");
    }
    if (f.kind == FunctionalSpec::Kind::abs_inner) {
        if (!j.contains("z")) throw ConfigError(where + ".z", "missing");
        f.z = unit_from_json(j["z"], d, where + ".z");
    }
    if (f.kind == FunctionalSpec::Kind::entry) {
        if (!j.contains("i") || !j.contains("j") || !j["i"].is_number_integer() || !j["j"].is_number_integer())
            throw ConfigError(where, "entry needs integer i and j (0-based)");
        f.i = j["i"].get<int>();
        f.j = j["j"].get<int>();
    }
    try {
        f.check(d);
    } catch (const InvalidArgument& e) {
        throw ConfigError(where, e.what());
    }
    return f;
}

HolderFn holder_from(const Json& j, const std::string& where) {
    const std::string name = j.is_string() ? j.get<std::string>()
                             : (j.is_object() && j.contains("name") && j["name"].is_string())
                                 ? j["name"].get<std::string>()
                                 : throw ConfigError(where, "expected a test function name");
    if (name == "cos2theta") return cos2theta_fn();
    if (name == "constant") return constant_fn(j.is_object() && j.contains("value") ? j["value"].get<double>() : 1.0);
    if (name == "coord_sq") {
        if (!j.is_object() || !j.contains("i") || !j["i"].is_number_integer())
            throw ConfigError(where + ".i", "coord_sq needs integer i");
        return coordinate_square_fn(j["i"].get<int>());
    }
    throw ConfigError(where + ".name", "unknown test function '" + name + "'");
}

std::vector<ProjPoint> starts_from(const Params& p, const std::string& key, int d) {
    const Json& j = p.at(key);
    const std::string where = Params::path(key);
    if (!j.is_array() || j.size() < 2) throw ConfigError(where, "expected at least two start points");
    std::vector<ProjPoint> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string w = where + "[" + std::to_string(i) + "]";
        if (j[i].is_number()) {
            if (d != 2) throw ConfigError(w, "angles need d = 2");
            out.push_back(ProjPoint::from_angle(j[i].get<double>()));
        } else {
            out.emplace_back(unit_from_json(j[i], d, w));
        }
    }
    return out;
}

SmoothTestFunction smooth_from(const Params& p, const std::string& key, int d) {
    const Json& j = p.at(key);
    const std::string where = Params::path(key);
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ConfigError(where + ".kind", "missing test function kind");
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "linear") {
        if (!j.contains("c")) throw ConfigError(where + ".c", "missing");
        return linear_test_function(matrix_from_json(j["c"], d, d, where + ".c"));
    }
    if (kind == "quadratic") {
        if (!j.contains("s")) throw ConfigError(where + ".s", "missing");
        const MatrixXd c = j.contains("c") ? matrix_from_json(j["c"], d, d, where + ".c") : MatrixXd::Zero(d, d);
        return quadratic_test_function(matrix_from_json(j["s"], d * d, d * d, where + ".s"), c);
    }
    if (kind == "bump") {
        const MatrixXd center =
            j.contains("center") ? matrix_from_json(j["center"], d, d, where + ".center") : MatrixXd::Identity(d, d);
        const double width = j.contains("width") && j["width"].is_number() ? j["width"].get<double>() : 1.0;
        if (!(width > 0)) throw ConfigError(where + ".width", "must be positive");
        return bump_test_function(center, width);
    }
    throw ConfigError(where + ".kind", "unknown test function kind '" + kind + "'");
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

struct Runner {
    const Scenario& s;
    fs::path dir;
    RunManifest& m;

    std::string file(const std::string& name) {
        m.files.push_back(name);
        return (dir / name).string();
    }
};

void run_simulate(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const double T = p.positive("T");
    const double dt = p.positive("dt");
    const std::string scheme_name = p.str_or("scheme", "auto");
    Scheme scheme = natural_scheme(t);
    if (scheme_name == "emery")
        scheme = Scheme::emery;
    else if (scheme_name == "exact_cpp")
        scheme = Scheme::exact_cpp;
    else if (scheme_name != "auto")
        throw ConfigError("params.scheme", "expected auto, emery or exact_cpp");
    if (scheme == Scheme::exact_cpp && t.has_gaussian_part())
        throw ConfigError("params.scheme", "exact_cpp needs a triplet without Gaussian part");
    const LevyPath path = sample_levy_path(t, T, dt, r.s.seed);
    const ExpPath e = scheme == Scheme::exact_cpp ? exact_cpp_exponential(path, t) : emery_exponential(path, false);
    write_path_csv(r.file("simulate.csv"), path, e);
    write_det_csv(r.file("simulate_det.csv"), det_of_path(e));
    const auto ld = log_abs_det(e.X.back());
    r.m.summary["scheme"] = to_string(scheme);
    r.m.summary["n_cells"] = path.cells();
    r.m.summary["n_jumps"] = path.jumps.size();
    r.m.summary["log_abs_det_T"] = num(ld.log_abs);
    r.m.summary["op_norm_T"] = num(op_norm(e.X.back()));
}

void run_determinant(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const double T = p.positive("T");
    const std::size_t n_paths = p.count_or("n_paths", 1);
    if (n_paths == 0) throw ConfigError("params.n_paths", "must be >= 1");
    const bool cpp = !t.has_gaussian_part();
    const double dt = p.positive_or("dt", cpp ? T : 1e-2);
    CsvWriter csv(r.file("determinant.csv"),
                  {"path", "log_abs_det_X", "sign_det_X", "log_abs_D_closed", "sign_D_closed", "rel_err"});
    double max_rel = 0, sum_growth = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        Rng rng = make_rng(r.s.seed, i);
        const LevyPath path = sample_levy_path(t, T, dt, rng);
        const ExpPath e = cpp ? exact_cpp_exponential(path, t) : emery_exponential(path, false);
        const auto direct = log_abs_det(e.X.back());
        const auto closed = det_closed_form(path, t);
        if (i == 0) {
            auto series = det_closed_form(path, t);
            write_det_csv(r.file("determinant_series.csv"), series);
        }
        const auto& c = closed.back();
        const double rel = direct.sign == c.sign ? std::abs(std::expm1(direct.log_abs - c.log_abs)) : 2.0;
        max_rel = std::max(max_rel, rel);
        sum_growth += direct.log_abs / T;
        csv.row(std::vector<double>{static_cast<double>(i), direct.log_abs, static_cast<double>(direct.sign),
                                    c.log_abs, static_cast<double>(c.sign), rel});
    }
    const CheckTriplet ct = check_characteristics(t);
    const DetCltParams clt = det_clt_params(t, T);
    const SlMembership sl = sl_membership(t);
    r.m.summary["scheme"] = cpp ? "exact_cpp" : "emery";
    r.m.summary["max_rel_err"] = num(max_rel);
    r.m.summary["mean_growth"] = num(sum_growth / static_cast<double>(n_paths));
    r.m.summary["det_growth_mean"] = num(det_growth_mean(t));
    r.m.summary["sl_member"] = sl.member;
    Json nu = Json::array();
    for (const auto& a : ct.nu_D) nu.push_back(Json{{"rate", a.rate}, {"value", a.value}});
    r.m.extra["check_triplet"] = {{"sigma_D", ct.sigma_D}, {"gamma_D", ct.gamma_D}, {"nu_D", nu},
                                  {"mean_exists", ct.mean_exists}, {"mean", ct.mean ? num(*ct.mean) : Json(nullptr)}};
    r.m.extra["clt"] = {{"centering", num(clt.centering)}, {"scale", num(clt.scale)},
                        {"applicable", clt.applicable}, {"t2_at_1", clt.t2_at_1},
                        {"t2_tail_integral", clt.t2_tail_integral}};
    r.m.extra["sl_failed_conditions"] = sl.failed_conditions;
}

SimulationOptions sim_from(const Params& p) { return {p.positive_or("dt", 1e-2)}; }

void run_lyapunov(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const double T = p.positive("T");
    const std::size_t n_paths = p.count("n_paths");
    if (n_paths < 2) throw ConfigError("params.n_paths", "must be >= 2");
    const FunctionalSpec F = functional_from(p, "F", t.d, FunctionalSpec::op_norm());
    if (F.kind != FunctionalSpec::Kind::op_norm && F.kind != FunctionalSpec::Kind::vector_norm)
        throw ConfigError("params.F.kind", "lyapunov needs op_norm or vector_norm");
    const auto opts = sim_from(p);
    const auto samples = sample_log_functional(t, F, {T}, n_paths, r.s.seed, opts);
    std::vector<double> x(n_paths);
    {
        CsvWriter csv(r.file("lyapunov.csv"), {"path", "log_F_over_T"});
        for (std::size_t i = 0; i < n_paths; ++i) {
            x[i] = samples[i][0] / T;
            csv.row(std::vector<double>{static_cast<double>(i), x[i]});
        }
    }
    const MeanSe ms = mean_se(x);
    r.m.summary["lambda_hat"] = num(ms.mean);
    r.m.summary["lambda_se"] = num(ms.se);
    r.m.summary["F"] = F.describe();
    if (p.has("s_grid")) {
        const auto s_grid = p.list("s_grid");
        const double n = p.positive_or("n", T);
        const auto mf = lambda_moment_function(t, s_grid, n, n_paths, r.s.seed, opts, F);
        CsvWriter csv(r.file("lambda.csv"), {"s", "Lambda", "se"});
        for (const auto& row : mf.rows) csv.row(std::vector<double>{row.s, row.value, row.se});
        r.m.summary["Lambda_d1"] = num(mf.d1);
        r.m.summary["Lambda_d1_se"] = num(mf.d1_se);
        r.m.summary["sigma2_hat"] = num(mf.d2);
        r.m.summary["sigma2_se"] = num(mf.d2_se);
    }
}

void run_clt(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const double T = p.positive("T");
    const std::size_t n_paths = p.count("n_paths");
    if (n_paths < 4) throw ConfigError("params.n_paths", "must be >= 4");
    const FunctionalSpec F = functional_from(p, "F", t.d, FunctionalSpec::op_norm());
    const auto opts = sim_from(p);
    const CltReport rep = clt_diagnostic(t, F, T, n_paths, r.s.seed, opts);
    const auto samples = sample_log_functional(t, F, {T}, n_paths, r.s.seed, opts);
    const double sd = std::sqrt(rep.sigma2_hat * T);
    {
        std::vector<std::string> header{"path", "log_F", "standardized"};
        if (!rep.log_delta.empty()) header.push_back("log_delta");
        CsvWriter csv(r.file("clt.csv"), header);
        for (std::size_t i = 0; i < n_paths; ++i) {
            const double x = samples[i][0];
            std::vector<double> row{static_cast<double>(i), x, sd > 0 ? (x - rep.lambda_hat * T) / sd : 0.0};
            if (!rep.log_delta.empty()) row.push_back(rep.log_delta[i]);
            csv.row(row);
        }
    }
    r.m.summary["lambda_hat"] = num(rep.lambda_hat);
    r.m.summary["lambda_se"] = num(rep.lambda_se);
    r.m.summary["sigma2_hat"] = num(rep.sigma2_hat);
    r.m.summary["sigma2_se"] = num(rep.sigma2_se);
    r.m.summary["ks_stat"] = num(rep.ks_stat);
    r.m.summary["ks_p"] = num(rep.ks_p);
    r.m.summary["degenerate"] = rep.degenerate;
    r.m.summary["F"] = F.describe();
}

EmpiricalMeasure measure_from(const MatrixLevyTriplet& t, const Params& p, std::uint64_t seed) {
    const double h = p.positive("h");
    const std::size_t n_steps = p.count("n_steps");
    const std::size_t burn_in = p.count_or("burn_in", 0);
    const std::size_t chains = p.count_or("n_chains", 1);
    if (n_steps <= burn_in) throw ConfigError("params.n_steps", "must exceed burn_in");
    if (chains == 0) throw ConfigError("params.n_chains", "must be >= 1");
    SkeletonOptions opts;
    opts.dt = p.positive_or("dt", 1e-2);
    if (p.has("start")) opts.start = ProjPoint(unit_from_json(p.at("start"), t.d, "params.start"));
    return estimate_invariant_measure(t, h, n_steps, burn_in, chains, seed, opts);
}

void run_berry_esseen(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const auto t_grid = p.list("t_grid");
    const std::size_t n_paths = p.count("n_paths");
    if (n_paths < 4) throw ConfigError("params.n_paths", "must be >= 4");
    const FunctionalSpec F = functional_from(p, "F", t.d, FunctionalSpec::vector_norm(VectorXd::Unit(t.d, 0)));
    BerryEsseenOptions opts;
    opts.sim = sim_from(p);
    if (p.has("lambda")) opts.lambda = p.num("lambda");
    if (p.has("sigma")) opts.sigma = p.positive("sigma");
    if (p.has("z_grid")) opts.z_grid = p.list("z_grid");
    std::optional<EmpiricalMeasure> measure;
    if (p.has("phi")) {
        opts.phi = holder_from(p.at("phi"), "params.phi");
        if (p.has("pi_phi")) {
            opts.pi_phi = p.num("pi_phi");
        } else if (p.has("measure")) {
            measure = measure_from(t, Params(p.at("measure")), r.s.seed ^ 0x5bd1e995ULL);
            opts.measure = &*measure;
        }
    }
    BerryEsseenReport rep;
    try {
        rep = berry_esseen_curve(t, F, t_grid, n_paths, r.s.seed, opts);
    } catch (const RequiresInvariantMeasure& e) {
        throw ConfigError("params.measure", e.what());
    }
    CsvWriter csv(r.file("berry_esseen.csv"), {"t", "sup_dist", "n_paths"});
    Json curve = Json::array();
    for (const auto& row : rep.rows) {
        csv.row(std::vector<double>{row.t, row.sup_dist, static_cast<double>(row.n_paths)});
        curve.push_back(Json{{"t", row.t}, {"sup_dist", row.sup_dist}, {"n_paths", row.n_paths}});
    }
    r.m.summary["slope"] = num(rep.slope);
    r.m.summary["r2"] = num(rep.r2);
    r.m.extra["fit"] = {{"slope", num(rep.slope)}, {"intercept", num(rep.intercept)}, {"r2", num(rep.r2)},
                        {"pi_phi", num(rep.pi_phi)}};
    r.m.extra["curve"] = curve;
}

void run_invariant_measure(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const EmpiricalMeasure m = measure_from(t, p, r.s.seed);
    write_measure_csv(r.file("measure.csv"), m);
    std::size_t outside = 0;
    for (const auto& pt : m.points)
        if (pt.v.minCoeff() < -1e-12) ++outside;
    r.m.summary["n_points"] = m.points.size();
    r.m.summary["outside_positive_orthant"] = outside;
    if (t.d == 2) {
        write_angle_histogram(r.file("histogram.csv"), m, p.count_or("bins", 36));
        const UniformityTest u = uniformity_test(m);
        r.m.summary["ks_stat"] = num(u.ks_stat);
        r.m.summary["ks_p"] = num(u.p_effective);
        r.m.summary["ks_p_nominal"] = num(u.p_nominal);
        r.m.summary["tau"] = num(u.tau);
    }
}

void run_mixing(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const HolderFn f = p.has("f") ? holder_from(p.at("f"), "params.f")
                                  : (t.d == 2 ? cos2theta_fn() : coordinate_square_fn(0));
    const auto starts = starts_from(p, "starts", t.d);
    const auto t_grid = p.list("t_grid");
    const std::size_t n_paths = p.count("n_paths");
    if (n_paths < 2) throw ConfigError("params.n_paths", "must be >= 2");
    const MixingReport rep = mixing_rate(t, f, starts, t_grid, n_paths, r.s.seed, p.positive_or("dt", 1e-2));
    CsvWriter csv(r.file("mixing.csv"), {"t", "sup_diff", "se"});
    for (const auto& row : rep.rows) csv.row(std::vector<double>{row.t, row.sup_diff, row.se});
    r.m.summary["rate"] = num(rep.rate);
    r.m.summary["rate_se"] = num(rep.rate_se);
    r.m.summary["prefactor"] = num(rep.prefactor);
    r.m.summary["r2"] = num(rep.r2);
    r.m.summary["fitted"] = rep.fitted;
    r.m.summary["no_decay"] = rep.no_decay;
}

void run_ip_certify(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const IpCertificate c =
        ip_certify(t, p.count_or("search_depth", 3), p.count_or("n_samples", 2000), r.s.seed);
    r.m.summary["status"] = to_string(c.status);
    r.m.summary["route"] = to_string(c.route);
    Json cert;
    cert["status"] = to_string(c.status);
    cert["route"] = to_string(c.route);
    cert["irreducibility"] = c.irreducibility;
    cert["proximal_found"] = c.proximal_found;
    cert["generator_labels"] = c.generator_labels;
    if (c.witness) cert["witness"] = *c.witness;
    if (c.counterexample) {
        Json fam = Json::array();
        for (const auto& sub : *c.counterexample) {
            Json v = Json::array();
            for (Eigen::Index i = 0; i < sub.v.size(); ++i) v.push_back(sub.v(i));
            fam.push_back(Json{{"kind", sub.kind == Subspace::Kind::line ? "line" : "plane"}, {"v", v}});
        }
        cert["counterexample"] = fam;
    }
    r.m.extra["certificate"] = cert;
    std::vector<std::string> header{"index", "label"};
    for (int j = 0; j < t.d; ++j)
        for (int i = 0; i < t.d; ++i) header.push_back("g_" + std::to_string(i + 1) + std::to_string(j + 1));
    CsvWriter csv(r.file("generators.csv"), header);
    for (std::size_t k = 0; k < c.generators.size(); ++k) {
        std::vector<std::string> row{std::to_string(k), c.generator_labels[k]};
        const VectorXd v = vec(c.generators[k]);
        for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(format_double(v(i)));
        csv.row(row);
    }
}

void run_generator_check(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const SmoothTestFunction f = smooth_from(p, "f", t.d);
    const MatrixXd x = p.has("x") ? matrix_from_json(p.at("x"), t.d, t.d, "params.x") : MatrixXd::Identity(t.d, t.d);
    const auto h_grid = p.list("h_grid");
    const std::size_t n_paths = p.count("n_paths");
    if (n_paths < 2) throw ConfigError("params.n_paths", "must be >= 2");
    const int substeps = static_cast<int>(p.count_or("substeps", 4));
    if (substeps < 1) throw ConfigError("params.substeps", "must be >= 1");
    std::vector<GeneratorCheckRow> rows;
    try {
        rows = generator_mc_check(t, f, x, h_grid, n_paths, r.s.seed, substeps);
    } catch (const InvalidStep& e) {
        throw ConfigError("params.h_grid", e.what());
    }
    CsvWriter csv(r.file("generator_check.csv"), {"h", "quotient", "se", "generator", "z", "abs_error"});
    double max_z = 0;
    for (const auto& row : rows) {
        csv.row(std::vector<double>{row.h, row.quotient, row.se, row.generator, row.z, row.abs_error});
        max_z = std::max(max_z, std::abs(row.z));
    }
    r.m.summary["generator"] = num(rows.empty() ? 0.0 : rows.front().generator);
    r.m.summary["max_abs_z"] = num(max_z);
}

void run_mean_check(Runner& r, const Params& p) {
    const auto& t = r.s.triplet;
    const double tt = p.positive("t");
    const std::size_t n_paths = p.count("n_paths");
    if (n_paths < 2) throw ConfigError("params.n_paths", "must be >= 2");
    const MeanCheckReport rep = mean_check(t, tt, n_paths, r.s.seed, p.positive_or("dt", 1e-2));
    CsvWriter csv(r.file("mean_check.csv"), {"i", "j", "mc_mean", "se", "target", "z"});
    for (int j = 0; j < t.d; ++j)
        for (int i = 0; i < t.d; ++i)
            csv.row(std::vector<double>{static_cast<double>(i), static_cast<double>(j), rep.mc_mean(i, j),
                                        rep.se(i, j), rep.target(i, j), rep.z(i, j)});
    r.m.summary["max_abs_z"] = num(rep.max_abs_z);
    r.m.summary["scheme"] = to_string(rep.scheme);
}

}  // namespace

Scenario parse_scenario(const Json& doc, const ScenarioOverrides& over) {
    if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
    Scenario s;
    if (over.experiment) {
        s.experiment = *over.experiment;
        if (doc.contains("experiment") &&
            (!doc["experiment"].is_string() || doc["experiment"].get<std::string>() != s.experiment))
            throw ConfigError("experiment", "config names a different experiment than the command line");
    } else {
        if (!doc.contains("experiment")) throw ConfigError("experiment", "missing");
        if (!doc["experiment"].is_string()) throw ConfigError("experiment", "expected a string");
        s.experiment = doc["experiment"].get<std::string>();
    }
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), s.experiment) == names.end())
        throw ConfigError("experiment", "unknown experiment '" + s.experiment + "'");

    if (over.seed) {
        s.seed = *over.seed;
    } else {
        if (!doc.contains("seed")) throw ConfigError("seed", "missing");
        if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<long long>() >= 0))
            throw ConfigError("seed", "expected a nonnegative integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }

    if (!doc.contains("triplet")) throw ConfigError("triplet", "missing");
    s.triplet_doc = doc["triplet"];
    if (s.triplet_doc.is_string()) {
        try {
            s.triplet = builtin_triplet(s.triplet_doc.get<std::string>());
        } catch (const UnknownName& e) {
            throw ConfigError("triplet", e.what());
        }
    } else {
        s.triplet = triplet_from_json(s.triplet_doc, "triplet");
    }
    require_valid(s.triplet);

    if (doc.contains("params")) {
        if (!doc["params"].is_object()) throw ConfigError("params", "expected an object");
        s.params = doc["params"];
    }
    if (over.output_dir)
        s.output_dir = *over.output_dir;
    else if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
        s.output_dir = doc["output_dir"].get<std::string>();
    }
    return s;
}

Scenario load_scenario(const std::string& config_path, const ScenarioOverrides& over) {
    return parse_scenario(read_json_file(config_path), over);
}

std::string scenario_hash(const Scenario& s) {
    const Json canon = {{"experiment", s.experiment}, {"triplet", s.triplet_doc}, {"seed", s.seed}, {"params", s.params}};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon.dump())));
    return buf;
}

Json RunManifest::to_json() const {
    return {{"experiment", experiment}, {"scenario_hash", scenario_hash}, {"tool_version", tool_version},
            {"seed", seed}, {"wall_clock_seconds", wall_clock_seconds}, {"summary", summary},
            {"files", files}, {"extra", extra}};
}

RunManifest RunManifest::from_json(const Json& doc) {
    RunManifest m;
    try {
        m.experiment = doc.at("experiment").get<std::string>();
        m.scenario_hash = doc.at("scenario_hash").get<std::string>();
        m.tool_version = doc.value("tool_version", "");
        m.seed = doc.at("seed").get<std::uint64_t>();
        m.wall_clock_seconds = doc.value("wall_clock_seconds", 0.0);
        m.summary = doc.value("summary", Json::object());
        m.files = doc.value("files", std::vector<std::string>{});
        m.extra = doc.value("extra", Json::object());
    } catch (const Json::exception& e) {
        throw ConfigError("manifest", e.what());
    }
    return m;
}

RunManifest run_scenario(const Scenario& s) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    m.experiment = s.experiment;
    m.scenario_hash = scenario_hash(s);
    m.tool_version = LEVYFLOW_VERSION;
    m.seed = s.seed;
    m.output_dir = s.output_dir;
    fs::create_directories(s.output_dir);
    Runner r{s, fs::path(s.output_dir), m};
    const Params p(s.params);
    const std::string& e = s.experiment;
    if (e == "simulate")
        run_simulate(r, p);
    else if (e == "determinant")
        run_determinant(r, p);
    else if (e == "lyapunov")
        run_lyapunov(r, p);
    else if (e == "clt")
        run_clt(r, p);
    else if (e == "berry_esseen")
        run_berry_esseen(r, p);
    else if (e == "invariant_measure")
        run_invariant_measure(r, p);
    else if (e == "mixing")
        run_mixing(r, p);
    else if (e == "ip_certify")
        run_ip_certify(r, p);
    else if (e == "generator_check")
        run_generator_check(r, p);
    else if (e == "mean_check")
        run_mean_check(r, p);
    else
        throw ConfigError("experiment", "unknown experiment '" + e + "'");
    m.summary["triplet"] = s.triplet.name.empty() ? "inline" : s.triplet.name;
    m.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream out(fs::path(s.output_dir) / "manifest.json");
    if (!out) throw Error("cannot write manifest in '" + s.output_dir + "'");
    out << m.to_json().dump(2) << '\n';
    return m;
}

RunManifest run_scenario(const std::string& config_path, const ScenarioOverrides& over) {
    return run_scenario(load_scenario(config_path, over));
}

RunManifest load_manifest(const std::string& path) {
    RunManifest m = RunManifest::from_json(read_json_file(path));
    m.output_dir = fs::path(path).parent_path().string();
    return m;
}

void emit_report(const std::vector<RunManifest>& manifests, const std::string& csv_file) {
    for (const auto& m : manifests)
        if (m.experiment != manifests.front().experiment)
            throw MixedKinds("manifests mix experiments '" + manifests.front().experiment + "' and '" +
                             m.experiment + "'");
    auto cell = [](const Json& v) -> std::string {
        if (v.is_number()) return format_double(v.get<double>());
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    };
    if (!manifests.empty() && manifests.front().experiment == "berry_esseen") {
        CsvWriter csv(csv_file, {"scenario_hash", "seed", "t", "sup_dist", "n_paths"});
        for (const auto& m : manifests)
            for (const auto& row : m.extra.value("curve", Json::array()))
                csv.row(std::vector<std::string>{m.scenario_hash, std::to_string(m.seed), cell(row.at("t")),
                                                 cell(row.at("sup_dist")), cell(row.at("n_paths"))});
        return;
    }
    std::set<std::string> keys;
    for (const auto& m : manifests)
        for (auto it = m.summary.begin(); it != m.summary.end(); ++it) keys.insert(it.key());
    std::vector<std::string> header{"scenario_hash", "experiment", "seed"};
    header.insert(header.end(), keys.begin(), keys.end());
    CsvWriter csv(csv_file, header);
    for (const auto& m : manifests) {
        std::vector<std::string> row{m.scenario_hash, m.experiment, std::to_string(m.seed)};
        for (const auto& k : keys) row.push_back(m.summary.contains(k) ? cell(m.summary[k]) : "");
        csv.row(row);
    }
}

}  // namespace levyflow
