#include "levyflow/levy_model.hpp"

#include "levyflow/errors.hpp"

#include <cmath>
#include <sstream>

namespace levyflow {

namespace {

bool inside_unit_ball(const MatrixXd& a) { return a.norm() <= 1.0; }

}  // namespace

MatrixXd MatrixLevyTriplet::small_jump_compensator() const {
    MatrixXd c = MatrixXd::Zero(d, d);
    for (const auto& atom : jumps.atoms)
        if (inside_unit_ball(atom.mark)) c += jumps.rate * atom.prob * atom.mark;
    return c;
}

MatrixXd MatrixLevyTriplet::drift() const {
    if (drift0) return *drift0;
    return gamma - small_jump_compensator();
}

MatrixXd MatrixLevyTriplet::mean_L1() const {
    MatrixXd m = drift();
    for (const auto& atom : jumps.atoms) m += jumps.rate * atom.prob * atom.mark;
    return m;
}

MatrixLevyTriplet MatrixLevyTriplet::from_drift(int d, const MatrixXd& sigma, const MatrixXd& drift0,
                                                JumpSpec jumps, std::string name) {
    MatrixLevyTriplet t;
    t.d = d;
    t.sigma = sigma.size() ? sigma : MatrixXd::Zero(d * d, d * d);
    t.drift0 = drift0;
    t.jumps = std::move(jumps);
    t.name = std::move(name);
    t.gamma = drift0 + t.small_jump_compensator();
    return t;
}

ValidationReport validate(const MatrixLevyTriplet& t) {
    ValidationReport r;
    auto fail = [&r](std::string rule, std::string msg, long idx = -1) {
        r.violations.push_back({std::move(rule), std::move(msg), idx});
    };
    const int d = t.d;
    if (d < 1) {
        fail("dimension", "d must be >= 1");
        r.valid = false;
        return r;
    }
    const Eigen::Index d2 = static_cast<Eigen::Index>(d) * d;
    if (t.sigma.rows() != d2 || t.sigma.cols() != d2) {
        fail("sigma-shape", "sigma must be d^2 x d^2");
    } else {
        const double scale = t.sigma.cwiseAbs().maxCoeff();
        if ((t.sigma - t.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1 + scale))
            fail("sigma-symmetric", "sigma is not symmetric");
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (t.sigma + t.sigma.transpose()),
                                                   Eigen::EigenvaluesOnly);
        const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
        if (es.eigenvalues().minCoeff() < -kPsdTol * norm)
            fail("sigma-psd", "sigma has eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
    }
    if (t.gamma.rows() != d || t.gamma.cols() != d) fail("gamma-shape", "gamma must be d x d");
    if (t.drift0 && (t.drift0->rows() != d || t.drift0->cols() != d))
        fail("drift0-shape", "drift0 must be d x d");

    const auto& js = t.jumps;
    if (!(js.rate >= 0) || !std::isfinite(js.rate)) fail("jump-rate", "rate must be finite and >= 0");
    if (js.truncation_eps && !(*js.truncation_eps > 0)) fail("truncation-eps", "truncation eps must be > 0");
    double psum = 0;
    bool shapes_ok = true;
    for (std::size_t i = 0; i < js.atoms.size(); ++i) {
        const auto& a = js.atoms[i];
        const long idx = static_cast<long>(i);
        psum += a.prob;
        if (!(a.prob > 0)) fail("atom-prob", "atom probability must be > 0", idx);
        if (a.mark.rows() != d || a.mark.cols() != d) {
            fail("atom-shape", "atom mark must be d x d", idx);
            shapes_ok = false;
            continue;
        }
        if (a.mark.cwiseAbs().maxCoeff() == 0) fail("atom-nonzero", "atom mark is zero", idx);
        const double det = (MatrixXd::Identity(d, d) + a.mark).determinant();
        if (!(std::abs(det) > kDetTol))
            fail("nonsingular-jump", "det(I + a) = " + std::to_string(det), idx);
        for (std::size_t k = 0; k < i; ++k)
            if (js.atoms[k].mark.rows() == d && js.atoms[k].mark.cols() == d && js.atoms[k].mark == a.mark)
                fail("atom-distinct", "atom duplicates atom " + std::to_string(k), idx);
    }
    if (js.rate > 0 && js.atoms.empty()) fail("atom-prob", "positive rate needs atoms");
    if (js.rate > 0 && !js.atoms.empty() && std::abs(psum - 1.0) > 1e-12)
        fail("atom-prob-sum", "atom probabilities sum to " + std::to_string(psum));

    const bool shapes = t.gamma.rows() == d && t.gamma.cols() == d && shapes_ok;
    if (t.drift0 && shapes && t.drift0->rows() == d && t.drift0->cols() == d) {
        const MatrixXd expected = *t.drift0 + t.small_jump_compensator();
        if ((expected - t.gamma).cwiseAbs().maxCoeff() > 1e-12 * (1 + expected.cwiseAbs().maxCoeff()))
            fail("gamma-consistency", "gamma != drift0 + small-jump compensator");
    }
    r.valid = r.violations.empty();
    return r;
}

void require_valid(const MatrixLevyTriplet& t) {
    const auto r = validate(t);
    if (r.valid) return;
    std::ostringstream os;
    os << "invalid triplet";
    if (!t.name.empty()) os << " '" << t.name << "'";
    for (const auto& v : r.violations) {
        os << "; " << v.rule;
        if (v.index >= 0) os << "[" << v.index << "]";
        os << ": " << v.message;
    }
    throw ValidationError(os.str());
}

MomentReport moment_check(const MatrixLevyTriplet& t, double epsilon) {
    if (!(epsilon > 0)) throw InvalidArgument("moment_check: epsilon must be > 0");
    MomentReport r;
    r.epsilon = epsilon;
    const MatrixXd id = MatrixXd::Identity(t.d, t.d);
    double small_bound = 0;
    bool all_small = true;
    for (const auto& atom : t.jumps.atoms) {
        const MatrixXd g = id + atom.mark;
        if (!(std::abs(g.determinant()) > kDetTol)) throw SingularJump("moment_check: det(I + a) = 0");
        const double w = t.jumps.rate * atom.prob;
        const double n = op_norm(atom.mark);
        const double ninv = op_norm(MatrixXd(g.inverse() - id));
        if (n > 1) r.integral_big += w * std::pow(n, epsilon);
        if (ninv > 1) r.integral_inv += w * std::pow(ninv, epsilon);
        if (n < 1)
            small_bound += w * std::pow(1.0 / (1.0 - n), epsilon);
        else
            all_small = false;
    }
    if (all_small) r.sufficient_small_jump_bound = small_bound;
    r.finite = std::isfinite(r.integral_big) && std::isfinite(r.integral_inv);
    return r;
}

namespace {

std::vector<double> parse_args(const std::string& name, std::string& base) {
    const auto open = name.find('(');
    std::vector<double> args;
    if (open == std::string::npos) {
        base = name;
        return args;
    }
    const auto close = name.rfind(')');
    if (close == std::string::npos || close < open) throw UnknownName("malformed builtin name '" + name + "'");
    base = name.substr(0, open);
    std::stringstream ss(name.substr(open + 1, close - open - 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            args.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UnknownName("bad argument '" + item + "' in builtin name '" + name + "'");
        }
    }
    return args;
}

MatrixXd m2(double a, double b, double c, double d) {
    MatrixXd m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

MatrixLevyTriplet builtin_triplet(const std::string& name) {
    std::string base;
    const auto args = parse_args(name, base);
    auto want = [&](std::size_t n) {
        if (args.size() != n)
            throw UnknownName("builtin '" + base + "' takes " + std::to_string(n) + " argument(s)");
    };
    auto dim_arg = [&] {
        want(1);
        const double v = args[0];
        if (v < 1 || v != std::floor(v) || v > 64) throw UnknownName("bad dimension in '" + name + "'");
        return static_cast<int>(v);
    };

    MatrixLevyTriplet t;
    if (base == "standard_brownian") {
        const int d = dim_arg();
        t = MatrixLevyTriplet::from_drift(d, MatrixXd::Identity(d * d, d * d), MatrixXd::Zero(d, d));
    } else if (base == "zero") {
        const int d = dim_arg();
        t = MatrixLevyTriplet::from_drift(d, MatrixXd::Zero(d * d, d * d), MatrixXd::Zero(d, d));
    } else if (base == "gbm1") {
        want(2);
        MatrixXd s(1, 1);
        s(0, 0) = args[1] * args[1];
        t = MatrixLevyTriplet::from_drift(1, s, MatrixXd::Constant(1, 1, args[0]));
    } else if (base == "rotation_rank1") {
        want(0);
        JumpSpec js{1.0, {{1.0, m2(1, 0, 0, 0)}}, std::nullopt};
        t = MatrixLevyTriplet::from_drift(2, MatrixXd::Zero(4, 4), m2(0, -1, 1, 0), js);
    } else if (base == "pure_rotation") {
        want(0);
        t = MatrixLevyTriplet::from_drift(2, MatrixXd::Zero(4, 4), m2(0, -1, 1, 0));
    } else if (base == "irrational_rotation") {
        want(1);
        const double phi = args[0];
        JumpSpec js{1.0,
                    {{1.0, MatrixXd(m2(std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi)) -
                                    MatrixXd::Identity(2, 2))}},
                    std::nullopt};
        t = MatrixLevyTriplet::from_drift(2, MatrixXd::Zero(4, 4), m2(1, 0, 0, 0), js);
    } else if (base == "sl2_conservative") {
        want(0);
        // Brownian part B with B11 = -B22 and independent off-diagonals: trace(B) = 0.
        MatrixXd s = MatrixXd::Zero(4, 4);
        s(0, 0) = s(3, 3) = 1.0;
        s(0, 3) = s(3, 0) = -1.0;
        s(1, 1) = s(2, 2) = 1.0;
        // sum_{m,n} sigma_{(m,n),(n,m)} = 2 = 2 * trace(drift)
        JumpSpec js{0.5, {{1.0, m2(1, 0, 0, -0.5)}}, std::nullopt};
        t = MatrixLevyTriplet::from_drift(2, s, m2(0.5, -1, 1, 0.5), js);
    } else if (base == "diagonal_reducible") {
        want(0);
        JumpSpec js{1.0, {{0.5, m2(1, 0, 0, -0.5)}, {0.5, m2(-0.5, 0, 0, 0.8)}}, std::nullopt};
        t = MatrixLevyTriplet::from_drift(2, MatrixXd::Zero(4, 4), m2(0.3, 0, 0, -0.2), js);
    } else if (base == "nonnegative_cpp") {
        want(0);
        JumpSpec js{1.5, {{0.5, m2(0.5, 1, 0, 0)}, {0.5, m2(0, 0, 0.7, 0.2)}}, std::nullopt};
        t = MatrixLevyTriplet::from_drift(2, MatrixXd::Zero(4, 4), m2(-0.5, 0.5, 0.3, -0.2), js);
    } else {
        throw UnknownName("unknown builtin triplet '" + name + "'");
    }
    t.name = name;
    return t;
}

std::vector<std::string> builtin_names() {
    return {"standard_brownian(d)", "zero(d)",         "gbm1(mu,sigma)", "rotation_rank1", "pure_rotation",
            "irrational_rotation(phi)", "sl2_conservative", "diagonal_reducible", "nonnegative_cpp"};
}

}  // namespace levyflow
