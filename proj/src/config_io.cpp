#include "levyflow/config_io.hpp"

#include "levyflow/errors.hpp"

#include <fstream>
#include <sstream>

namespace levyflow {

namespace {

double number_at(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    return v.get<double>();
}

const Json& child(const Json& doc, const std::string& key, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where, "expected an object");
    const auto it = doc.find(key);
    if (it == doc.end()) throw ConfigError(where.empty() ? key : where + "." + key, "missing");
    return *it;
}

}  // namespace

Json matrix_to_json(const MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const Json& v, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where, "expected a list");
    MatrixXd m(rows, cols);
    if (!v.empty() && v[0].is_array()) {
        if (static_cast<Eigen::Index>(v.size()) != rows)
            throw ConfigError(where, "expected " + std::to_string(rows) + " rows");
        for (Eigen::Index i = 0; i < rows; ++i) {
            const Json& row = v[static_cast<std::size_t>(i)];
            const std::string rw = where + "[" + std::to_string(i) + "]";
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
                throw ConfigError(rw, "expected " + std::to_string(cols) + " columns");
            for (Eigen::Index j = 0; j < cols; ++j)
                m(i, j) = number_at(row[static_cast<std::size_t>(j)], rw + "[" + std::to_string(j) + "]");
        }
        return m;
    }
    if (static_cast<Eigen::Index>(v.size()) != rows * cols)
        throw ConfigError(where, "expected " + std::to_string(rows * cols) + " numbers");
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto k = static_cast<std::size_t>(i * cols + j);
            m(i, j) = number_at(v[k], where + "[" + std::to_string(k) + "]");
        }
    return m;
}

Json triplet_to_json(const MatrixLevyTriplet& t) {
    Json doc;
    if (!t.name.empty()) doc["name"] = t.name;
    doc["d"] = t.d;
    Json sigma = Json::array();
    for (Eigen::Index i = 0; i < t.sigma.rows(); ++i)
        for (Eigen::Index j = 0; j < t.sigma.cols(); ++j) sigma.push_back(t.sigma(i, j));
    doc["sigma"] = std::move(sigma);
    doc["gamma"] = matrix_to_json(t.gamma);
    if (t.drift0) doc["drift0"] = matrix_to_json(*t.drift0);
    Json jumps;
    jumps["rate"] = t.jumps.rate;
    Json atoms = Json::array();
    for (const auto& a : t.jumps.atoms) atoms.push_back({{"prob", a.prob}, {"matrix", matrix_to_json(a.mark)}});
    jumps["atoms"] = std::move(atoms);
    if (t.jumps.truncation_eps) jumps["truncation_eps"] = *t.jumps.truncation_eps;
    doc["jumps"] = std::move(jumps);
    return doc;
}

MatrixLevyTriplet triplet_from_json(const Json& doc, const std::string& where) {
    if (!doc.is_object()) throw ConfigError(where, "expected an object");
    MatrixLevyTriplet t;
    const Json& dj = child(doc, "d", where);
    if (!dj.is_number_integer() || dj.get<long>() < 1) throw ConfigError(where + ".d", "expected integer >= 1");
    t.d = dj.get<int>();
    const int d = t.d;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) throw ConfigError(where + ".name", "expected a string");
        t.name = doc["name"].get<std::string>();
    }
    if (doc.contains("sigma"))
        t.sigma = matrix_from_json(doc["sigma"], d * d, d * d, where + ".sigma");
    else
        t.sigma = MatrixXd::Zero(d * d, d * d);
    if (doc.contains("drift0")) t.drift0 = matrix_from_json(doc["drift0"], d, d, where + ".drift0");
    if (doc.contains("jumps")) {
        const Json& js = doc["jumps"];
        const std::string jw = where + ".jumps";
        if (!js.is_object()) throw ConfigError(jw, "expected an object");
        t.jumps.rate = js.contains("rate") ? number_at(js["rate"], jw + ".rate") : 0.0;
        if (js.contains("atoms")) {
            const Json& atoms = js["atoms"];
            if (!atoms.is_array()) throw ConfigError(jw + ".atoms", "expected a list");
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                const std::string aw = jw + ".atoms[" + std::to_string(i) + "]";
                JumpAtom a;
                a.prob = number_at(child(atoms[i], "prob", aw), aw + ".prob");
                a.mark = matrix_from_json(child(atoms[i], "matrix", aw), d, d, aw + ".matrix");
                t.jumps.atoms.push_back(std::move(a));
            }
        }
        if (js.contains("truncation_eps"))
            t.jumps.truncation_eps = number_at(js["truncation_eps"], jw + ".truncation_eps");
    }
    if (doc.contains("gamma"))
        t.gamma = matrix_from_json(doc["gamma"], d, d, where + ".gamma");
    else if (t.drift0)
        t.gamma = *t.drift0 + t.small_jump_compensator();
    else
        throw ConfigError(where + ".gamma", "missing (and no drift0 given)");
    return t;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open file");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path, std::string("parse error: ") + e.what());
    }
}

MatrixLevyTriplet load_triplet(const std::string& path) { return triplet_from_json(read_json_file(path)); }

void save_triplet(const MatrixLevyTriplet& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError(path, "cannot write file");
    out << triplet_to_json(t).dump(2) << '\n';
}

}  // namespace levyflow
