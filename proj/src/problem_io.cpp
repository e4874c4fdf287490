#include <pathcg/problem_io.hpp>

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pathcg {

using nlohmann::json;

namespace {

json matrix_to_json(const MatrixXd &M) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k)
            row.push_back(M(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const VectorXd &v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v(i));
    return arr;
}

MatrixXd matrix_from_json(const json &j, Eigen::Index rows, Eigen::Index cols, const char *name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw std::runtime_error(std::string("instance file: bad row count for ") + name);
    MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto &row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::runtime_error(std::string("instance file: bad column count for ") + name);
        for (Eigen::Index k = 0; k < cols; ++k)
            M(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return M;
}

VectorXd vector_from_json(const json &j, Eigen::Index n, const char *name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        throw std::runtime_error(std::string("instance file: bad length for ") + name);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

const json &field(const json &j, const char *key) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::runtime_error(std::string("instance file: missing field ") + key);
    return *it;
}

} // namespace

std::string instance_to_json(const ProblemInstance &inst, int indent) {
    json root;
    root["format"] = "pathcg-instance";
    root["version"] = 1;
    root["N"] = inst.N;
    root["T"] = inst.T;
    json subs = json::array();
    for (const auto &s : inst.subsystems) {
        json js;
        js["n"] = s.n;
        js["m"] = s.m;
        js["nu"] = s.nu;
        json stages = json::array();
        for (std::size_t t = 0; t < s.stages.size(); ++t) {
            const auto &st = s.stages[t];
            json jt;
            jt["Q"] = matrix_to_json(st.Q);
            jt["S"] = matrix_to_json(st.S);
            jt["R"] = matrix_to_json(st.R);
            if (static_cast<int>(t) < inst.T) {
                jt["A"] = matrix_to_json(st.A);
                jt["B"] = matrix_to_json(st.B);
                jt["E"] = matrix_to_json(st.E);
                jt["F"] = matrix_to_json(st.F);
            }
            jt["C"] = matrix_to_json(st.C);
            jt["D"] = matrix_to_json(st.D);
            jt["kappa"] = vector_to_json(st.kappa);
            stages.push_back(std::move(jt));
        }
        js["stages"] = std::move(stages);
        subs.push_back(std::move(js));
    }
    root["subsystems"] = std::move(subs);

    json b;
    b["n_left"] = inst.n_left;
    b["n_right"] = inst.n_right;
    b["xi"] = json::array();
    for (const auto &v : inst.xi)
        b["xi"].push_back(vector_to_json(v));
    b["chi"] = json::array();
    for (const auto &v : inst.chi)
        b["chi"].push_back(vector_to_json(v));
    b["zeta"] = json::array();
    for (const auto &v : inst.zeta)
        b["zeta"].push_back(vector_to_json(v));
    root["boundary"] = std::move(b);
    return root.dump(indent);
}

ProblemInstance instance_from_json(const std::string &text) {
    const json root = json::parse(text);
    if (root.value("format", std::string()) != "pathcg-instance")
        throw std::runtime_error("instance file: unknown format tag");
    if (root.value("version", 0) != 1)
        throw std::runtime_error("instance file: unsupported version");

    ProblemInstance inst;
    inst.N = field(root, "N").get<int>();
    inst.T = field(root, "T").get<int>();
    if (inst.N < 1 || inst.T < 1)
        throw std::runtime_error("instance file: N and T must be positive");
    const auto &b = field(root, "boundary");
    inst.n_left = field(b, "n_left").get<int>();
    inst.n_right = field(b, "n_right").get<int>();

    const auto &subs = field(root, "subsystems");
    if (!subs.is_array() || static_cast<int>(subs.size()) != inst.N)
        throw std::runtime_error("instance file: subsystem count differs from N");
    for (const auto &js : subs) {
        Subsystem s;
        s.n = field(js, "n").get<int>();
        s.m = field(js, "m").get<int>();
        s.nu = field(js, "nu").get<int>();
        inst.subsystems.push_back(s);
    }
    for (int j = 0; j < inst.N; ++j) {
        auto &s = inst.subsystems[j];
        const auto &stages = field(subs[static_cast<std::size_t>(j)], "stages");
        if (!stages.is_array() || static_cast<int>(stages.size()) != inst.T + 1)
            throw std::runtime_error("instance file: stage count differs from T+1");
        for (int t = 0; t <= inst.T; ++t) {
            const auto &jt = stages[static_cast<std::size_t>(t)];
            StageData st;
            st.Q = matrix_from_json(field(jt, "Q"), s.n, s.n, "Q");
            st.S = matrix_from_json(field(jt, "S"), s.m, s.n, "S");
            st.R = matrix_from_json(field(jt, "R"), s.m, s.m, "R");
            if (t < inst.T) {
                st.A = matrix_from_json(field(jt, "A"), s.n, s.n, "A");
                st.B = matrix_from_json(field(jt, "B"), s.n, s.m, "B");
                st.E = matrix_from_json(field(jt, "E"), s.n, inst.n_prev(j), "E");
                st.F = matrix_from_json(field(jt, "F"), s.n, inst.n_next(j), "F");
            }
            st.C = matrix_from_json(field(jt, "C"), s.nu, s.n, "C");
            st.D = matrix_from_json(field(jt, "D"), s.nu, s.m, "D");
            st.kappa = vector_from_json(field(jt, "kappa"), s.nu, "kappa");
            s.stages.push_back(std::move(st));
        }
    }

    const auto &xi = field(b, "xi");
    if (!xi.is_array() || static_cast<int>(xi.size()) != inst.N)
        throw std::runtime_error("instance file: xi count differs from N");
    for (int j = 0; j < inst.N; ++j)
        inst.xi.push_back(vector_from_json(xi[static_cast<std::size_t>(j)], inst.n(j), "xi"));
    for (const char *key : {"chi", "zeta"}) {
        const auto &arr = field(b, key);
        if (!arr.is_array() || static_cast<int>(arr.size()) != inst.T + 1)
            throw std::runtime_error(std::string("instance file: ") + key + " needs T+1 entries");
        const int n = std::strcmp(key, "chi") == 0 ? inst.n_left : inst.n_right;
        auto &dst = std::strcmp(key, "chi") == 0 ? inst.chi : inst.zeta;
        for (const auto &v : arr)
            dst.push_back(vector_from_json(v, n, key));
    }
    return inst;
}

void save_instance(const ProblemInstance &inst, const std::filesystem::path &path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << instance_to_json(inst) << '\n';
    if (!os)
        throw std::runtime_error("write failed: " + path.string());
}

ProblemInstance load_instance(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return instance_from_json(ss.str());
}

namespace {

bool same_bits(const MatrixXd &a, const MatrixXd &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return false;
    return a.size() == 0 || std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

bool same_bits(const std::vector<VectorXd> &a, const std::vector<VectorXd> &b) {
    if (a.size() != b.size())
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_bits(MatrixXd(a[i]), MatrixXd(b[i])))
            return false;
    return true;
}

} // namespace

bool identical(const ProblemInstance &a, const ProblemInstance &b) {
    if (a.N != b.N || a.T != b.T || a.n_left != b.n_left || a.n_right != b.n_right ||
        a.subsystems.size() != b.subsystems.size())
        return false;
    for (std::size_t j = 0; j < a.subsystems.size(); ++j) {
        const auto &sa = a.subsystems[j], &sb = b.subsystems[j];
        if (sa.n != sb.n || sa.m != sb.m || sa.nu != sb.nu || sa.stages.size() != sb.stages.size())
            return false;
        for (std::size_t t = 0; t < sa.stages.size(); ++t) {
            const auto &x = sa.stages[t], &y = sb.stages[t];
            if (!same_bits(x.Q, y.Q) || !same_bits(x.S, y.S) || !same_bits(x.R, y.R) || !same_bits(x.A, y.A) ||
                !same_bits(x.B, y.B) || !same_bits(x.E, y.E) || !same_bits(x.F, y.F) || !same_bits(x.C, y.C) ||
                !same_bits(x.D, y.D) || !same_bits(MatrixXd(x.kappa), MatrixXd(y.kappa)))
                return false;
        }
    }
    return same_bits(a.xi, b.xi) && same_bits(a.chi, b.chi) && same_bits(a.zeta, b.zeta);
}

} // namespace pathcg
