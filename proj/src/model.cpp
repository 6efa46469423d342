#include "rsg/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rsg {

using nlohmann::json;

SolverError::SolverError(std::string stage_, int node_, const std::string& msg)
    : std::runtime_error(stage_ + ": " + msg + (node_ >= 0 ? " at node " + std::to_string(node_) : "")),
      stage(std::move(stage_)), node(node_) {}

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> out(N + 1);
    for (int k = 0; k <= N; ++k) out[k] = t(k);
    return out;
}

TimeGrid make_grid(double T, int N) {
    if (!(T > 0.0)) throw SpecError("horizon must be positive");
    if (N < 1) throw SpecError("number of steps must be positive");
    return TimeGrid{T, N};
}

MatrixPath::MatrixPath(TimeGrid g, std::vector<Mat> samples) : grid_(g), samples_(std::move(samples)) {
    if ((int)samples_.size() != g.N + 1) throw std::invalid_argument("path needs N+1 samples");
    rows_ = samples_[0].rows();
    cols_ = samples_[0].cols();
    for (auto& m : samples_)
        if (m.rows() != rows_ || m.cols() != cols_) throw std::invalid_argument("path samples differ in shape");
}

MatrixPath::MatrixPath(TimeGrid g, std::vector<Mat> samples, std::vector<Mat> derivs)
    : MatrixPath(g, std::move(samples)) {
    if (derivs.size() != samples_.size()) throw std::invalid_argument("derivative count mismatch");
    derivs_ = std::move(derivs);
}

MatrixPath MatrixPath::constant(TimeGrid g, const Mat& m) {
    MatrixPath p;
    p.grid_ = g;
    p.samples_.assign(g.N + 1, m);
    p.rows_ = m.rows();
    p.cols_ = m.cols();
    p.constant_ = true;
    return p;
}

MatrixPath MatrixPath::zeros(TimeGrid g, int rows, int cols) { return constant(g, Mat::Zero(rows, cols)); }

const Mat& MatrixPath::node(int k) const { return samples_.at(k); }

Mat MatrixPath::operator()(double t) const {
    const double T = grid_.T;
    const double tol = 1e-12 * T;
    if (t < -tol || t > T + tol || std::isnan(t)) throw std::out_of_range("time outside [0,T]");
    if (constant_) return samples_[0];
    t = std::clamp(t, 0.0, T);
    const double h = grid_.dt();
    int k = std::clamp((int)std::floor(t / h), 0, grid_.N - 1);
    double th = (t - k * h) / h;
    if (th <= 0.0) return samples_[k];
    if (th >= 1.0) return samples_[k + 1];
    const Mat& p0 = samples_[k];
    const Mat& p1 = samples_[k + 1];
    if (derivs_.empty()) return (1.0 - th) * p0 + th * p1;
    double th2 = th * th, th3 = th2 * th;
    double h00 = 2 * th3 - 3 * th2 + 1, h10 = th3 - 2 * th2 + th;
    double h01 = -2 * th3 + 3 * th2, h11 = th3 - th2;
    return h00 * p0 + (h10 * h) * derivs_[k] + h01 * p1 + (h11 * h) * derivs_[k + 1];
}

Mat sample(const MatrixPath& path, double t) { return path(t); }

Coeffs coeffs_at(const GameSpec& s, double t) {
    return Coeffs{s.A(t), s.C(t), s.B1(t), s.D1(t), s.B2(t), s.D2(t), s.sigma(t),
                  s.f1(t), s.Q(t), s.R1(t), s.R2(t), s.R0(t), s.R0hat(t)};
}

double min_eig_sym(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eig_sym(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

bool ValidationReport::ok() const {
    for (auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (auto& c : checks) {
        os << (c.pass ? "ok   " : "FAIL ") << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        if (c.node) os << " (node " << *c.node << ")";
        os << "\n";
    }
    return os.str();
}

namespace {

void check_shape(ValidationReport& r, const std::string& name, const MatrixPath& p, int rows, int cols) {
    bool ok = p.rows() == rows && p.cols() == cols && (int)p.samples().size() == p.grid().N + 1;
    std::string d = std::to_string(p.rows()) + "x" + std::to_string(p.cols()) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols);
    r.checks.push_back({"shape " + name, ok, ok ? "" : d, std::nullopt});
}

void check_finite(ValidationReport& r, const std::string& name, const MatrixPath& p) {
    for (int k = 0; k <= p.grid().N; ++k)
        if (!p.node(k).allFinite()) {
            r.checks.push_back({"finite " + name, false, "non-finite entry", k});
            return;
        }
    r.checks.push_back({"finite " + name, true, "", std::nullopt});
}

void check_sym(ValidationReport& r, const std::string& name, const MatrixPath& p) {
    for (int k = 0; k <= p.grid().N; ++k) {
        const Mat& m = p.node(k);
        if (m.rows() != m.cols()) {
            r.checks.push_back({"symmetric " + name, false, "not square", k});
            return;
        }
        double asym = (m - m.transpose()).norm();
        if (asym > 1e-12 * m.norm()) {
            r.checks.push_back({"symmetric " + name, false, "|M-M'| = " + std::to_string(asym), k});
            return;
        }
    }
    r.checks.push_back({"symmetric " + name, true, "", std::nullopt});
}

void check_pos(ValidationReport& r, const std::string& name, const MatrixPath& p, double delta) {
    for (int k = 0; k <= p.grid().N; ++k) {
        if (p.node(k).rows() != p.node(k).cols()) return;
        double e = min_eig_sym(p.node(k));
        if (!(e >= delta)) {
            r.checks.push_back({"positive " + name, false, "min eigenvalue " + std::to_string(e), k});
            return;
        }
    }
    r.checks.push_back({"positive " + name, true, "", std::nullopt});
}

}  // namespace

ValidationReport validate_spec(const GameSpec& s, double delta) {
    ValidationReport r;
    const int n = s.n, m1 = s.m1, m2 = s.m2;
    r.checks.push_back({"dimensions", n >= 1 && m1 >= 1 && m2 >= 1, "", std::nullopt});
    r.checks.push_back({"grid", s.grid.T > 0 && s.grid.N >= 1, "", std::nullopt});
    struct Item {
        const char* name;
        const MatrixPath* p;
        int r, c;
    };
    const Item items[] = {{"A", &s.A, n, n},       {"C", &s.C, n, n},         {"B1", &s.B1, n, m1},
                          {"D1", &s.D1, n, m1},    {"B2", &s.B2, n, m2},      {"D2", &s.D2, n, m2},
                          {"sigma", &s.sigma, n, 1}, {"f1", &s.f1, n, 1},     {"Q", &s.Q, n, n},
                          {"R1", &s.R1, m1, m1},   {"R2", &s.R2, m2, m2},     {"R0", &s.R0, n, n},
                          {"R0hat", &s.R0hat, n, n}};
    for (auto& it : items) {
        check_shape(r, it.name, *it.p, it.r, it.c);
        check_finite(r, it.name, *it.p);
    }
    bool gshape = s.G.rows() == n && s.G.cols() == n;
    r.checks.push_back({"shape G", gshape, "", std::nullopt});
    r.checks.push_back({"finite G", s.G.allFinite(), "", std::nullopt});
    r.checks.push_back({"shape xi", s.xi.size() == n, "", std::nullopt});
    for (auto& it : {items[8], items[9], items[10], items[11], items[12]}) check_sym(r, it.name, *it.p);
    {
        bool ok = gshape && (s.G - s.G.transpose()).norm() <= 1e-12 * s.G.norm();
        r.checks.push_back({"symmetric G", ok, "", std::nullopt});
    }
    check_pos(r, "R0", s.R0, delta);
    check_pos(r, "R0hat", s.R0hat, delta);
    r.checks.push_back({"alpha > 0", s.alpha > 0, std::to_string(s.alpha), std::nullopt});
    r.checks.push_back({"gamma > 0", s.gamma > 0, std::to_string(s.gamma), std::nullopt});
    return r;
}

namespace {

Mat to_mat(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SpecError(where + ": expected non-empty nested array");
    int rows = j.size();
    int cols = j[0].is_array() ? (int)j[0].size() : 1;
    Mat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (j[i].is_array()) {
            if ((int)j[i].size() != cols) throw SpecError(where + ": ragged row " + std::to_string(i));
            for (int c = 0; c < cols; ++c) {
                if (!j[i][c].is_number()) throw SpecError(where + ": non-numeric entry");
                m(i, c) = j[i][c].get<double>();
            }
        } else {
            if (!j[i].is_number() || cols != 1) throw SpecError(where + ": non-numeric entry");
            m(i, 0) = j[i].get<double>();
        }
    }
    return m;
}

json from_mat(const Mat& m) {
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        a.push_back(row);
    }
    return a;
}

MatrixPath path_from_json(const json& j, const TimeGrid& g, const std::string& name) {
    if (j.contains("constant")) return MatrixPath::constant(g, to_mat(j["constant"], name));
    if (!j.contains("nodes")) throw SpecError(name + ": need \"constant\" or \"nodes\"");
    const json& nodes = j["nodes"];
    if (!nodes.is_array() || nodes.empty()) throw SpecError(name + ": empty node list");
    std::vector<double> ts;
    std::vector<Mat> vs;
    for (auto& nd : nodes) {
        if (!nd.contains("t") || !nd.contains("value")) throw SpecError(name + ": node needs t and value");
        ts.push_back(nd["t"].get<double>());
        vs.push_back(to_mat(nd["value"], name));
        if (vs.back().rows() != vs[0].rows() || vs.back().cols() != vs[0].cols())
            throw SpecError(name + ": node values differ in shape");
        if (ts.size() > 1 && !(ts.back() > ts[ts.size() - 2])) throw SpecError(name + ": node times not increasing");
    }
    if (ts.size() == 1) return MatrixPath::constant(g, vs[0]);
    if (ts.front() > 1e-12 || ts.back() < g.T - 1e-12) throw SpecError(name + ": nodes must cover [0,T]");
    std::vector<Mat> out;
    size_t j0 = 0;
    for (int k = 0; k <= g.N; ++k) {
        double t = g.t(k);
        while (j0 + 2 < ts.size() && ts[j0 + 1] <= t) ++j0;
        double w = std::clamp((t - ts[j0]) / (ts[j0 + 1] - ts[j0]), 0.0, 1.0);
        out.push_back((1 - w) * vs[j0] + w * vs[j0 + 1]);
    }
    return MatrixPath(g, out);
}

json path_to_json(const MatrixPath& p) {
    json j;
    if (p.is_constant()) {
        j["constant"] = from_mat(p.node(0));
        return j;
    }
    json nodes = json::array();
    for (int k = 0; k <= p.grid().N; ++k) nodes.push_back({{"t", p.grid().t(k)}, {"value", from_mat(p.node(k))}});
    j["nodes"] = nodes;
    return j;
}

}  // namespace

GameSpec parse_spec(const std::string& text, std::optional<int> grid_n) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("malformed JSON: ") + e.what());
    }
    try {
        GameSpec s;
        s.n = j.at("n").get<int>();
        s.m1 = j.at("m1").get<int>();
        s.m2 = j.at("m2").get<int>();
        s.grid = make_grid(j.at("T").get<double>(), grid_n ? *grid_n : j.value("N", 1000));
        s.alpha = j.at("alpha").get<double>();
        s.gamma = j.at("gamma").get<double>();
        Mat xi = to_mat(j.at("xi"), "xi");
        if (xi.cols() != 1 && xi.rows() == 1) xi.transposeInPlace();
        s.xi = xi.col(0);
        const json& ms = j.at("matrices");
        auto get = [&](const char* name) { return path_from_json(ms.at(name), s.grid, name); };
        auto get_or_zero = [&](const char* name, int r, int c) {
            return ms.contains(name) ? path_from_json(ms[name], s.grid, name) : MatrixPath::zeros(s.grid, r, c);
        };
        s.A = get("A");
        s.C = get("C");
        s.B1 = get("B1");
        s.D1 = get("D1");
        s.B2 = get("B2");
        s.D2 = get("D2");
        s.sigma = get_or_zero("sigma", s.n, 1);
        s.f1 = get_or_zero("f1", s.n, 1);
        s.Q = get("Q");
        s.R1 = get("R1");
        s.R2 = get("R2");
        s.R0 = get("R0");
        s.R0hat = get("R0hat");
        const json& g = ms.at("G");
        if (!g.contains("constant")) throw SpecError("G: terminal weight must be constant");
        s.G = to_mat(g["constant"], "G");
        return s;
    } catch (const json::exception& e) {
        throw SpecError(std::string("bad spec field: ") + e.what());
    }
}

GameSpec load_spec(const std::string& file, std::optional<int> grid_n) {
    std::ifstream in(file);
    if (!in) throw SpecError("cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str(), grid_n);
}

std::string dump_spec(const GameSpec& s) {
    json j;
    j["n"] = s.n;
    j["m1"] = s.m1;
    j["m2"] = s.m2;
    j["T"] = s.grid.T;
    j["N"] = s.grid.N;
    j["alpha"] = s.alpha;
    j["gamma"] = s.gamma;
    j["xi"] = from_mat(s.xi);
    json& ms = j["matrices"];
    ms["A"] = path_to_json(s.A);
    ms["C"] = path_to_json(s.C);
    ms["B1"] = path_to_json(s.B1);
    ms["D1"] = path_to_json(s.D1);
    ms["B2"] = path_to_json(s.B2);
    ms["D2"] = path_to_json(s.D2);
    ms["sigma"] = path_to_json(s.sigma);
    ms["f1"] = path_to_json(s.f1);
    ms["Q"] = path_to_json(s.Q);
    ms["R1"] = path_to_json(s.R1);
    ms["R2"] = path_to_json(s.R2);
    ms["R0"] = path_to_json(s.R0);
    ms["R0hat"] = path_to_json(s.R0hat);
    ms["G"]["constant"] = from_mat(s.G);
    return j.dump(2);
}

GameSpec regrid(const GameSpec& s, int N) {
    GameSpec o = s;
    o.grid = make_grid(s.grid.T, N);
    auto rs = [&](const MatrixPath& p) {
        if (p.is_constant()) return MatrixPath::constant(o.grid, p.node(0));
        std::vector<Mat> v;
        for (int k = 0; k <= N; ++k) v.push_back(p(o.grid.t(k)));
        return MatrixPath(o.grid, v);
    };
    for (MatrixPath* p : {&o.A, &o.C, &o.B1, &o.D1, &o.B2, &o.D2, &o.sigma, &o.f1, &o.Q, &o.R1, &o.R2, &o.R0,
                          &o.R0hat})
        *p = rs(*p);
    return o;
}

}  // namespace rsg
