#include "fe/config.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "json.hpp"

namespace fe {
namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError((path.empty() ? "config" : path) + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string at(const std::string& path, size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void known_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(path, "unknown field '" + it.key() + "'");
}

const json* get_opt(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

const json& get_req(const json& j, const std::string& path, const std::string& key) {
    const json* p = get_opt(j, key);
    if (!p) fail(path, "missing required field '" + key + "'");
    return *p;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long long get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
}

std::uint64_t get_u64(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0)
        return static_cast<std::uint64_t>(j.get<long long>());
    fail(path, "expected a non-negative integer");
}

std::string get_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

cplx get_complex(const json& j, const std::string& path) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return cplx(j[0].get<double>(), j[1].get<double>());
    fail(path, "expected a real number or [re, im]");
}

Matrix parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    const size_t n = j.size();
    Matrix m(static_cast<int>(n));
    for (size_t i = 0; i < n; ++i) {
        const json& row = j[i];
        if (!row.is_array() || row.size() != n)
            fail(at(path, i), "expected a row of length " + std::to_string(n));
        for (size_t k = 0; k < n; ++k)
            m(static_cast<int>(i), static_cast<int>(k)) = get_complex(row[k], at(at(path, i), k));
    }
    return m;
}

std::vector<double> parse_weights(const json* w, const std::string& path, size_t count) {
    std::vector<double> out;
    if (!w) {
        out.assign(count, 1.0 / static_cast<double>(count));
        return out;
    }
    if (!w->is_array() || w->size() != count)
        fail(path, "expected " + std::to_string(count) + " weights");
    double sum = 0;
    for (size_t i = 0; i < w->size(); ++i) {
        const double v = get_number((*w)[i], at(path, i));
        if (v <= 0) fail(at(path, i), "weights must be positive");
        out.push_back(v);
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        fail(path, "weights sum " + fmt(sum) + ", must sum to 1");
    for (double& v : out) v /= sum;
    return out;
}

OperatorModel parse_discrete(const json& j, const std::string& path) {
    known_keys(j, path, {"type", "dim", "atoms"});
    const json& atoms = get_req(j, path, "atoms");
    const std::string apath = join(path, "atoms");
    if (!atoms.is_array() || atoms.empty()) fail(apath, "expected a non-empty array");

    std::vector<DiscreteModel::Atom> out;
    double sum = 0;
    int dim = 0;
    for (size_t i = 0; i < atoms.size(); ++i) {
        const std::string ipath = at(apath, i);
        require_object(atoms[i], ipath);
        known_keys(atoms[i], ipath, {"weight", "matrix"});
        double w = get_number(get_req(atoms[i], ipath, "weight"), join(ipath, "weight"));
        if (w <= 0) fail(join(ipath, "weight"), "weights must be positive");
        Matrix m = parse_matrix(get_req(atoms[i], ipath, "matrix"), join(ipath, "matrix"));
        if (dim == 0) dim = m.dim();
        if (m.dim() != dim) fail(join(ipath, "matrix"), "atom dims disagree");
        if (!is_hermitian(m)) fail(join(ipath, "matrix"), "not Hermitian");
        sum += w;
        out.push_back({w, std::move(m)});
    }
    if (std::fabs(sum - 1.0) > 1e-9) fail(apath, "weights sum " + fmt(sum) + ", must sum to 1");
    for (auto& a : out) a.weight /= sum;
    if (const json* d = get_opt(j, "dim"))
        if (get_int(*d, join(path, "dim")) != dim)
            fail(join(path, "dim"), "dim " + std::to_string(get_int(*d, "")) +
                                        " does not match atom matrices of dim " +
                                        std::to_string(dim));
    return DiscreteModel::make(std::move(out));
}

// Scalar distribution + monomial exponent pattern: atom matrices t^{e_ij},
// null entries are zero. Covers the block constructions without hand-entering
// one matrix per support point.
OperatorModel parse_discrete_scalar(const json& j, const std::string& path) {
    known_keys(j, path, {"type", "dim", "support", "weights", "exponents"});
    const json& sup = get_req(j, path, "support");
    const std::string spath = join(path, "support");
    if (!sup.is_array() || sup.empty()) fail(spath, "expected a non-empty array");
    std::vector<double> support;
    for (size_t i = 0; i < sup.size(); ++i)
        support.push_back(get_number(sup[i], at(spath, i)));

    std::vector<double> weights =
        parse_weights(get_opt(j, "weights"), join(path, "weights"), support.size());

    const json* exp = get_opt(j, "exponents");
    if (!exp) {
        // plain scalar distribution: atoms t * I_dim
        int dim = 1;
        if (const json* d = get_opt(j, "dim")) {
            const long long v = get_int(*d, join(path, "dim"));
            if (v < 1) fail(join(path, "dim"), "dim must be >= 1");
            dim = static_cast<int>(v);
        }
        return DiscreteModel::scalar(dim, support, weights);
    }
    const json& ex = *exp;
    const std::string epath = join(path, "exponents");
    if (!ex.is_array() || ex.empty()) fail(epath, "expected a non-empty array of rows");
    const size_t n = ex.size();
    std::vector<std::vector<int>> epow(n, std::vector<int>(n, -1));
    for (size_t i = 0; i < n; ++i) {
        if (!ex[i].is_array() || ex[i].size() != n)
            fail(at(epath, i), "expected a row of length " + std::to_string(n));
        for (size_t k = 0; k < n; ++k) {
            const json& e = ex[i][k];
            if (e.is_null()) continue;
            const long long v = get_int(e, at(at(epath, i), k));
            if (v < 0 || v > 30) fail(at(at(epath, i), k), "exponent out of range [0, 30]");
            epow[i][k] = static_cast<int>(v);
        }
    }
    for (size_t i = 0; i < n; ++i)
        for (size_t k = i + 1; k < n; ++k)
            if (epow[i][k] != epow[k][i]) fail(epath, "exponent pattern must be symmetric");

    if (const json* d = get_opt(j, "dim"))
        if (get_int(*d, join(path, "dim")) != static_cast<long long>(n))
            fail(join(path, "dim"), "dim does not match the exponent pattern");

    std::vector<DiscreteModel::Atom> atoms;
    for (size_t a = 0; a < support.size(); ++a) {
        Matrix m(static_cast<int>(n));
        for (size_t i = 0; i < n; ++i)
            for (size_t k = 0; k < n; ++k)
                if (epow[i][k] >= 0)
                    m(static_cast<int>(i), static_cast<int>(k)) =
                        std::pow(support[a], epow[i][k]);
        atoms.push_back({weights[a], std::move(m)});
    }
    return DiscreteModel::make(std::move(atoms));
}

OperatorModel parse_semicircular(const json& j, const std::string& path) {
    known_keys(j, path, {"type", "dim", "family", "shift"});
    const json& fam = get_req(j, path, "family");
    const std::string fpath = join(path, "family");
    if (!fam.is_array()) fail(fpath, "expected an array of matrices");

    std::vector<Matrix> family;
    int dim = 0;
    for (size_t i = 0; i < fam.size(); ++i) {
        Matrix m = parse_matrix(fam[i], at(fpath, i));
        if (dim == 0) dim = m.dim();
        if (m.dim() != dim) fail(at(fpath, i), "family dims disagree");
        if (!is_hermitian(m)) fail(at(fpath, i), "not Hermitian");
        family.push_back(std::move(m));
    }
    if (const json* d = get_opt(j, "dim")) {
        const long long v = get_int(*d, join(path, "dim"));
        if (v < 1) fail(join(path, "dim"), "dim must be >= 1");
        if (dim != 0 && v != dim) fail(join(path, "dim"), "dim does not match the family");
        dim = static_cast<int>(v);
    }
    if (dim == 0) fail(path, "dim is required when the family is empty");

    double shift = 0.0;
    if (const json* s = get_opt(j, "shift")) shift = get_number(*s, join(path, "shift"));
    if (family.empty()) return SemicircularModel::make(dim, CovarianceMap::make({}), shift);
    return SemicircularModel::make(CovarianceMap::make(std::move(family)), shift);
}

OperatorModel parse_model(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string type = get_string(get_req(j, path, "type"), join(path, "type"));
    if (type == "discrete") return parse_discrete(j, path);
    if (type == "discrete_scalar") return parse_discrete_scalar(j, path);
    if (type == "semicircular") return parse_semicircular(j, path);
    fail(join(path, "type"),
         "unknown model type '" + type + "' (discrete | discrete_scalar | semicircular)");
}

void parse_grid(const json& j, GridSpec& g) {
    require_object(j, "grid");
    known_keys(j, "grid", {"t_min", "t_max", "points", "epsilon", "sweep"});
    if (const json* p = get_opt(j, "t_min")) g.t_min = get_number(*p, "grid.t_min");
    if (const json* p = get_opt(j, "t_max")) g.t_max = get_number(*p, "grid.t_max");
    if (const json* p = get_opt(j, "points")) {
        const long long v = get_int(*p, "grid.points");
        if (v < 2) fail("grid.points", "need at least 2 points");
        g.points = static_cast<int>(v);
    }
    if (const json* p = get_opt(j, "epsilon")) {
        g.epsilon = get_number(*p, "grid.epsilon");
        if (g.epsilon <= 0) fail("grid.epsilon", "must be positive");
    }
    if (const json* p = get_opt(j, "sweep")) {
        const std::string s = get_string(*p, "grid.sweep");
        if (s == "warm") g.warm_sweep = true;
        else if (s == "cold") g.warm_sweep = false;
        else fail("grid.sweep", "expected 'warm' or 'cold'");
    }
    if (!(g.t_min < g.t_max)) fail("grid", "t_min must be < t_max");
}

void parse_iteration(const json& j, IterationConfig& it) {
    require_object(j, "iteration");
    known_keys(j, "iteration", {"tol", "max_iter", "damping"});
    if (const json* p = get_opt(j, "tol")) {
        it.tol = get_number(*p, "iteration.tol");
        if (it.tol <= 0) fail("iteration.tol", "must be positive");
    }
    if (const json* p = get_opt(j, "max_iter")) {
        const long long v = get_int(*p, "iteration.max_iter");
        if (v < 1) fail("iteration.max_iter", "must be >= 1");
        it.max_iter = static_cast<int>(v);
    }
    if (const json* p = get_opt(j, "damping")) {
        it.damping = get_number(*p, "iteration.damping");
        if (!(it.damping > 0 && it.damping <= 1)) fail("iteration.damping", "must be in (0, 1]");
    }
}

void parse_simulation(const json& j, RunConfig& cfg) {
    require_object(j, "simulation");
    known_keys(j, "simulation", {"size", "trials", "seed", "bins"});
    if (const json* p = get_opt(j, "size")) {
        const long long v = get_int(*p, "simulation.size");
        if (v < 2) fail("simulation.size", "must be >= 2");
        cfg.sim_size = static_cast<int>(v);
    }
    if (const json* p = get_opt(j, "trials")) {
        const long long v = get_int(*p, "simulation.trials");
        if (v < 1) fail("simulation.trials", "must be >= 1");
        cfg.sim_trials = static_cast<int>(v);
    }
    if (const json* p = get_opt(j, "seed")) cfg.sim_seed = get_u64(*p, "simulation.seed");
    if (const json* p = get_opt(j, "bins")) {
        const long long v = get_int(*p, "simulation.bins");
        if (v < 10) fail("simulation.bins", "must be >= 10");
        cfg.sim_bins = static_cast<int>(v);
    }
}

}  // namespace

SimulationSpec RunConfig::simulation() const {
    SimulationSpec s;
    s.x_model = x_model;
    s.y_model = y_model;
    s.matrix_size = sim_size;
    s.trials = sim_trials;
    s.seed = sim_seed;
    s.bins = sim_bins;
    s.unwrap_k = unwrap_k;
    return s;
}

RunConfig parse_config(const std::string& text, std::vector<std::string>* warnings) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1, col = 1;
        const size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') { ++line; col = 1; }
            else ++col;
        }
        std::string what = e.what();
        const size_t cut = what.find("] ");
        if (cut != std::string::npos) what = what.substr(cut + 2);
        throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + what);
    }

    require_object(j, "");
    known_keys(j, "", {"x", "y", "grid", "iteration", "simulation", "unwrap_k", "output_dir"});

    RunConfig cfg;
    cfg.x_model = parse_model(get_req(j, "", "x"), "x");
    cfg.y_model = parse_model(get_req(j, "", "y"), "y");
    if (const json* p = get_opt(j, "grid")) parse_grid(*p, cfg.grid);
    if (const json* p = get_opt(j, "iteration")) parse_iteration(*p, cfg.iteration);
    if (const json* p = get_opt(j, "simulation")) parse_simulation(*p, cfg);
    if (const json* p = get_opt(j, "unwrap_k")) {
        const long long v = get_int(*p, "unwrap_k");
        if (v < 1) fail("unwrap_k", "must be >= 1");
        cfg.unwrap_k = static_cast<int>(v);
    }
    if (const json* p = get_opt(j, "output_dir")) cfg.output_dir = get_string(*p, "output_dir");

    if (model_dim(cfg.x_model) != model_dim(cfg.y_model))
        fail("y", "dim " + std::to_string(model_dim(cfg.y_model)) + " does not match x dim " +
                      std::to_string(model_dim(cfg.x_model)));

    const PairReport rep = validate_pair(cfg.x_model, cfg.y_model);
    if (!rep.ok()) {
        std::string msg = "invalid model pair:";
        for (const auto& e : rep.errors) msg += " " + e + ";";
        msg.pop_back();
        throw ConfigError(msg);
    }
    if (warnings) *warnings = rep.warnings;
    return cfg;
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fe
