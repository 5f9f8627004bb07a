#include "stwomble/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stwomble/errors.hpp"
#include "stwomble/sim.hpp"

namespace stw {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

std::string g17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double number(const std::string& s, int line, int col, bool allow_nan = false) {
    if (s.empty()) throw ParseError(line, col, "empty field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw ParseError(line, col, "not a number: '" + s + "'");
    if (!std::isfinite(v) && !(allow_nan && std::isnan(v))) throw ParseError(line, col, "non-finite value");
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path);
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line;  // source line of each row
};

// Blank lines are skipped; every row must have as many fields as the header.
Table read_table(const std::string& path, const std::vector<std::string>& required_prefix) {
    auto in = open_in(path);
    Table t;
    std::string s;
    int ln = 0;
    while (std::getline(in, s)) {
        ++ln;
        if (trim(s).empty()) continue;
        auto f = split(s);
        if (t.header.empty()) {
            for (size_t c = 0; c < required_prefix.size(); ++c)
                if (c >= f.size() || f[c] != required_prefix[c])
                    throw ParseError(ln, int(c) + 1, "expected column '" + required_prefix[c] + "'");
            t.header = f;
            continue;
        }
        if (f.size() != t.header.size())
            throw ParseError(ln, int(std::min(f.size(), t.header.size())) + 1,
                             "expected " + std::to_string(t.header.size()) + " fields, found " +
                                 std::to_string(f.size()));
        t.rows.push_back(std::move(f));
        t.line.push_back(ln);
    }
    if (t.header.empty()) throw ParseError(1, 1, "missing header");
    return t;
}

}  // namespace

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<std::vector<std::string>> out;
    std::string s;
    while (std::getline(in, s))
        if (!trim(s).empty()) out.push_back(split(s));
    return out;
}

Dataset load_dataset(const std::string& path) {
    const Table t = read_table(path, {"x", "y", "t", "value"});
    const int n = int(t.rows.size()), p = int(t.header.size()) - 3;
    Dataset d;
    d.y.resize(n);
    d.X.resize(n, p);
    for (int r = 0; r < n; ++r) {
        const auto& f = t.rows[r];
        const int ln = t.line[r];
        d.coords.push_back({number(f[0], ln, 1), number(f[1], ln, 2), number(f[2], ln, 3)});
        d.y(r) = number(f[3], ln, 4);
        d.X(r, 0) = 1;
        for (int c = 1; c < p; ++c) d.X(r, c) = number(f[3 + c], ln, 4 + c);
    }
    d.validate();
    return d;
}

void write_dataset(const std::string& path, const Dataset& d) {
    auto out = open_out(path);
    out << "x,y,t,value";
    for (int c = 1; c < d.p(); ++c) out << ",cov" << c;
    out << '\n';
    for (int r = 0; r < d.n(); ++r) {
        out << g17(d.coords[r].x) << ',' << g17(d.coords[r].y) << ',' << g17(d.coords[r].t) << ',' << g17(d.y(r));
        for (int c = 1; c < d.p(); ++c) out << ',' << g17(d.X(r, c));
        out << '\n';
    }
}

std::vector<PolyCurveAtTime> load_curves(const std::string& path) {
    const Table t = read_table(path, {"t", "vertex_index", "x", "y", "closed"});
    std::vector<PolyCurveAtTime> curves;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        const int ln = t.line[r];
        const double tm = number(f[0], ln, 1);
        const double idx = number(f[1], ln, 2);
        const Eigen::Vector2d v(number(f[2], ln, 3), number(f[3], ln, 4));
        if (f[4] != "0" && f[4] != "1") throw ParseError(ln, 5, "closed must be 0 or 1");
        const bool closed = f[4] == "1";
        if (idx == 0) {
            curves.push_back({tm, {}, closed});
        } else if (curves.empty() || curves.back().t != tm) {
            throw ParseError(ln, 2, "a curve must start at vertex_index 0");
        }
        auto& c = curves.back();
        if (idx != double(c.vertices.size())) throw ParseError(ln, 2, "vertex_index out of sequence");
        if (c.closed != closed) throw ParseError(ln, 5, "closed flag changes within a curve");
        c.vertices.push_back(v);
    }
    return curves;
}

void write_curves(const std::string& path, const std::vector<PolyCurveAtTime>& curves) {
    auto out = open_out(path);
    out << "t,vertex_index,x,y,closed\n";
    for (const auto& c : curves)
        for (size_t k = 0; k < c.vertices.size(); ++k)
            out << g17(c.t) << ',' << k << ',' << g17(c.vertices[k].x()) << ',' << g17(c.vertices[k].y()) << ','
                << (c.closed ? 1 : 0) << '\n';
}

PredictionGrid load_grid(const std::string& path) {
    const Table t = read_table(path, {"x", "y", "t"});
    PredictionGrid g;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        g.points.push_back({number(f[0], t.line[r], 1), number(f[1], t.line[r], 2), number(f[2], t.line[r], 3)});
    }
    return g;
}

void write_grid(const std::string& path, const PredictionGrid& g) {
    auto out = open_out(path);
    out << "x,y,t\n";
    for (const auto& p : g.points) out << g17(p.x) << ',' << g17(p.y) << ',' << g17(p.t) << '\n';
}

const std::vector<std::string>& derivative_names() {
    static const std::vector<std::string> names = [] {
        static const char* sp[3][3] = {{"", "dy", "dyy"}, {"dx", "dxy", ""}, {"dxx", "", ""}};
        std::vector<std::string> v;
        for (const auto& e : lstar().entries) {
            std::string n = e.a == 0 ? "" : e.a == 1 ? "dt" : "dt2";
            const std::string s = sp[e.i][e.j];
            if (!s.empty()) n += n.empty() ? s : "_" + s;
            v.push_back(n);
        }
        return v;
    }();
    return names;
}

// ---- configuration ----

namespace {

struct KeyInfo {
    const char* key;
    const char* def;
    const char* help;
};

const std::vector<KeyInfo>& key_table() {
    static const std::vector<KeyInfo> k = {
        {"run.out", "out", "output directory"},
        {"run.seed", "1", "master seed; fit, predict and womble use seed, seed+1, seed+2"},
        {"run.threads", "1", "worker threads"},
        {"data.path", "", "dataset CSV; empty means the simulate output in run.out"},
        {"simulate.pattern", "1", "test surface 1..4"},
        {"simulate.n_s", "50", "sites"},
        {"simulate.n_t", "6", "times 1..n_t"},
        {"simulate.tau2", "1", "noise variance"},
        {"kernel.family", "matern52", "matern32, matern52 or sqexp"},
        {"kernel.separable", "false", "product of spatial and temporal kernels"},
        {"kernel.temporal", "matched", "separable temporal factor: matched or inverse"},
        {"prior.phi_s_lo", "0.01", "uniform prior on phi_s"},
        {"prior.phi_s_hi", "30", ""},
        {"prior.phi_t_lo", "0.01", "uniform prior on phi_t"},
        {"prior.phi_t_hi", "30", ""},
        {"prior.sigma2_shape", "2", "inverse gamma prior on sigma2"},
        {"prior.sigma2_scale", "1", ""},
        {"prior.tau2_shape", "2", "inverse gamma prior on tau2"},
        {"prior.tau2_scale", "0.1", ""},
        {"prior.beta_var", "1e6", "normal prior variance of the regression coefficients"},
        {"mcmc.n_iter", "2000", "iterations including burn-in"},
        {"mcmc.n_burn", "1000", "burn-in, during which step sizes adapt"},
        {"mcmc.thin", "1", "keep every thin-th draw after burn-in"},
        {"mcmc.target_accept", "0.35", "adaptation target"},
        {"mcmc.adapt_window", "50", "iterations between step-size updates"},
        {"init.sigma2", "10", "starting values"},
        {"init.tau2", "1", ""},
        {"init.phi_s", "3", ""},
        {"init.phi_t", "0.5", ""},
        {"grid.path", "", "grid CSV; empty means a regular grid"},
        {"grid.nx", "10", "cell centres per axis of the regular grid"},
        {"grid.ny", "10", ""},
        {"grid.x_lo", "0", "regular grid and level-curve domain"},
        {"grid.x_hi", "1", ""},
        {"grid.y_lo", "0", ""},
        {"grid.y_hi", "1", ""},
        {"grid.times", "", "comma list; empty means the distinct data times"},
        {"surface.curves", "", "curve CSV; empty means level curves"},
        {"surface.field", "posterior_mean", "level-curve field: posterior_mean or pattern"},
        {"surface.level", "0", "contour level"},
        {"surface.kind", "closed", "closed: smallest closed contour around the anchor; open: nearest open one"},
        {"surface.anchor_x", "0.5", ""},
        {"surface.anchor_y", "0.5", ""},
        {"surface.times", "", "comma list of curve times; empty means grid.times"},
        {"surface.n_vertices", "12", "vertices per resampled curve"},
        {"surface.resolution", "101", "field samples per axis for marching squares"},
        {"surface.mean_draws", "25", "posterior draws averaged into the mean field"},
        {"womble.n_upsilon", "4", "levels per time interval, both ends included"},
        {"womble.scope", "interval", "interval or triangle"},
        {"quadrature.order", "4", "Gauss-Legendre nodes per axis"},
        {"quadrature.tol", "1e-6", "relative tolerance between order and 2*order"},
        {"quadrature.max_refine", "0", "order doublings allowed; 0 skips the check"},
        {"quadrature.sqexp_fast", "false", "closed-form inner integral for sqexp"},
        {"report.level", "0.95", "HPD mass"},
    };
    return k;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

}  // namespace

RunConfig default_config() {
    RunConfig c;
    for (const auto& k : key_table()) c.values[k.key] = k.def;
    return c;
}

std::string describe_config_keys() {
    std::string s;
    for (const auto& k : key_table()) {
        s += std::string(k.key) + " = " + k.def;
        if (*k.help) s += "    # " + std::string(k.help);
        s += '\n';
    }
    return s;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
}

std::string RunConfig::str(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
}

double RunConfig::num(const std::string& key) const {
    const std::string v = str(key);
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return d;
}

int RunConfig::integer(const std::string& key) const {
    const double d = num(key);
    if (d != std::floor(d) || std::abs(d) > 2e9) throw ConfigError(key + ": expected an integer");
    return int(d);
}

bool RunConfig::flag(const std::string& key) const { return parse_bool(key, str(key)); }

std::vector<double> RunConfig::list(const std::string& key) const {
    std::vector<double> out;
    const std::string v = str(key);
    if (v.empty()) return out;
    for (const auto& f : split(v)) {
        char* end = nullptr;
        const double d = std::strtod(f.c_str(), &end);
        if (f.empty() || end != f.c_str() + f.size() || !std::isfinite(d))
            throw ConfigError(key + ": bad list entry '" + f + "'");
        out.push_back(d);
    }
    return out;
}

std::string RunConfig::path(const std::string& key) const {
    const std::string v = str(key);
    if (v.empty()) return v;
    const fs::path p(v);
    return p.is_absolute() ? v : (fs::path(base_dir) / p).string();
}

KernelParams RunConfig::kernel() const {
    KernelParams k;
    k.family = parse_family(str("kernel.family"));
    k.separable = flag("kernel.separable");
    const std::string t = str("kernel.temporal");
    if (t == "matched") k.temporal = TemporalKind::Matched;
    else if (t == "inverse") k.temporal = TemporalKind::Inverse;
    else throw ConfigError("kernel.temporal: expected matched or inverse");
    return k;
}

Priors RunConfig::priors() const {
    Priors p;
    p.phi_s_lo = num("prior.phi_s_lo");
    p.phi_s_hi = num("prior.phi_s_hi");
    p.phi_t_lo = num("prior.phi_t_lo");
    p.phi_t_hi = num("prior.phi_t_hi");
    p.sigma2_shape = num("prior.sigma2_shape");
    p.sigma2_scale = num("prior.sigma2_scale");
    p.tau2_shape = num("prior.tau2_shape");
    p.tau2_scale = num("prior.tau2_scale");
    p.beta_var = num("prior.beta_var");
    return p;
}

ChainConfig RunConfig::chain() const {
    ChainConfig c;
    c.n_iter = integer("mcmc.n_iter");
    c.n_burn = integer("mcmc.n_burn");
    c.thin = integer("mcmc.thin");
    c.target_accept = num("mcmc.target_accept");
    c.adapt_window = integer("mcmc.adapt_window");
    c.seed = seed();
    return c;
}

PosteriorDraw RunConfig::initial() const {
    PosteriorDraw d;
    d.sigma2 = num("init.sigma2");
    d.tau2 = num("init.tau2");
    d.phi_s = num("init.phi_s");
    d.phi_t = num("init.phi_t");
    return d;
}

QuadratureSpec RunConfig::quadrature() const {
    QuadratureSpec q;
    q.order = integer("quadrature.order");
    q.tol = num("quadrature.tol");
    q.max_refine = integer("quadrature.max_refine");
    q.sqexp_fast = flag("quadrature.sqexp_fast");
    return q;
}

GammaScope RunConfig::scope() const {
    const std::string s = str("womble.scope");
    if (s == "interval") return GammaScope::Interval;
    if (s == "triangle") return GammaScope::Triangle;
    throw ConfigError("womble.scope: expected interval or triangle");
}

std::uint64_t RunConfig::seed() const {
    const std::string v = str("run.seed");
    char* end = nullptr;
    errno = 0;
    const unsigned long long s = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() || errno == ERANGE)
        throw ConfigError("run.seed: expected a non-negative integer");
    return s;
}

int RunConfig::threads() const { return integer("run.threads"); }

std::string RunConfig::out_dir() const { return path("run.out"); }

void RunConfig::validate() const {
    kernel().validate();
    priors().validate(1);
    chain().validate();
    quadrature().validate();
    scope();
    if (threads() < 1) throw ConfigError("run.threads must be >= 1");
    if (out_dir().empty()) throw ConfigError("run.out must not be empty");
    PatternSpec ps;
    ps.id = integer("simulate.pattern");
    ps.n_s = integer("simulate.n_s");
    ps.n_t = integer("simulate.n_t");
    ps.tau2 = num("simulate.tau2");
    ps.validate();
    const PosteriorDraw i = initial();
    if (!(i.sigma2 > 0 && i.tau2 > 0 && i.phi_s > 0 && i.phi_t > 0)) throw ConfigError("init values must be positive");
    if (integer("grid.nx") < 1 || integer("grid.ny") < 1) throw ConfigError("grid.nx and grid.ny must be >= 1");
    if (!(num("grid.x_lo") < num("grid.x_hi") && num("grid.y_lo") < num("grid.y_hi")))
        throw ConfigError("grid bounds must be ordered");
    list("grid.times");
    list("surface.times");
    num("surface.level");
    num("surface.anchor_x");
    num("surface.anchor_y");
    const std::string field = str("surface.field");
    if (field != "posterior_mean" && field != "pattern") throw ConfigError("surface.field: posterior_mean or pattern");
    const std::string kind = str("surface.kind");
    if (kind != "closed" && kind != "open") throw ConfigError("surface.kind: closed or open");
    if (integer("surface.n_vertices") < 0) throw ConfigError("surface.n_vertices must be >= 0");
    if (integer("surface.resolution") < 2) throw ConfigError("surface.resolution must be >= 2");
    if (integer("surface.mean_draws") < 1) throw ConfigError("surface.mean_draws must be >= 1");
    if (integer("womble.n_upsilon") < 2) throw ConfigError("womble.n_upsilon must be >= 2");
    const double lv = num("report.level");
    if (!(lv > 0 && lv < 1)) throw ConfigError("report.level must be in (0, 1)");
    for (const char* k : {"data.path", "grid.path", "surface.curves"}) {
        const std::string p = path(k);
        if (!p.empty() && !fs::exists(p)) throw ConfigError(std::string(k) + ": no such file " + p);
    }
}

std::string RunConfig::hash(const std::vector<std::string>& prefixes) const {
    std::string blob;
    for (const auto& [k, v] : values)
        for (const auto& p : prefixes)
            if (k.rfind(p, 0) == 0) {
                blob += k + '=' + v + '\n';
                break;
            }
    return hex64(fnv1a(blob));
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    RunConfig c = default_config();
    c.base_dir = base_dir;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string s;
    int ln = 0;
    while (std::getline(in, s)) {
        ++ln;
        const auto hash = s.find('#');
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(ln) + ": expected key = value");
        const std::string key = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
        if (seen.count(key))
            throw ConfigError("config line " + std::to_string(ln) + ": '" + key + "' already set on line " +
                              std::to_string(seen[key]));
        seen[key] = ln;
        try {
            c.set(key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(ln) + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const fs::path dir = fs::path(path).parent_path();
    return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const std::string& path) {
    auto in = open_in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a(ss.str()));
}

// ---- draw store ----

void write_meta(const std::string& path, const Meta& m) {
    auto out = open_out(path);
    for (const auto& [k, v] : m) out << k << " = " << v << '\n';
}

Meta read_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("missing " + path);
    Meta m;
    std::string s;
    while (std::getline(in, s)) {
        const auto eq = s.find('=');
        if (eq != std::string::npos) m[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
    }
    return m;
}

void write_posterior(const std::string& path, const std::vector<PosteriorDraw>& draws) {
    auto out = open_out(path);
    const int p = draws.empty() ? 0 : int(draws[0].beta.size());
    const int n = draws.empty() ? 0 : int(draws[0].z.size());
    out << "sigma2,tau2,phi_s,phi_t";
    for (int k = 0; k < p; ++k) out << ",beta_" << k;
    for (int k = 0; k < n; ++k) out << ",z_" << k;
    out << '\n';
    for (const auto& d : draws) {
        out << g17(d.sigma2) << ',' << g17(d.tau2) << ',' << g17(d.phi_s) << ',' << g17(d.phi_t);
        for (int k = 0; k < p; ++k) out << ',' << g17(d.beta(k));
        for (int k = 0; k < n; ++k) out << ',' << g17(d.z(k));
        out << '\n';
    }
}

std::vector<PosteriorDraw> read_posterior(const std::string& path) {
    const Table t = read_table(path, {"sigma2", "tau2", "phi_s", "phi_t"});
    int p = 0, n = 0;
    for (size_t c = 4; c < t.header.size(); ++c) {
        if (t.header[c].rfind("beta_", 0) == 0) ++p;
        else if (t.header[c].rfind("z_", 0) == 0) ++n;
        else throw ParseError(1, int(c) + 1, "unexpected column '" + t.header[c] + "'");
    }
    std::vector<PosteriorDraw> out;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        const int ln = t.line[r];
        PosteriorDraw d;
        d.sigma2 = number(f[0], ln, 1);
        d.tau2 = number(f[1], ln, 2);
        d.phi_s = number(f[2], ln, 3);
        d.phi_t = number(f[3], ln, 4);
        d.beta.resize(p);
        d.z.resize(n);
        for (int k = 0; k < p; ++k) d.beta(k) = number(f[4 + k], ln, 5 + k);
        for (int k = 0; k < n; ++k) d.z(k) = number(f[4 + p + k], ln, 5 + p + k);
        out.push_back(std::move(d));
    }
    return out;
}

void write_deriv_draws(const std::string& path, const DerivDraws& d) {
    auto out = open_out(path);
    out << "draw,point";
    for (const auto& n : derivative_names()) out << ',' << n;
    out << '\n';
    for (int i = 0; i < d.n_draws; ++i)
        for (int g = 0; g < d.n_points; ++g) {
            out << i << ',' << g;
            for (int k = 0; k < kLStar; ++k) out << ',' << g17(d(i, g, k));
            out << '\n';
        }
}

DerivDraws read_deriv_draws(const std::string& path) {
    std::vector<std::string> head = {"draw", "point"};
    for (const auto& n : derivative_names()) head.push_back(n);
    const Table t = read_table(path, head);
    DerivDraws d;
    for (const auto& f : t.rows) {
        d.n_draws = std::max(d.n_draws, std::atoi(f[0].c_str()) + 1);
        d.n_points = std::max(d.n_points, std::atoi(f[1].c_str()) + 1);
    }
    if (size_t(d.n_draws) * d.n_points != t.rows.size()) throw ParseError(1, 1, "derivative draws are not a full table");
    d.values.assign(t.rows.size() * kLStar, 0.0);
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        const int ln = t.line[r];
        const int i = int(number(f[0], ln, 1)), g = int(number(f[1], ln, 2));
        if (i < 0 || g < 0 || size_t(i) * d.n_points + g != r) throw ParseError(ln, 1, "rows out of order");
        for (int k = 0; k < kLStar; ++k) d.at(i, g, k) = number(f[2 + k], ln, 3 + k, true);
    }
    for (int k = 0; k < kLStar; ++k) d.available[k] = d.values.empty() || !std::isnan(d(0, 0, k));
    return d;
}

void write_gamma_draws(const std::string& path, const std::string& units_path, const GammaDraws& g) {
    auto out = open_out(path);
    out << "draw,unit";
    for (const auto& n : measure_names()) out << ',' << n;
    out << '\n';
    for (int d = 0; d < g.n_draws; ++d)
        for (int u = 0; u < g.n_units; ++u) {
            out << d << ',' << u;
            for (int r = 0; r < 8; ++r) out << ',' << g17(g.values[(size_t(d) * g.n_units + u) * 8 + r]);
            out << '\n';
        }
    auto uo = open_out(units_path);
    uo << "unit,interval,area\n";
    for (int u = 0; u < g.n_units; ++u) uo << u << ',' << g.unit_interval[u] << ',' << g17(g.unit_area[u]) << '\n';
}

GammaDraws read_gamma_draws(const std::string& path, const std::string& units_path, GammaScope scope,
                            int n_intervals) {
    GammaDraws g;
    g.scope = scope;
    g.n_intervals = n_intervals;
    const Table ut = read_table(units_path, {"unit", "interval", "area"});
    for (size_t r = 0; r < ut.rows.size(); ++r) {
        const auto& f = ut.rows[r];
        if (number(f[0], ut.line[r], 1) != double(r)) throw ParseError(ut.line[r], 1, "units out of order");
        g.unit_interval.push_back(int(number(f[1], ut.line[r], 2)));
        g.unit_area.push_back(number(f[2], ut.line[r], 3));
    }
    g.n_units = int(g.unit_area.size());
    std::vector<std::string> head = {"draw", "unit"};
    for (const auto& n : measure_names()) head.push_back(n);
    const Table t = read_table(path, head);
    if (g.n_units == 0 || t.rows.size() % g.n_units) throw ParseError(1, 1, "gamma draws do not match the units file");
    g.n_draws = int(t.rows.size()) / g.n_units;
    g.values.resize(t.rows.size() * 8);
    for (size_t r = 0; r < t.rows.size(); ++r)
        for (int k = 0; k < 8; ++k) g.values[r * 8 + k] = number(t.rows[r][2 + k], t.line[r], 3 + k);
    return g;
}

void write_summary(const std::string& path, const std::vector<SummaryRow>& rows) {
    auto out = open_out(path);
    out << "quantity,scope,median,hpd_lo,hpd_hi,significant\n";
    for (const auto& r : rows)
        out << r.quantity << ',' << r.scope << ',' << g17(r.s.median) << ',' << g17(r.s.lower) << ','
            << g17(r.s.upper) << ',' << significance_name(r.s.significant) << '\n';
}

}  // namespace stw
