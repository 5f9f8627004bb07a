#include "stwomble/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "stwomble/errors.hpp"
#include "stwomble/sim.hpp"

namespace stw {

namespace fs = std::filesystem;

namespace {

std::string in_out(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out_dir()) / name).string(); }

std::string dataset_path(const RunConfig& cfg) {
    const std::string p = cfg.path("data.path");
    return p.empty() ? in_out(cfg, "dataset.csv") : p;
}

std::string combine(const std::vector<std::string>& parts) {
    std::string s;
    for (const auto& p : parts) s += p + ';';
    return hex64(fnv1a(s));
}

// true when the stage is already done for this hash
bool up_to_date(const RunConfig& cfg, const std::string& stage, const std::string& hash, bool force) {
    const std::string meta = in_out(cfg, stage + ".meta");
    if (!fs::exists(meta)) return false;
    const Meta m = read_meta(meta);
    const auto it = m.find("config_hash");
    const bool same = it != m.end() && it->second == hash;
    if (force) return false;
    if (same) {
        std::printf("%s: up to date in %s\n", stage.c_str(), cfg.out_dir().c_str());
        return true;
    }
    throw ConfigError(stage + " outputs in " + cfg.out_dir() +
                      " were produced by a different configuration; pass --force to overwrite");
}

void require(const RunConfig& cfg, const std::string& stage) {
    const Meta m = read_meta(in_out(cfg, stage + ".meta"));
    const auto it = m.find("config_hash");
    if (it == m.end() || it->second != stage_hash(cfg, stage))
        throw MissingArtifact(stage + " outputs in " + cfg.out_dir() + " do not match the current configuration");
}

Meta base_meta(const std::string& stage, const std::string& hash, std::uint64_t seed) {
    return {{"stage", stage}, {"config_hash", hash}, {"seed", std::to_string(seed)}, {"version", kVersion}};
}

std::vector<double> distinct_times(const Dataset& d) {
    std::set<double> s;
    for (const auto& p : d.coords) s.insert(p.t);
    return {s.begin(), s.end()};
}

PredictionGrid build_grid(const RunConfig& cfg, const Dataset& data) {
    const std::string gp = cfg.path("grid.path");
    if (!gp.empty()) return load_grid(gp);
    std::vector<double> times = cfg.list("grid.times");
    if (times.empty()) times = distinct_times(data);
    const int nx = cfg.integer("grid.nx"), ny = cfg.integer("grid.ny");
    const double x0 = cfg.num("grid.x_lo"), x1 = cfg.num("grid.x_hi");
    const double y0 = cfg.num("grid.y_lo"), y1 = cfg.num("grid.y_hi");
    PredictionGrid g;
    for (double t : times)
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j)
                g.points.push_back({x0 + (x1 - x0) * (i + 0.5) / nx, y0 + (y1 - y0) * (j + 0.5) / ny, t});
    return g;
}

// Posterior mean of the intercept plus latent field, averaged over evenly spaced draws.
// Covariates beyond the intercept are not known off the data sites and are left out.
class MeanField {
public:
    MeanField(const Dataset& data, const std::vector<PosteriorDraw>& draws, const KernelParams& kernel, int n_use)
        : data_(data) {
        const int n = int(draws.size());
        n_use = std::min(n_use, n);
        for (int k = 0; k < n_use; ++k) {
            const PosteriorDraw& d = draws[size_t(k) * n / n_use];
            const KernelParams p = with_theta(kernel, d);
            const Factor F = jittered_cholesky(data_cov(data.coords, p));
            terms_.push_back({p, F.llt.solve(d.z), d.beta(0)});
        }
    }

    double operator()(double x, double y, double t) const {
        double s = 0;
        for (const auto& tm : terms_) {
            double v = tm.beta0;
            for (int i = 0; i < data_.n(); ++i) {
                const auto& c = data_.coords[i];
                v += cov(lag(x - c.x, y - c.y, t - c.t), tm.p) * tm.alpha(i);
            }
            s += v;
        }
        return s / double(terms_.size());
    }

private:
    struct Term {
        KernelParams p;
        Eigen::VectorXd alpha;
        double beta0;
    };
    static LagPair lag(double dx, double dy, double dt) {
        LagPair l;
        l.ds = {dx, dy};
        l.dt = dt;
        return l;
    }
    const Dataset& data_;
    std::vector<Term> terms_;
};

std::vector<PolyCurveAtTime> surface_curves(const RunConfig& cfg, const Dataset& data,
                                            const std::vector<PosteriorDraw>& draws) {
    const std::string cp = cfg.path("surface.curves");
    if (!cp.empty()) return load_curves(cp);
    std::vector<double> times = cfg.list("surface.times");
    if (times.empty()) times = cfg.list("grid.times");
    if (times.empty()) times = distinct_times(data);
    const int res = cfg.integer("surface.resolution");
    const double x0 = cfg.num("grid.x_lo"), x1 = cfg.num("grid.x_hi");
    const double y0 = cfg.num("grid.y_lo"), y1 = cfg.num("grid.y_hi");
    const bool pattern = cfg.str("surface.field") == "pattern";
    const int id = cfg.integer("simulate.pattern");
    const MeanField mean(data, draws, cfg.kernel(), pattern ? 1 : cfg.integer("surface.mean_draws"));
    const Eigen::Vector2d anchor(cfg.num("surface.anchor_x"), cfg.num("surface.anchor_y"));
    const double level = cfg.num("surface.level");
    std::vector<PolyCurveAtTime> curves;
    for (double t : times) {
        GridField f;
        f.t = t;
        for (int i = 0; i < res; ++i) {
            f.xs.push_back(x0 + (x1 - x0) * i / (res - 1));
            f.ys.push_back(y0 + (y1 - y0) * i / (res - 1));
        }
        f.values.resize(res, res);
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < res; ++j)
                f.values(i, j) = pattern ? pattern_mean(id, f.xs[i], f.ys[j], t) : mean(f.xs[i], f.ys[j], t);
        const auto lc = level_curves(f, level);
        PolyCurveAtTime c = cfg.str("surface.kind") == "closed" ? closed_curve_around(lc, anchor)
                                                                 : open_curve_near(lc, anchor);
        c.t = t;
        curves.push_back(std::move(c));
    }
    return align_curves(curves, cfg.integer("surface.n_vertices"));
}

}  // namespace

std::string stage_hash(const RunConfig& cfg, const std::string& stage) {
    if (stage == "simulate") return cfg.hash({"simulate.", "run.seed"});
    const std::string fit = combine({cfg.hash({"kernel.", "prior.", "mcmc.", "init.", "run.seed"}),
                                     file_hash(dataset_path(cfg))});
    if (stage == "fit") return fit;
    auto file_part = [&](const char* key) {
        const std::string p = cfg.path(key);
        return p.empty() ? std::string("-") : file_hash(p);
    };
    if (stage == "predict") return combine({fit, cfg.hash({"grid."}), file_part("grid.path")});
    if (stage == "womble") {
        std::vector<std::string> keys = {"surface.", "womble.", "quadrature."};
        if (cfg.path("surface.curves").empty()) keys.push_back("grid.");
        if (cfg.str("surface.field") == "pattern") keys.push_back("simulate.pattern");
        return combine({fit, cfg.hash(keys), file_part("surface.curves")});
    }
    if (stage == "report") {
        std::vector<std::string> parts = {fit, cfg.hash({"report."})};
        for (const char* s : {"predict", "womble"})
            if (fs::exists(in_out(cfg, std::string(s) + ".meta"))) parts.push_back(stage_hash(cfg, s));
        return combine(parts);
    }
    throw ConfigError("unknown stage '" + stage + "'");
}

void cmd_simulate(const RunConfig& cfg, bool force) {
    cfg.validate();
    const std::string hash = stage_hash(cfg, "simulate");
    if (up_to_date(cfg, "simulate", hash, force)) return;
    PatternSpec spec;
    spec.id = cfg.integer("simulate.pattern");
    spec.n_s = cfg.integer("simulate.n_s");
    spec.n_t = cfg.integer("simulate.n_t");
    spec.tau2 = cfg.num("simulate.tau2");
    spec.seed = cfg.seed();
    const Dataset d = gen_pattern(spec);
    write_dataset(in_out(cfg, "dataset.csv"), d);
    write_meta(in_out(cfg, "simulate.meta"), base_meta("simulate", hash, spec.seed));
    std::printf("simulate: %d observations of pattern %d\n", d.n(), spec.id);
}

void cmd_fit(const RunConfig& cfg, bool force) {
    cfg.validate();
    const std::string src = dataset_path(cfg);
    if (!fs::exists(src)) throw MissingArtifact("no dataset: set data.path or run simulate first");
    const std::string hash = stage_hash(cfg, "fit");
    if (up_to_date(cfg, "fit", hash, force)) return;
    const Dataset data = load_dataset(src);
    cfg.priors().validate(data.p());
    ChainStats stats;
    const auto draws = run_chain(data, cfg.priors(), cfg.initial(), cfg.kernel(), cfg.chain(), &stats);
    write_dataset(in_out(cfg, "fit_data.csv"), data);
    write_posterior(in_out(cfg, "posterior.csv"), draws);
    Meta m = base_meta("fit", hash, cfg.seed());
    m["n_draws"] = std::to_string(draws.size());
    const char* names[4] = {"sigma2", "tau2", "phi_s", "phi_t"};
    for (int k = 0; k < 4; ++k) m[std::string("accept_") + names[k]] = std::to_string(stats.accept_rate[k]);
    write_meta(in_out(cfg, "fit.meta"), m);
    std::printf("fit: %zu draws, acceptance %.2f %.2f %.2f %.2f\n", draws.size(), stats.accept_rate[0],
                stats.accept_rate[1], stats.accept_rate[2], stats.accept_rate[3]);
}

void cmd_predict(const RunConfig& cfg, bool force) {
    cfg.validate();
    require(cfg, "fit");
    const std::string hash = stage_hash(cfg, "predict");
    if (up_to_date(cfg, "predict", hash, force)) return;
    const Dataset data = load_dataset(in_out(cfg, "fit_data.csv"));
    const auto draws = read_posterior(in_out(cfg, "posterior.csv"));
    const PredictionGrid grid = separate_from_data(build_grid(cfg, data), data);
    const DerivDraws dd = predict_derivatives(draws, data, grid, cfg.kernel(), cfg.seed() + 1, cfg.threads());
    write_grid(in_out(cfg, "grid.csv"), grid);
    write_deriv_draws(in_out(cfg, "derivs.csv"), dd);
    Meta m = base_meta("predict", hash, cfg.seed() + 1);
    m["n_points"] = std::to_string(grid.points.size());
    write_meta(in_out(cfg, "predict.meta"), m);
    std::printf("predict: %d draws at %d grid points\n", dd.n_draws, dd.n_points);
}

void cmd_womble(const RunConfig& cfg, bool force) {
    cfg.validate();
    require(cfg, "fit");
    const std::string hash = stage_hash(cfg, "womble");
    if (up_to_date(cfg, "womble", hash, force)) return;
    const Dataset data = load_dataset(in_out(cfg, "fit_data.csv"));
    const auto draws = read_posterior(in_out(cfg, "posterior.csv"));
    const auto curves = surface_curves(cfg, data, draws);
    const TriangulatedSurface s = triangulate(curves, cfg.integer("womble.n_upsilon"));
    const GammaDraws g =
        sample_gamma(draws, data, s, cfg.kernel(), cfg.quadrature(), cfg.scope(), cfg.seed() + 2, cfg.threads());
    write_curves(in_out(cfg, "curves.csv"), curves);
    write_gamma_draws(in_out(cfg, "gamma.csv"), in_out(cfg, "gamma_units.csv"), g);
    Meta m = base_meta("womble", hash, cfg.seed() + 2);
    m["scope"] = cfg.str("womble.scope");
    m["n_intervals"] = std::to_string(g.n_intervals);
    m["n_triangles"] = std::to_string(s.triangles.size());
    write_meta(in_out(cfg, "womble.meta"), m);
    std::printf("womble: %zu triangles over %d intervals, area %.6g\n", s.triangles.size(), g.n_intervals,
                s.total_area());
}

void cmd_report(const RunConfig& cfg, bool force) {
    cfg.validate();
    require(cfg, "fit");
    const bool have_predict = fs::exists(in_out(cfg, "predict.meta"));
    const bool have_womble = fs::exists(in_out(cfg, "womble.meta"));
    if (have_predict) require(cfg, "predict");
    if (have_womble) require(cfg, "womble");
    const std::string hash = stage_hash(cfg, "report");
    if (up_to_date(cfg, "report", hash, force)) return;
    const double level = cfg.num("report.level");

    const auto draws = read_posterior(in_out(cfg, "posterior.csv"));
    std::vector<SummaryRow> params;
    auto column = [&](auto get) {
        std::vector<double> v;
        for (const auto& d : draws) v.push_back(get(d));
        return summarize(v, level);
    };
    params.push_back({"sigma2", "posterior", column([](const PosteriorDraw& d) { return d.sigma2; })});
    params.push_back({"tau2", "posterior", column([](const PosteriorDraw& d) { return d.tau2; })});
    params.push_back({"phi_s", "posterior", column([](const PosteriorDraw& d) { return d.phi_s; })});
    params.push_back({"phi_t", "posterior", column([](const PosteriorDraw& d) { return d.phi_t; })});
    for (int k = 0; k < (draws.empty() ? 0 : int(draws[0].beta.size())); ++k)
        params.push_back({"beta_" + std::to_string(k), "posterior",
                          column([k](const PosteriorDraw& d) { return d.beta(k); })});
    write_summary(in_out(cfg, "params_summary.csv"), params);

    if (have_predict) {
        const DerivDraws dd = read_deriv_draws(in_out(cfg, "derivs.csv"));
        const PredictionGrid grid = load_grid(in_out(cfg, "grid.csv"));
        if (int(grid.points.size()) != dd.n_points) throw ShapeMismatch("grid.csv and derivs.csv disagree");
        std::vector<SummaryRow> rows;
        std::FILE* sig = std::fopen(in_out(cfg, "significance.csv").c_str(), "w");
        if (!sig) throw ConfigError("cannot write significance.csv");
        std::fprintf(sig, "x,y,t");
        for (const auto& n : derivative_names()) std::fprintf(sig, ",%s", n.c_str());
        std::fprintf(sig, "\n");
        for (int g = 0; g < dd.n_points; ++g) {
            const auto& p = grid.points[g];
            std::fprintf(sig, "%.17g,%.17g,%.17g", p.x, p.y, p.t);
            for (int k = 0; k < kLStar; ++k) {
                if (!dd.available[k]) {
                    std::fprintf(sig, ",na");
                    continue;
                }
                const HpdSummary h = summarize(dd.series(g, k), level);
                rows.push_back({derivative_names()[k], "point:" + std::to_string(g), h});
                std::fprintf(sig, ",%s", significance_name(h.significant));
            }
            std::fprintf(sig, "\n");
        }
        std::fclose(sig);
        write_summary(in_out(cfg, "derivative_summary.csv"), rows);
    }

    if (have_womble) {
        const Meta wm = read_meta(in_out(cfg, "womble.meta"));
        const GammaScope scope = wm.at("scope") == "triangle" ? GammaScope::Triangle : GammaScope::Interval;
        const GammaDraws g = read_gamma_draws(in_out(cfg, "gamma.csv"), in_out(cfg, "gamma_units.csv"), scope,
                                              std::stoi(wm.at("n_intervals")));
        std::vector<SummaryRow> rows;
        for (const auto& r : aggregate(g, level, scope == GammaScope::Triangle)) {
            const std::string sc = r.scope == "overall" ? r.scope : r.scope + ":" + std::to_string(r.index);
            for (int k = 0; k < 8; ++k) rows.push_back({"total:" + measure_names()[k], sc, r.total[k]});
            for (int k = 0; k < 8; ++k) rows.push_back({"average:" + measure_names()[k], sc, r.average[k]});
        }
        write_summary(in_out(cfg, "womble_summary.csv"), rows);
    }
    write_meta(in_out(cfg, "report.meta"), base_meta("report", hash, cfg.seed()));
    std::printf("report: summaries written to %s\n", cfg.out_dir().c_str());
}

void cmd_run(const RunConfig& cfg, bool force) {
    if (cfg.path("data.path").empty()) cmd_simulate(cfg, force);
    cmd_fit(cfg, force);
    cmd_predict(cfg, force);
    cmd_womble(cfg, force);
    cmd_report(cfg, force);
}

}  // namespace stw
