#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stwomble/data.hpp"
#include "stwomble/gp.hpp"
#include "stwomble/predict.hpp"
#include "stwomble/surface.hpp"
#include "stwomble/womble.hpp"

namespace stw {

// CSV files. Numbers are written with %.17g so a reload reproduces them bit for bit.
// Lines and columns in ParseError are 1-based; the header is line 1.

// Header x,y,t,value[,cov...]; the intercept column is prepended to the covariates.
Dataset load_dataset(const std::string& path);
void write_dataset(const std::string& path, const Dataset& d);

// Header t,vertex_index,x,y,closed. Rows of one curve are contiguous, indices run 0..n-1.
std::vector<PolyCurveAtTime> load_curves(const std::string& path);
void write_curves(const std::string& path, const std::vector<PolyCurveAtTime>& curves);

// Header x,y,t.
PredictionGrid load_grid(const std::string& path);
void write_grid(const std::string& path, const PredictionGrid& g);

// Column names of the 17 derivatives, e.g. dx, dt_dxy, dt2_dyy.
const std::vector<std::string>& derivative_names();

// Flat key = value configuration; '#' starts a comment. Every key has a default, unknown
// or repeated keys are errors. Relative paths are resolved against the config file.
struct RunConfig {
    std::map<std::string, std::string> values;  // every known key with its effective value
    std::string base_dir = ".";

    std::string str(const std::string& key) const;
    double num(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    std::string path(const std::string& key) const;  // empty when the key is unset

    void set(const std::string& key, const std::string& value);  // ConfigError for unknown keys

    KernelParams kernel() const;
    Priors priors() const;
    ChainConfig chain() const;
    PosteriorDraw initial() const;
    QuadratureSpec quadrature() const;
    GammaScope scope() const;
    std::uint64_t seed() const;
    int threads() const;
    std::string out_dir() const;

    // Typed views of every section plus existence of referenced files; throws ConfigError.
    void validate() const;

    // 64-bit FNV-1a over the sorted entries whose key starts with one of the prefixes.
    std::string hash(const std::vector<std::string>& prefixes) const;
};

RunConfig default_config();
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);
std::string describe_config_keys();  // key, default and meaning, one per line

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t h);
std::string file_hash(const std::string& path);

// Draw store: one CSV per quantity plus a key = value metadata file per stage.
using Meta = std::map<std::string, std::string>;
void write_meta(const std::string& path, const Meta& m);
Meta read_meta(const std::string& path);  // MissingArtifact when absent

// sigma2,tau2,phi_s,phi_t,beta_0..,z_0.. with one row per draw.
void write_posterior(const std::string& path, const std::vector<PosteriorDraw>& draws);
std::vector<PosteriorDraw> read_posterior(const std::string& path);

// draw,point and the 17 derivative columns; unavailable entries are nan.
void write_deriv_draws(const std::string& path, const DerivDraws& d);
DerivDraws read_deriv_draws(const std::string& path);

// gamma file: draw,unit and the 8 measures; units file: unit,interval,area.
void write_gamma_draws(const std::string& path, const std::string& units_path, const GammaDraws& g);
GammaDraws read_gamma_draws(const std::string& path, const std::string& units_path, GammaScope scope,
                            int n_intervals);

// quantity,scope,median,hpd_lo,hpd_hi,significant
struct SummaryRow {
    std::string quantity, scope;
    HpdSummary s;
};
void write_summary(const std::string& path, const std::vector<SummaryRow>& rows);

// Comma-separated file split into trimmed fields, header included.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace stw
