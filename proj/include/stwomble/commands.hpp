#pragma once

#include <string>

#include "stwomble/io.hpp"

namespace stw {

inline constexpr const char* kVersion = "0.1.0";

// Each command writes into cfg.out_dir() and records <stage>.meta with the hash of the
// configuration it depends on. A stage whose meta already matches is skipped; one whose
// meta disagrees is refused unless force is set. Downstream stages need a matching
// upstream meta and throw MissingArtifact otherwise.
//
//   simulate  dataset.csv
//   fit       fit_data.csv, posterior.csv
//   predict   grid.csv, derivs.csv
//   womble    curves.csv, gamma.csv, gamma_units.csv
//   report    params_summary.csv, derivative_summary.csv, significance.csv, womble_summary.csv
void cmd_simulate(const RunConfig& cfg, bool force = false);
void cmd_fit(const RunConfig& cfg, bool force = false);
void cmd_predict(const RunConfig& cfg, bool force = false);
void cmd_womble(const RunConfig& cfg, bool force = false);
void cmd_report(const RunConfig& cfg, bool force = false);
// simulate when no dataset is configured, then fit, predict, womble and report.
void cmd_run(const RunConfig& cfg, bool force = false);

// Hash a stage is keyed on; depends on file contents for data, grid and curve files.
std::string stage_hash(const RunConfig& cfg, const std::string& stage);

}  // namespace stw
