#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qbm/model.hpp"
#include "qbm/optimize.hpp"
#include "qbm/training.hpp"

namespace qbm {

enum class ExperimentKind { fully_visible, semi_restricted, supervised_generative, supervised_discriminative };

enum class Machine { bm, qbm, bqbm, bqbm_ce };

const char* to_string(ExperimentKind kind) noexcept;
// File stem: bm, qbm, bqbm, bqbm-ce.
const char* to_string(Machine machine) noexcept;
ExperimentKind parse_experiment_kind(const std::string& text);
Machine parse_machine(const std::string& text);  // case-insensitive

// Flat "key = value" text; '#' starts a comment.
//
//   experiment   fully-visible | semi-restricted | supervised-generative |
//                supervised-discriminative
//   machines     comma list of BM, QBM, bQBM, bQBM-CE
//   n_visible    visible qubits; for supervised runs inputs plus outputs
//   n_hidden     hidden qubits
//   n_outputs    output (label) bits of supervised runs
//   modes, p, seed            mixture data and initialization stream
//   optimizer    bfgs | gd
//   eta, max_iters, grad_tol  optimizer settings
//   gamma_fixed  transverse field of bQBM and bQBM-CE
//   gamma_init   starting field of QBM
//   shared_gamma true | false (QBM trains one field or one per qubit)
//   timing       true | false (wall_ms column; off keeps traces reproducible)
//   out_dir      output directory
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::fully_visible;
  std::vector<Machine> machines;
  int n_visible = 10;
  int n_hidden = 0;
  int n_outputs = 0;
  int modes = 8;
  double p = 0.9;
  std::uint64_t seed = 1;
  OptimizerMethod optimizer = OptimizerMethod::bfgs;
  double eta = 0.05;
  int max_iters = 500;
  double grad_tol = 1e-5;
  double gamma_fixed = 2.0;
  double gamma_init = 0.1;
  bool shared_gamma = true;
  bool timing = false;
  std::string out_dir = "out";

  int n_inputs() const noexcept { return n_visible - n_outputs; }
  bool supervised() const noexcept {
    return experiment == ExperimentKind::supervised_generative ||
           experiment == ExperimentKind::supervised_discriminative;
  }
  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Per-iteration conditional metrics of supervised-generative runs.
struct ConditionalRow {
  int iteration = 0;
  double joint_kl = 0.0;
  double conditional_kl = 0.0;
  double clamped_conditional_kl = 0.0;
};

struct MachineRun {
  Machine machine = Machine::bm;
  std::string status;  // optimizer status or "error"
  std::string error;
  bool failed = false;
  TrainingTrace trace;
  std::vector<ConditionalRow> conditional;
  double final_loss = 0.0;
  double final_kl = 0.0;
  double final_gamma = 0.0;
  double final_e_cl = 0.0;
  double final_e_q = 0.0;
  int iterations = 0;
  int fallback_steps = 0;
  double accuracy = -1.0;  // supervised runs only
  double wall_ms = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<MachineRun> runs;

  bool ok() const;
};

// Starting parameters for one machine: topology from the experiment kind,
// biases and couplings from the seeded initialization stream, and the
// machine's transverse field.
ModelParameters initial_parameters(const ExperimentConfig& config, Machine machine);
OptimizerConfig optimizer_settings(const ExperimentConfig& config, Machine machine);
LossKind machine_loss(Machine machine);

// Trains every machine (QBM_NUM_THREADS of them at a time, default 1) and
// writes <out_dir>/<machine>.csv, <machine>_summary.json, summary.json and,
// for supervised-generative runs, <machine>_conditional.csv. Failed runs
// keep their partial trace and are marked in the summaries.
ExperimentResult run_experiment(const ExperimentConfig& config);
int thread_count_from_environment();

// CSV trace: header iter,loss,kl,e_cl,e_q,gamma,grad_norm,wall_ms, 17
// significant digits.
void emit_trace(const TrainingTrace& trace, const std::filesystem::path& destination);
TrainingTrace read_trace(const std::filesystem::path& source);
std::string format_number(double value);

// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::filesystem::path& source);

struct ChartSeries {
  std::string label;
  CsvTable table;
};

// SVG line chart of `metric` against iter, one polyline per series. The
// metric "energy" plots |e_cl| against |e_q| in iteration order.
void render_chart(const std::vector<ChartSeries>& series, const std::string& metric,
                  const std::filesystem::path& destination);
std::string chart_svg(const std::vector<ChartSeries>& series, const std::string& metric);

struct AnnealerSchedulePoint {
  double beta = 1.0;
  double a_star = 0.0;
  double b_star = 0.0;
  std::vector<double> h;
  std::vector<double> j;  // per pair in (0,1), (0,2), ... order; empty for none
};

// gamma = beta A, bias = beta B h, coupling = beta B J.
ModelParameters annealer_parameter_map(const AnnealerSchedulePoint& point);

}  // namespace qbm
