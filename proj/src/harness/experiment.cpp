#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <stdexcept>
#include <thread>

#include "qbm/data.hpp"
#include "qbm/harness.hpp"

namespace qbm {

namespace {

std::uint64_t init_seed(const ExperimentConfig& c) { return SplitMix64(c.seed).next(); }

ModelParameters topology(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::fully_visible: return ModelParameters::fully_connected(c.n_visible, 0);
    case ExperimentKind::semi_restricted: return ModelParameters::semi_restricted(c.n_visible, c.n_hidden);
    case ExperimentKind::supervised_generative: return ModelParameters::fully_connected(c.n_visible, c.n_hidden);
    case ExperimentKind::supervised_discriminative:
      return ModelParameters::fully_connected(c.n_outputs, c.n_hidden);
  }
  throw std::logic_error("unknown experiment kind");
}

DiscriminativeParameters initial_discriminative(const ExperimentConfig& c, Machine m) {
  DiscriminativeParameters d = DiscriminativeParameters::create(initial_parameters(c, m), c.n_inputs());
  SplitMix64 rng(init_seed(c) + 1);
  for (Eigen::Index k = 0; k < d.input_coupling.size(); ++k) d.input_coupling.reshaped()(k) = rng.uniform(-0.1, 0.1);
  return d;
}

// Fraction of data mass whose most probable data label the model predicts.
double label_accuracy(const Eigen::MatrixXd& data_rows, const std::vector<Eigen::MatrixXd::Index>& row_index,
                      const std::function<VisibleDistribution(Eigen::Index)>& conditional) {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < data_rows.rows(); ++r) {
    const double px = data_rows.row(r).sum();
    if (px == 0.0) continue;
    Eigen::Index truth = 0;
    data_rows.row(r).maxCoeff(&truth);
    if (static_cast<Eigen::Index>(argmax_label(conditional(row_index[static_cast<std::size_t>(r)]))) == truth) {
      acc += px;
    }
  }
  return acc;
}

bool is_failure(OptimizerStatus s) {
  return s == OptimizerStatus::numerical_error || s == OptimizerStatus::diverged;
}

MachineRun run_machine(const ExperimentConfig& c, Machine machine, const VisibleDistribution& data) {
  MachineRun run;
  run.machine = machine;
  const auto start = std::chrono::steady_clock::now();
  try {
    const OptimizerConfig opt = optimizer_settings(c, machine);
    TrainingHooks hooks;
    hooks.record_wall_time = c.timing;
    if (c.experiment == ExperimentKind::supervised_discriminative) {
      const LabeledDataset labeled = LabeledDataset::from_joint(data, c.n_inputs());
      const auto result = train_discriminative(initial_discriminative(c, machine), labeled, opt, machine_loss(machine),
                                               hooks);
      run.trace = result.trace;
      run.status = to_string(result.status);
      run.error = result.error;
      run.failed = is_failure(result.status);
      run.fallback_steps = result.fallback_steps;
      std::vector<Eigen::Index> rows(labeled.inputs.size());
      for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = static_cast<Eigen::Index>(r);
      run.accuracy = label_accuracy(labeled.joint, rows, [&](Eigen::Index r) {
        return visible_marginals(discriminative_hamiltonian(result.parameters, labeled.inputs[static_cast<std::size_t>(r)]));
      });
    } else {
      const int n_in = c.n_inputs();
      const double h_cond = c.supervised() ? conditional_entropy(data, n_in) : 0.0;
      if (c.experiment == ExperimentKind::supervised_generative) {
        hooks.on_iteration = [&](int iteration, const ModelParameters& p, const GibbsState& s) {
          ConditionalRow row;
          row.iteration = iteration;
          row.joint_kl = kl_divergence(VisibleDistribution::from_weights(p.n_visible, s.leading_marginal(p.n_visible)),
                                       data);
          row.conditional_kl = std::max(conditional_nll(p, s, n_in, data, ConditionalKind::exact) - h_cond, 0.0);
          row.clamped_conditional_kl =
              std::max(conditional_nll(p, s, n_in, data, ConditionalKind::clamped) - h_cond, 0.0);
          run.conditional.push_back(row);
        };
      }
      const auto result = train(initial_parameters(c, machine), data, opt, machine_loss(machine), hooks);
      run.trace = result.trace;
      run.status = to_string(result.status);
      run.error = result.error;
      run.failed = is_failure(result.status);
      run.fallback_steps = result.fallback_steps;
      if (c.experiment == ExperimentKind::supervised_generative) {
        const GibbsState s(result.parameters);
        const Eigen::VectorXd joint = s.leading_marginal(c.n_visible);
        const auto width = static_cast<Eigen::Index>(basis_dimension(c.n_outputs));
        const Eigen::MatrixXd rows = data.probabilities().reshaped<Eigen::RowMajor>(joint.size() / width, width);
        std::vector<Eigen::Index> index(static_cast<std::size_t>(rows.rows()));
        for (std::size_t r = 0; r < index.size(); ++r) index[r] = static_cast<Eigen::Index>(r);
        run.accuracy = label_accuracy(rows, index, [&](Eigen::Index r) {
          return VisibleDistribution::from_weights(c.n_outputs, joint.segment(r * width, width));
        });
      }
    }
  } catch (const std::exception& e) {
    run.status = "error";
    run.error = e.what();
    run.failed = true;
  }
  run.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!run.trace.empty()) {
    const TraceRow& last = run.trace.back();
    run.final_loss = last.loss;
    run.final_kl = last.kl;
    run.final_gamma = last.gamma;
    run.final_e_cl = last.e_cl;
    run.final_e_q = last.e_q;
    run.iterations = last.iteration;
  }
  return run;
}

nlohmann::ordered_json summary_json(const ExperimentConfig& c, const MachineRun& r) {
  nlohmann::ordered_json j;
  j["machine"] = to_string(r.machine);
  j["experiment"] = to_string(c.experiment);
  j["seed"] = c.seed;
  j["final_kl"] = r.final_kl;
  j["final_loss"] = r.final_loss;
  j["final_gamma"] = r.final_gamma;
  j["final_e_cl"] = r.final_e_cl;
  j["final_e_q"] = r.final_e_q;
  j["iterations"] = r.iterations;
  j["status"] = r.status;
  j["failed"] = r.failed;
  j["fallback_steps"] = r.fallback_steps;
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.conditional.empty()) {
    j["final_joint_kl"] = r.conditional.back().joint_kl;
    j["final_conditional_kl"] = r.conditional.back().conditional_kl;
    j["final_clamped_conditional_kl"] = r.conditional.back().clamped_conditional_kl;
  }
  if (r.accuracy >= 0.0) j["accuracy"] = r.accuracy;
  j["wall_ms"] = r.wall_ms;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_outputs(const ExperimentConfig& c, const MachineRun& r) {
  const std::filesystem::path dir(c.out_dir);
  const std::string stem = to_string(r.machine);
  if (r.trace.empty()) {
    write_text(dir / (stem + ".csv"), "iter,loss,kl,e_cl,e_q,gamma,grad_norm,wall_ms\n");
  } else {
    emit_trace(r.trace, dir / (stem + ".csv"));
  }
  if (c.experiment == ExperimentKind::supervised_generative) {
    std::string text = "iter,joint_kl,conditional_kl,clamped_conditional_kl\n";
    for (const auto& row : r.conditional) {
      text += std::to_string(row.iteration) + ',' + format_number(row.joint_kl) + ',' +
              format_number(row.conditional_kl) + ',' + format_number(row.clamped_conditional_kl) + '\n';
    }
    write_text(dir / (stem + "_conditional.csv"), text);
  }
  write_text(dir / (stem + "_summary.json"), summary_json(c, r).dump(2) + "\n");
}

}  // namespace

bool ExperimentResult::ok() const {
  return std::none_of(runs.begin(), runs.end(), [](const MachineRun& r) { return r.failed; });
}

ModelParameters initial_parameters(const ExperimentConfig& c, Machine machine) {
  ModelParameters p = topology(c);
  randomize_parameters(p, init_seed(c));
  p.shared_gamma = machine != Machine::qbm || c.shared_gamma;
  switch (machine) {
    case Machine::bm: p.set_gamma(0.0); break;
    case Machine::qbm: p.set_gamma(c.gamma_init); break;
    case Machine::bqbm:
    case Machine::bqbm_ce: p.set_gamma(c.gamma_fixed); break;
  }
  return p;
}

OptimizerConfig optimizer_settings(const ExperimentConfig& c, Machine machine) {
  OptimizerConfig o;
  o.method = c.optimizer;
  o.learning_rate = c.eta;
  o.max_iterations = c.max_iters;
  o.gradient_tolerance = c.grad_tol;
  switch (machine) {
    case Machine::bm: o.gamma_fixed = 0.0; break;
    case Machine::qbm:
      o.train_gamma = true;
      o.shared_gamma = c.shared_gamma;
      break;
    case Machine::bqbm:
    case Machine::bqbm_ce: o.gamma_fixed = c.gamma_fixed; break;
  }
  return o;
}

LossKind machine_loss(Machine machine) {
  switch (machine) {
    case Machine::bm:
    case Machine::qbm: return LossKind::exact;
    case Machine::bqbm: return LossKind::bound;
    case Machine::bqbm_ce: return LossKind::bound_classical_positive;
  }
  return LossKind::exact;
}

int thread_count_from_environment() {
  const char* v = std::getenv("QBM_NUM_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw std::invalid_argument("QBM_NUM_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 64));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  result.config = config;
  std::filesystem::create_directories(config.out_dir);

  VisibleDistribution data;
  if (config.supervised()) {
    LabeledJointSpec spec;
    spec.inputs = {config.n_inputs(), config.modes, config.p, config.seed};
    spec.label_bits = config.n_outputs;
    data = labeled_mixture(spec).joint;
  } else {
    data = bernoulli_mixture({config.n_visible, config.modes, config.p, config.seed}).distribution;
  }

  result.runs.resize(config.machines.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.machines.size(); i = next++) {
      MachineRun& run = result.runs[i];
      run = run_machine(config, config.machines[i], data);
      try {
        write_outputs(config, run);
      } catch (const std::exception& e) {
        run.failed = true;
        run.status = "error";
        run.error = e.what();
      }
    }
  };
  const int threads = std::min<int>(thread_count_from_environment(), static_cast<int>(config.machines.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  nlohmann::ordered_json all;
  all["experiment"] = to_string(config.experiment);
  all["seed"] = config.seed;
  all["n_visible"] = config.n_visible;
  all["n_hidden"] = config.n_hidden;
  if (config.supervised()) all["n_outputs"] = config.n_outputs;
  all["modes"] = config.modes;
  all["p"] = config.p;
  all["optimizer"] = to_string(config.optimizer);
  all["max_iters"] = config.max_iters;
  all["ok"] = result.ok();
  all["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : result.runs) all["runs"].push_back(summary_json(config, r));
  write_text(std::filesystem::path(config.out_dir) / "summary.json", all.dump(2) + "\n");
  return result;
}

}  // namespace qbm
