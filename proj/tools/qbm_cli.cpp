#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qbm/harness.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::invalid_argument("malformed number '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

int run_train(const std::string& config_path, const std::string& out_dir) {
  qbm::ExperimentConfig config = qbm::load_config(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  const auto result = qbm::run_experiment(config);
  for (const auto& r : result.runs) {
    std::printf("%-8s status=%-18s iterations=%-4d final_kl=%.6f gamma=%.4f", qbm::to_string(r.machine),
                r.status.c_str(), r.iterations, r.final_kl, r.final_gamma);
    if (!r.conditional.empty()) {
      std::printf(" conditional_kl=%.6f clamped_conditional_kl=%.6f", r.conditional.back().conditional_kl,
                  r.conditional.back().clamped_conditional_kl);
    }
    std::printf(" wall=%.1fs\n", r.wall_ms / 1000.0);
    if (!r.error.empty()) std::fprintf(stderr, "%s: %s\n", qbm::to_string(r.machine), r.error.c_str());
  }
  std::printf("outputs in %s\n", config.out_dir.c_str());
  return result.ok() ? 0 : 1;
}

int run_chart(const std::vector<std::string>& traces, const std::string& metric, const std::string& out) {
  std::vector<qbm::ChartSeries> series;
  for (const auto& t : traces) {
    series.push_back({std::filesystem::path(t).stem().string(), qbm::read_csv(t)});
  }
  qbm::render_chart(series, metric, out);
  return 0;
}

int run_annealer_map(double beta, double a, double b, const std::string& h, const std::string& j) {
  qbm::AnnealerSchedulePoint point;
  point.beta = beta;
  point.a_star = a;
  point.b_star = b;
  point.h = parse_list(h);
  point.j = parse_list(j);
  const qbm::ModelParameters p = qbm::annealer_parameter_map(point);
  nlohmann::ordered_json out;
  out["gamma"] = std::vector<double>(p.gamma.data(), p.gamma.data() + p.gamma.size());
  out["bias"] = std::vector<double>(p.bias.data(), p.bias.data() + p.bias.size());
  out["coupling"] = std::vector<double>(p.coupling.data(), p.coupling.data() + p.coupling.size());
  std::cout << out.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact-diagonalization Boltzmann machine trainer"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* train = app.add_subcommand("train", "Run an experiment config");
  train->add_option("config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  train->add_option("--out-dir", out_dir, "Override the config's out_dir");

  std::vector<std::string> traces;
  std::string metric, chart_out;
  auto* chart = app.add_subcommand("chart", "Render CSV traces as an SVG line chart");
  chart->add_option("traces", traces, "Trace CSV files")->required()->check(CLI::ExistingFile);
  chart->add_option("--metric", metric, "Column to plot against iter, or 'energy' for |e_cl| vs |e_q|")->required();
  chart->add_option("--out", chart_out, "Destination SVG")->required();

  double beta = 1.0, a = 0.0, b = 0.0;
  std::string h, j;
  auto* anneal = app.add_subcommand("annealer-map", "Map an annealer schedule point to model parameters");
  anneal->set_help_flag("--help", "Print this help message and exit");
  anneal->add_option("--beta", beta, "Inverse temperature")->required();
  anneal->add_option("--a", a, "A(s*)")->required();
  anneal->add_option("--b", b, "B(s*)")->required();
  anneal->add_option("--h", h, "Comma-separated local fields")->required();
  anneal->add_option("--j", j, "Comma-separated couplings in pair order (0,1),(0,2),...")->default_val("");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(config_path, out_dir);
    if (*chart) return run_chart(traces, metric, chart_out);
    if (*anneal) return run_annealer_map(beta, a, b, h, j);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
