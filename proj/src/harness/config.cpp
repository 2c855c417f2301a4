#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qbm/harness.hpp"

namespace qbm {

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::fully_visible: return "fully-visible";
    case ExperimentKind::semi_restricted: return "semi-restricted";
    case ExperimentKind::supervised_generative: return "supervised-generative";
    case ExperimentKind::supervised_discriminative: return "supervised-discriminative";
  }
  return "unknown";
}

const char* to_string(Machine machine) noexcept {
  switch (machine) {
    case Machine::bm: return "bm";
    case Machine::qbm: return "qbm";
    case Machine::bqbm: return "bqbm";
    case Machine::bqbm_ce: return "bqbm-ce";
  }
  return "unknown";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: invalid value '" + value + "' for key '" + key + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) bad_value(key, value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string v = lower(value);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, value);
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "fully-visible") return ExperimentKind::fully_visible;
  if (t == "semi-restricted") return ExperimentKind::semi_restricted;
  if (t == "supervised-generative") return ExperimentKind::supervised_generative;
  if (t == "supervised-discriminative") return ExperimentKind::supervised_discriminative;
  throw std::invalid_argument("unknown experiment kind '" + text + "'");
}

Machine parse_machine(const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "bm") return Machine::bm;
  if (t == "qbm") return Machine::qbm;
  if (t == "bqbm") return Machine::bqbm;
  if (t == "bqbm-ce") return Machine::bqbm_ce;
  throw std::invalid_argument("unknown machine '" + text + "'");
}

void ExperimentConfig::validate() const {
  if (machines.empty()) throw std::invalid_argument("config: machine list is empty");
  std::set<Machine> seen;
  for (Machine m : machines) {
    if (!seen.insert(m).second) throw std::invalid_argument("config: machine listed twice");
  }
  if (n_visible < 1) throw std::invalid_argument("config: n_visible must be positive");
  if (n_hidden < 0) throw std::invalid_argument("config: n_hidden must be non-negative");
  if (modes < 1) throw std::invalid_argument("config: modes must be positive");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("config: p must lie in (0, 1)");
  if (!(eta > 0.0)) throw std::invalid_argument("config: eta must be positive");
  if (max_iters < 0) throw std::invalid_argument("config: max_iters must be non-negative");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("config: grad_tol must be positive");
  if (!(gamma_fixed >= 0.0) || !(gamma_init >= 0.0)) {
    throw std::invalid_argument("config: transverse fields must be non-negative");
  }
  if (out_dir.empty()) throw std::invalid_argument("config: out_dir is empty");
  switch (experiment) {
    case ExperimentKind::fully_visible:
      if (n_hidden != 0) throw std::invalid_argument("config: fully-visible experiments have no hidden units");
      break;
    case ExperimentKind::semi_restricted:
      if (n_hidden < 1) throw std::invalid_argument("config: semi-restricted experiments need hidden units");
      break;
    case ExperimentKind::supervised_generative:
    case ExperimentKind::supervised_discriminative:
      if (n_outputs < 1 || n_outputs >= n_visible) {
        throw std::invalid_argument("config: supervised runs need 0 < n_outputs < n_visible");
      }
      if (n_outputs < 31 && modes > (1 << n_outputs)) {
        throw std::invalid_argument("config: more modes than distinct labels");
      }
      break;
  }
  if (seen.count(Machine::bqbm_ce) && experiment != ExperimentKind::semi_restricted) {
    throw std::invalid_argument("config: bQBM-CE requires the semi-restricted topology");
  }
  const int qubits = experiment == ExperimentKind::supervised_discriminative ? n_outputs + n_hidden
                                                                             : n_visible + n_hidden;
  check_size(qubits, "config");
  if (supervised()) check_size(n_visible, "config");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw std::invalid_argument("config: duplicate key '" + key + "'");
    if (key == "experiment") {
      c.experiment = parse_experiment_kind(value);
    } else if (key == "machines") {
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        if (!trim(item).empty()) c.machines.push_back(parse_machine(item));
      }
    } else if (key == "n_visible") {
      c.n_visible = parse_number<int>(key, value);
    } else if (key == "n_hidden") {
      c.n_hidden = parse_number<int>(key, value);
    } else if (key == "n_outputs") {
      c.n_outputs = parse_number<int>(key, value);
    } else if (key == "modes") {
      c.modes = parse_number<int>(key, value);
    } else if (key == "p") {
      c.p = parse_number<double>(key, value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "optimizer") {
      const std::string v = lower(value);
      if (v == "bfgs") {
        c.optimizer = OptimizerMethod::bfgs;
      } else if (v == "gd" || v == "gradient-descent") {
        c.optimizer = OptimizerMethod::gradient_descent;
      } else {
        bad_value(key, value);
      }
    } else if (key == "eta") {
      c.eta = parse_number<double>(key, value);
    } else if (key == "max_iters") {
      c.max_iters = parse_number<int>(key, value);
    } else if (key == "grad_tol") {
      c.grad_tol = parse_number<double>(key, value);
    } else if (key == "gamma_fixed") {
      c.gamma_fixed = parse_number<double>(key, value);
    } else if (key == "gamma_init") {
      c.gamma_init = parse_number<double>(key, value);
    } else if (key == "shared_gamma") {
      c.shared_gamma = parse_bool(key, value);
    } else if (key == "timing") {
      c.timing = parse_bool(key, value);
    } else if (key == "out_dir") {
      c.out_dir = value;
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

}  // namespace qbm
