#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "qbm/harness.hpp"

namespace qbm {

namespace {

constexpr const char* kTraceHeader = "iter,loss,kl,e_cl,e_q,gamma,grad_norm,wall_ms";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_field(const std::string& s, const std::filesystem::path& source) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(source.string() + ": malformed number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void emit_trace(const TrainingTrace& trace, const std::filesystem::path& destination) {
  if (trace.empty()) throw std::invalid_argument("emit_trace: trace is empty");
  std::ofstream out(destination, std::ios::binary);
  if (!out) throw std::runtime_error("emit_trace: cannot open " + destination.string());
  out << kTraceHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.iteration << ',' << format_number(r.loss) << ',' << format_number(r.kl) << ','
        << format_number(r.e_cl) << ',' << format_number(r.e_q) << ',' << format_number(r.gamma) << ','
        << format_number(r.grad_norm) << ',' << format_number(r.wall_ms) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("emit_trace: write failed for " + destination.string());
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

CsvTable read_csv(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + source.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(source.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != t.columns.size()) throw std::runtime_error(source.string() + ": ragged row");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_field(f, source));
    t.rows.push_back(std::move(row));
  }
  return t;
}

TrainingTrace read_trace(const std::filesystem::path& source) {
  const CsvTable t = read_csv(source);
  std::string header;
  for (std::size_t i = 0; i < t.columns.size(); ++i) header += (i ? "," : "") + t.columns[i];
  if (header != kTraceHeader) throw std::runtime_error(source.string() + ": unexpected trace header");
  TrainingTrace trace;
  for (const auto& r : t.rows) {
    TraceRow row;
    row.iteration = static_cast<int>(r[0]);
    row.loss = r[1];
    row.kl = r[2];
    row.e_cl = r[3];
    row.e_q = r[4];
    row.gamma = r[5];
    row.grad_norm = r[6];
    row.wall_ms = r[7];
    trace.append(row);
  }
  return trace;
}

}  // namespace qbm
