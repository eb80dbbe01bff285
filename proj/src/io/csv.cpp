#include "rlg/io/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rlg/error.hpp"
#include "rlg/net/checkpoint.hpp"
#include "rlg/version.hpp"

namespace rlg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? comma : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string provenance_line(std::uint64_t seed) {
  return "# " + std::string(kToolName) + " " + std::string(kToolVersion) + " seed=" + std::to_string(seed);
}

void write_csv(std::ostream& os, const CsvTable& table, std::uint64_t seed) {
  os << provenance_line(seed) << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw Error(ErrorCode::ShapeMismatch, "csv row width differs from header");
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const CsvTable& table, std::uint64_t seed) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  write_csv(f, table, seed);
  if (!f) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

CsvTable read_csv(std::istream& is, const std::string& source) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t);
    if (!have_header) {
      table.columns = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size())
      throw Error(ErrorCode::Parse, source + ":" + std::to_string(lineno) + ": expected " +
                                        std::to_string(table.columns.size()) + " fields, got " +
                                        std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        row.push_back(parse_double(f));
      } catch (const Error&) {
        throw Error(ErrorCode::Parse, source + ":" + std::to_string(lineno) + ": not a number: '" + f + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw Error(ErrorCode::EmptyInput, source + ": no data rows");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return read_csv(f, path);
}

CsvTable samples_table(const SampleBatch& batch) {
  CsvTable t;
  t.columns = batch.dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x", "y"};
  const std::size_t d = static_cast<std::size_t>(batch.dim);
  t.rows.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s)
    t.rows.emplace_back(batch.values.begin() + static_cast<std::ptrdiff_t>(s * d),
                        batch.values.begin() + static_cast<std::ptrdiff_t>((s + 1) * d));
  return t;
}

SampleBatch samples_from_table(const CsvTable& table) {
  if (table.columns.empty() || table.columns.size() > static_cast<std::size_t>(kMaxDim))
    throw Error(ErrorCode::Parse, "sample csv must have 1 or 2 columns");
  SampleBatch b;
  b.dim = static_cast<int>(table.columns.size());
  for (const auto& row : table.rows) b.values.insert(b.values.end(), row.begin(), row.end());
  return b;
}

CsvTable loss_table(const std::vector<LossRecord>& log) {
  CsvTable t{{"step", "loss"}, {}};
  for (const auto& r : log) t.rows.push_back({static_cast<double>(r.step), r.loss});
  return t;
}

CsvTable diagnostics_table(const std::vector<FinetuneRecord>& log) {
  CsvTable t{{"step", "mean_reward", "kl_estimate", "grad_norm", "loss"}, {}};
  for (const auto& r : log)
    t.rows.push_back({static_cast<double>(r.step), r.mean_reward, r.kl_estimate, r.grad_norm, r.loss});
  return t;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t{{"w", "beta_eff", "kl", "w1"}, {}};
  for (const auto& r : rows) t.rows.push_back({r.w, r.beta_eff, r.kl, r.w1});
  return t;
}

CsvTable histogram_table(const Histogram& hist) {
  CsvTable t{{"edge_lo", "edge_hi", "count"}, {}};
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
    t.rows.push_back({hist.edges[i], hist.edges[i + 1], static_cast<double>(hist.counts[i])});
  return t;
}

void write_metrics_csv(std::ostream& os, const std::vector<std::pair<std::string, double>>& metrics,
                       std::uint64_t seed) {
  os << provenance_line(seed) << '\n' << "metric,value\n";
  for (const auto& [name, value] : metrics) os << name << ',' << format_double(value) << '\n';
}

}  // namespace rlg
