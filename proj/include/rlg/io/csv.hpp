#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rlg/core/sample_batch.hpp"
#include "rlg/eval/metrics.hpp"
#include "rlg/guide/guidance.hpp"
#include "rlg/rl/config.hpp"
#include "rlg/train/flow_matching.hpp"

namespace rlg {

// "# rlg-lab <version> seed=<seed>"
std::string provenance_line(std::uint64_t seed);

// Numeric table with named columns. On disk: the provenance comment, a
// comma-separated column line, then one row per line. Lines starting with '#'
// are skipped on read.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const CsvTable& table, std::uint64_t seed);
void write_csv_file(const std::string& path, const CsvTable& table, std::uint64_t seed);
// Parse errors name the 1-based line number; a table without rows is EmptyInput.
CsvTable read_csv(std::istream& is, const std::string& source = "<stream>");
CsvTable read_csv_file(const std::string& path);

CsvTable samples_table(const SampleBatch& batch);
SampleBatch samples_from_table(const CsvTable& table);

CsvTable loss_table(const std::vector<LossRecord>& log);
CsvTable diagnostics_table(const std::vector<FinetuneRecord>& log);
CsvTable sweep_table(const std::vector<SweepRow>& rows);
// (edge_lo, edge_hi, count)
CsvTable histogram_table(const Histogram& hist);

// (metric, value) rows; the metric column holds names, so it is written
// as text rather than through CsvTable.
void write_metrics_csv(std::ostream& os, const std::vector<std::pair<std::string, double>>& metrics,
                       std::uint64_t seed);

}  // namespace rlg
