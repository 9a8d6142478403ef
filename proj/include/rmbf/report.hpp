#pragma once

#include "rmbf/anova.hpp"
#include "rmbf/apa_parser.hpp"
#include "rmbf/bayes_factor.hpp"
#include "rmbf/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace rmbf {

inline constexpr int kReportSchemaVersion = 1;

// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed CSV content (ragged rows, non-numeric cells, missing header).
class CsvFormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Embedded in every JSON report. Re-running `subcommand` with `parameters`
// reproduces the report up to `timestamp`.
struct RunManifest {
  std::string subcommand;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<std::uint64_t> master_seed;
  std::string version = RMBF_VERSION;
  std::string timestamp;
};

RunManifest make_manifest(std::string subcommand, nlohmann::json parameters,
                          std::optional<std::uint64_t> master_seed = std::nullopt);

nlohmann::json to_json(const RunManifest& manifest);
nlohmann::json to_json(const EvidenceResult& result);
nlohmann::json to_json(const AnovaTable& table);
nlohmann::json to_json(const ReportedStat& stat);
nlohmann::json to_json(const FiveNumberSummary& summary);
nlohmann::json to_json(const CellResult& cell); // aggregates only
nlohmann::json to_json(const GridReport& report, const RunManifest& manifest);

// Wide CSV: a header row, then one row per subject with one numeric column
// per condition. Blank lines are ignored.
DataMatrix read_wide_csv(std::istream& in);
DataMatrix read_wide_csv_file(const std::filesystem::path& path);
void write_wide_csv(std::ostream& out, const DataMatrix& data);

// Fixed 3 decimals by default; scientific outside [1e-3, 1e7).
std::string format_number(double x, int decimals = 3);

std::string render_anova_table(const AnovaTable& table, int decimals = 3);
std::string render_evidence(const EvidenceResult& result, int decimals = 3);

std::string table2_csv(const GridReport& report); // accuracy
std::string table3_csv(const GridReport& report); // consistency
std::string table4_csv(const GridReport& report); // posterior correlation
std::string boxplot_csv(const GridReport& report);
std::string scatter_csv(const GridReport& report);
std::string per_rep_csv(const GridReport& report);

// Plain-text tables for the terminal.
std::string render_grid_summary(const GridReport& report);

// Writes grid_report.json, table2.csv, table3.csv, table4.csv,
// boxplot_data.csv, scatter_data.csv and, if requested, per_rep.csv.
// Throws IoError.
void write_grid_outputs(const GridReport& report, const RunManifest& manifest,
                        const std::filesystem::path& dir, bool per_rep);

} // namespace rmbf
