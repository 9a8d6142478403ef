#include "rmbf/report.hpp"

#include "rmbf/errors.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include <fmt/chrono.h>
#include <fmt/core.h>

namespace rmbf {
namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string cell_id(const SimulationConfig& c) {
  return fmt::format("n{}_k{}_rho{}_delta{}", c.n, c.k, c.rho, c.delta);
}

std::string cell_prefix(const SimulationConfig& c) {
  return fmt::format("{},{},{},{}", c.n, c.k, c.rho, c.delta);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot open {} for writing", path.string()));
  }
  out << content;
  out.flush();
  if (!out) {
    throw IoError(fmt::format("failed writing {}", path.string()));
  }
}

} // namespace

RunManifest make_manifest(std::string subcommand, nlohmann::json parameters,
                          std::optional<std::uint64_t> master_seed) {
  RunManifest m;
  m.subcommand = std::move(subcommand);
  m.parameters = std::move(parameters);
  m.master_seed = master_seed;
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  m.timestamp = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
  return m;
}

json to_json(const RunManifest& m) {
  json j{{"tool", "rmbf"},
         {"version", m.version},
         {"subcommand", m.subcommand},
         {"parameters", m.parameters},
         {"timestamp", m.timestamp}};
  if (m.master_seed) {
    j["master_seed"] = *m.master_seed;
  }
  return j;
}

json to_json(const EvidenceResult& r) {
  return json{{"method", std::string(to_string(r.method))},
              {"log_bf01", r.log_bf01},
              {"bf01", r.bf01},
              {"bf10", r.bf10},
              {"delta_bic10", r.delta_bic10},
              {"prior_h0", r.prior_h0},
              {"posterior_h0", r.posterior_h0},
              {"posterior_h1", r.posterior_h1},
              {"saturated", r.saturated},
              {"choice", std::string(to_string(choose_model(r)))}};
}

json to_json(const AnovaTable& t) {
  return json{{"n", t.design.n},
              {"k", t.design.k},
              {"ss_treatment", t.ss_treatment},
              {"ss_subjects", t.ss_subjects},
              {"ss_residual", t.ss_residual},
              {"ss_total", t.ss_total},
              {"df_treatment", t.df_treatment},
              {"df_subjects", t.df_subjects},
              {"df_residual", t.df_residual},
              {"ms_treatment", t.ms_treatment},
              {"ms_subjects", t.ms_subjects},
              {"ms_residual", t.ms_residual},
              {"f_stat", t.f_stat},
              {"p_value", t.p_value}};
}

json to_json(const ReportedStat& s) {
  json j{{"text", s.text},
         {"begin", s.begin},
         {"end", s.end},
         {"f_value", s.f_value},
         {"f_upper_bound", s.f_upper_bound},
         {"df1", s.df1},
         {"df2", s.df2},
         {"p_reported", nullptr},
         {"p_upper_bound", s.p_upper_bound}};
  if (s.p_reported) {
    j["p_reported"] = *s.p_reported;
  }
  return j;
}

json to_json(const FiveNumberSummary& s) {
  return json{{"min", s.min},
              {"lower_hinge", s.lower_hinge},
              {"median", s.median},
              {"upper_hinge", s.upper_hinge},
              {"max", s.max}};
}

json to_json(const CellResult& c) {
  json j{{"id", cell_id(c.config)},
         {"n", c.config.n},
         {"k", c.config.k},
         {"rho", c.config.rho},
         {"delta", c.config.delta},
         {"reps", c.config.reps},
         {"accuracy_min", c.accuracy_min},
         {"accuracy_nm", c.accuracy_nm},
         {"consistency", c.consistency},
         {"posterior_correlation", nullptr},
         {"posterior_quantiles_min", to_json(c.posterior_quantiles_min)},
         {"posterior_quantiles_nm", to_json(c.posterior_quantiles_nm)},
         {"median_posterior_difference", c.median_posterior_difference}};
  if (c.posterior_correlation) {
    j["posterior_correlation"] = *c.posterior_correlation;
  }
  return j;
}

json to_json(const GridReport& report, const RunManifest& manifest) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back(to_json(c));
  }
  const GridSpec& g = report.spec;
  return json{{"schema_version", kReportSchemaVersion},
              {"manifest", to_json(manifest)},
              {"grid",
               {{"n_values", g.n_values},
                {"rho_values", g.rho_values},
                {"delta_values", g.delta_values},
                {"k", g.k},
                {"reps", g.reps},
                {"master_seed", g.master_seed},
                {"grand_mean", g.grand_mean},
                {"spacing", std::string(to_string(g.spacing))}}},
              {"cells", std::move(cells)}};
}

DataMatrix read_wide_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> columns;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) {
      view.remove_prefix(3);
    }
    if (trim(view).empty()) continue;
    const auto cells = split_commas(view);
    if (!columns) {
      columns = cells.size(); // header
      continue;
    }
    if (cells.size() != *columns) {
      throw CsvFormatError(fmt::format("line {}: expected {} columns, found {}", line_no,
                                       *columns, cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto value = parse_double(cells[j]);
      if (!value) {
        throw CsvFormatError(fmt::format("line {}, column {}: '{}' is not a finite number",
                                         line_no, j + 1, cells[j]));
      }
      row.push_back(*value);
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) {
    throw IoError("read error on CSV input");
  }
  if (!columns) {
    throw CsvFormatError("CSV input is empty (a header row is required)");
  }
  if (rows.size() < 2 || *columns < 2) {
    throw DimensionError(fmt::format(
        "need at least 2 subjects (rows) and 2 conditions (columns), got {} x {}", rows.size(),
        *columns));
  }
  return DataMatrix::from_rows(rows);
}

DataMatrix read_wide_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(fmt::format("cannot open {}", path.string()));
  }
  return read_wide_csv(in);
}

void write_wide_csv(std::ostream& out, const DataMatrix& data) {
  for (std::size_t j = 0; j < data.conditions(); ++j) {
    out << (j ? "," : "") << "c" << (j + 1);
  }
  out << '\n';
  for (std::size_t i = 0; i < data.subjects(); ++i) {
    for (std::size_t j = 0; j < data.conditions(); ++j) {
      out << (j ? "," : "") << fmt::format("{}", data(i, j));
    }
    out << '\n';
  }
}

std::string format_number(double x, int decimals) {
  const double a = std::abs(x);
  if (x == 0.0 || (a >= 1e-3 && a < 1e7) || !std::isfinite(x)) {
    return fmt::format("{:.{}f}", x, decimals);
  }
  return fmt::format("{:.{}e}", x, decimals);
}

std::string render_anova_table(const AnovaTable& t, int decimals) {
  auto num = [&](double x) { return format_number(x, decimals); };
  std::string s;
  s += fmt::format("{:<10} {:>14} {:>6} {:>14} {:>10} {:>8}\n", "Source", "SS", "df", "MS", "F",
                   "p");
  s += fmt::format("{:<10} {:>14} {:>6} {:>14}\n", "Subjects", num(t.ss_subjects), t.df_subjects,
                   num(t.ms_subjects));
  s += fmt::format("{:<10} {:>14} {:>6} {:>14} {:>10} {:>8}\n", "Treatment", num(t.ss_treatment),
                   t.df_treatment, num(t.ms_treatment), num(t.f_stat), num(t.p_value));
  s += fmt::format("{:<10} {:>14} {:>6} {:>14}\n", "Residual", num(t.ss_residual), t.df_residual,
                   num(t.ms_residual));
  s += fmt::format("{:<10} {:>14} {:>6}\n", "Total", num(t.ss_total),
                   t.df_treatment + t.df_subjects + t.df_residual);
  return s;
}

std::string render_evidence(const EvidenceResult& r, int decimals) {
  auto num = [&](double x) { return format_number(x, decimals); };
  std::string_view label = "minimal BIC (repeated measures)";
  if (r.method == Method::between_subjects) label = "BIC (between subjects)";
  if (r.method == Method::nathoo_masson) label = "Nathoo-Masson (sums of squares)";
  std::string s = fmt::format("Method       {}\n", label);
  s += fmt::format("dBIC10       {}\n", num(r.delta_bic10));
  s += fmt::format("BF01         {}{}\n", num(r.bf01), r.saturated ? " (saturated)" : "");
  s += fmt::format("BF10         {}{}\n", num(r.bf10), r.saturated ? " (saturated)" : "");
  s += fmt::format("prior p(H0)  {}\n", num(r.prior_h0));
  s += fmt::format("p(H0|y)      {}\n", num(r.posterior_h0));
  s += fmt::format("p(H1|y)      {}\n", num(r.posterior_h1));
  s += fmt::format("Favors       {}\n", to_string(choose_model(r)));
  return s;
}

std::string table2_csv(const GridReport& report) {
  std::string s = "n,k,rho,delta,accuracy_min,accuracy_nm\n";
  for (const auto& c : report.cells) {
    s += fmt::format("{},{},{}\n", cell_prefix(c.config), c.accuracy_min, c.accuracy_nm);
  }
  return s;
}

std::string table3_csv(const GridReport& report) {
  std::string s = "n,k,rho,delta,consistency\n";
  for (const auto& c : report.cells) {
    s += fmt::format("{},{}\n", cell_prefix(c.config), c.consistency);
  }
  return s;
}

std::string table4_csv(const GridReport& report) {
  std::string s = "n,k,rho,delta,correlation\n";
  for (const auto& c : report.cells) {
    s += fmt::format("{},{}\n", cell_prefix(c.config),
                     c.posterior_correlation ? fmt::format("{}", *c.posterior_correlation) : "");
  }
  return s;
}

std::string boxplot_csv(const GridReport& report) {
  std::string s = "n,k,rho,delta,method,min,lower_hinge,median,upper_hinge,max\n";
  for (const auto& c : report.cells) {
    for (const auto& [method, q] : {std::pair{"minimal_rm", c.posterior_quantiles_min},
                                    std::pair{"nathoo_masson", c.posterior_quantiles_nm}}) {
      s += fmt::format("{},{},{},{},{},{},{}\n", cell_prefix(c.config), method, q.min,
                       q.lower_hinge, q.median, q.upper_hinge, q.max);
    }
  }
  return s;
}

std::string scatter_csv(const GridReport& report) {
  std::string s = "n,k,rho,delta,rep,post_min,post_nm\n";
  for (const auto& c : report.cells) {
    const std::string prefix = cell_prefix(c.config);
    for (const auto& r : c.per_rep_records) {
      s += fmt::format("{},{},{},{}\n", prefix, r.rep, r.posterior_min, r.posterior_nm);
    }
  }
  return s;
}

std::string per_rep_csv(const GridReport& report) {
  std::string s = "cell_id,rep,F,bf01_min,bf01_nm,post_min,post_nm,choice_min,choice_nm\n";
  for (const auto& c : report.cells) {
    const std::string id = cell_id(c.config);
    for (const auto& r : c.per_rep_records) {
      s += fmt::format("{},{},{},{},{},{},{},{},{}\n", id, r.rep, r.f_stat, r.bf01_min, r.bf01_nm,
                       r.posterior_min, r.posterior_nm, to_string(r.choice_min),
                       to_string(r.choice_nm));
    }
  }
  return s;
}

std::string render_grid_summary(const GridReport& report) {
  std::string s;
  s += fmt::format("{:>6} {:>6} {:>6} {:>9} {:>9} {:>11} {:>11} {:>12}\n", "delta", "n", "rho",
                   "acc(min)", "acc(NM)", "consistency", "correlation", "med(dpost)");
  for (const auto& c : report.cells) {
    s += fmt::format("{:>6} {:>6} {:>6} {:>9.3f} {:>9.3f} {:>11.3f} {:>11} {:>12.4f}\n",
                     c.config.delta, c.config.n, c.config.rho, c.accuracy_min, c.accuracy_nm,
                     c.consistency,
                     c.posterior_correlation ? fmt::format("{:.3f}", *c.posterior_correlation)
                                             : std::string("NA"),
                     c.median_posterior_difference);
  }
  return s;
}

void write_grid_outputs(const GridReport& report, const RunManifest& manifest,
                        const std::filesystem::path& dir, bool per_rep) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError(fmt::format("cannot create output directory {}: {}", dir.string(),
                              ec.message()));
  }
  write_file(dir / "grid_report.json", to_json(report, manifest).dump(2) + "\n");
  write_file(dir / "table2.csv", table2_csv(report));
  write_file(dir / "table3.csv", table3_csv(report));
  write_file(dir / "table4.csv", table4_csv(report));
  write_file(dir / "boxplot_data.csv", boxplot_csv(report));
  write_file(dir / "scatter_data.csv", scatter_csv(report));
  if (per_rep) {
    write_file(dir / "per_rep.csv", per_rep_csv(report));
  }
}

} // namespace rmbf
