#include "rmbf/cli.hpp"

#include "rmbf/apa_parser.hpp"
#include "rmbf/bayes_factor.hpp"
#include "rmbf/errors.hpp"
#include "rmbf/report.hpp"
#include "rmbf/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "CLI11.hpp"

namespace rmbf::cli {
namespace {

using nlohmann::json;

struct BfArgs {
  double f = 0.0;
  long n = 0;
  long k = 0;
  double prior_h0 = 0.5;
  bool json = false;
};

struct BetweenArgs {
  double f = 0.0;
  long df1 = 0;
  long df2 = 0;
  long n_obs = 0;
  double prior_h0 = 0.5;
  bool json = false;
};

struct SsArgs {
  double sst = 0.0;
  double ssa = 0.0;
  double ssb = 0.0;
  long n = 0;
  long k = 0;
  double prior_h0 = 0.5;
  bool json = false;
};

struct AnovaArgs {
  std::string csv_path;
  double prior_h0 = 0.5;
  bool json = false;
  bool bf = false;
};

struct SimulateArgs {
  std::vector<long> n_values{20, 50, 80};
  std::vector<double> rho_values{0.2, 0.8};
  std::vector<double> delta_values{0.0, 0.2, 0.5};
  long k = 3;
  long reps = 1000;
  std::string seed = "1";
  std::string spacing = "uniform-interior";
  std::string out_dir;
  bool per_rep = false;
  unsigned threads = 0;
};

struct ParseArgs {
  std::string path;
  bool assume_rm = true;
  double prior_h0 = 0.5;
  bool json = false;
};

json evidence_report(const RunManifest& manifest, json inputs, const EvidenceResult& result,
                     const std::vector<std::string>& notes) {
  return json{{"schema_version", kReportSchemaVersion},
              {"manifest", to_json(manifest)},
              {"inputs", std::move(inputs)},
              {"result", to_json(result)},
              {"notes", notes}};
}

void emit_evidence(std::ostream& out, bool as_json, const RunManifest& manifest,
                   const json& inputs, const std::string& input_line,
                   const EvidenceResult& result, const std::vector<std::string>& notes) {
  if (as_json) {
    out << evidence_report(manifest, inputs, result, notes).dump(2) << '\n';
    return;
  }
  out << "Input        " << input_line << '\n' << render_evidence(result);
  for (const auto& note : notes) {
    out << "Note: " << note << '\n';
  }
}

int cmd_bf(const BfArgs& a, std::ostream& out) {
  const EvidenceResult r = bf01_minimal_rm(a.f, DesignSpec{a.n, a.k}, a.prior_h0);
  const json inputs{{"f", a.f}, {"n", a.n}, {"k", a.k}, {"prior_h0", a.prior_h0}};
  emit_evidence(out, a.json, make_manifest("bf", inputs), inputs,
                fmt::format("F = {}, n = {}, k = {}", a.f, a.n, a.k), r, {});
  return kOk;
}

int cmd_bf_between(const BetweenArgs& a, std::ostream& out) {
  const EvidenceResult r = bf01_between(a.f, a.df1, a.df2, a.n_obs, a.prior_h0);
  const json inputs{{"f", a.f},         {"df1", a.df1}, {"df2", a.df2},
                    {"n_obs", a.n_obs}, {"prior_h0", a.prior_h0}};
  emit_evidence(out, a.json, make_manifest("bf-between", inputs), inputs,
                fmt::format("F({}, {}) = {}, N = {}", a.df1, a.df2, a.f, a.n_obs), r, {});
  return kOk;
}

int cmd_bf_ss(const SsArgs& a, std::ostream& out) {
  const SummaryStats stats{a.ssa, a.ssb, a.sst, DesignSpec{a.n, a.k}};
  const EvidenceResult r = delta_bic_nathoo(stats, a.prior_h0);
  std::vector<std::string> notes;
  if (a.ssa == 0.0) {
    notes.emplace_back("SSA = 0: the treatment explains none of the variance");
  }
  const json inputs{{"sst", a.sst}, {"ssa", a.ssa}, {"ssb", a.ssb},
                    {"n", a.n},     {"k", a.k},     {"prior_h0", a.prior_h0}};
  emit_evidence(out, a.json, make_manifest("bf-ss", inputs), inputs,
                fmt::format("SST = {}, SSA = {}, SSB = {}, n = {}, k = {}", a.sst, a.ssa, a.ssb,
                            a.n, a.k),
                r, notes);
  return kOk;
}

int cmd_anova(const AnovaArgs& a, std::ostream& out) {
  const DataMatrix data = read_wide_csv_file(a.csv_path);
  const AnovaTable table = rm_anova(data);

  std::optional<EvidenceResult> minimal, nm;
  std::string nm_error;
  if (a.bf) {
    minimal = bf01_minimal_rm(table.f_stat, table.design, a.prior_h0);
    try {
      nm = delta_bic_nathoo(SummaryStats::from_table(table), a.prior_h0);
    } catch (const DomainError& e) {
      nm_error = e.what();
    }
  }

  const json params{{"csv_path", a.csv_path}, {"bf", a.bf}, {"prior_h0", a.prior_h0}};
  if (a.json) {
    json j{{"schema_version", kReportSchemaVersion},
           {"manifest", to_json(make_manifest("anova", params))},
           {"table", to_json(table)}};
    if (a.bf) {
      j["evidence"] = json{{"minimal_rm", to_json(*minimal)},
                           {"nathoo_masson", nm ? to_json(*nm) : json(nullptr)}};
      if (!nm) {
        j["evidence"]["nathoo_masson_error"] = nm_error;
      }
    }
    out << j.dump(2) << '\n';
    return kOk;
  }

  out << render_anova_table(table);
  if (a.bf) {
    out << '\n' << render_evidence(*minimal);
    if (nm) {
      out << '\n' << render_evidence(*nm);
    } else {
      out << "\nNathoo-Masson unavailable: " << nm_error << '\n';
    }
  }
  return kOk;
}

std::filesystem::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "simulation_out";
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  GridSpec spec;
  spec.n_values = a.n_values;
  spec.rho_values = a.rho_values;
  spec.delta_values = a.delta_values;
  spec.k = a.k;
  spec.reps = a.reps;
  spec.master_seed = parse_seed(a.seed);
  spec.spacing = parse_spacing(a.spacing);
  spec.validate();

  const std::filesystem::path dir = resolve_out_dir(a.out_dir);
  const json params{{"n", spec.n_values},         {"rho", spec.rho_values},
                    {"delta", spec.delta_values}, {"k", spec.k},
                    {"reps", spec.reps},          {"seed", spec.master_seed},
                    {"spacing", std::string(to_string(spec.spacing))},
                    {"per_rep", a.per_rep}};
  const RunManifest manifest = make_manifest("simulate", params, spec.master_seed);
  const GridReport report = run_grid(spec, RunOptions{a.threads});
  write_grid_outputs(report, manifest, dir, a.per_rep);

  out << render_grid_summary(report);
  out << fmt::format("\n{} cells x {} replications, seed {}; outputs in {}\n", report.cells.size(),
                     spec.reps, spec.master_seed, dir.string());
  return kOk;
}

std::string read_all(std::istream& in) {
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

int cmd_parse(const ParseArgs& a, std::ostream& out, std::istream& in) {
  std::string text;
  if (a.path.empty() || a.path == "-") {
    text = read_all(in);
    if (in.bad()) throw IoError("read error on standard input");
  } else {
    std::ifstream file(a.path, std::ios::binary);
    if (!file) throw IoError(fmt::format("cannot open {}", a.path));
    text = read_all(file);
    if (file.bad()) throw IoError(fmt::format("read error on {}", a.path));
  }
  // Validate the prior up front so content never decides the exit code.
  posterior_probs(1.0, a.prior_h0);

  struct Row {
    ReportedStat stat;
    std::optional<DesignSpec> design;
    std::optional<EvidenceResult> result;
    std::string reason;
  };
  std::vector<Row> rows;
  for (auto& stat : parse_reports(text)) {
    Row row{std::move(stat), std::nullopt, std::nullopt, {}};
    if (a.assume_rm) {
      try {
        row.design = infer_rm_design(row.stat);
        row.result = bf01_minimal_rm(row.stat.f_value, *row.design, a.prior_h0);
      } catch (const DesignInferenceError& e) {
        row.reason = e.what();
      }
    }
    rows.push_back(std::move(row));
  }

  if (a.json) {
    json reports = json::array();
    for (const auto& row : rows) {
      json j{{"stat", to_json(row.stat)},
             {"design", nullptr},
             {"result", nullptr},
             {"bf01_is_lower_bound", row.stat.f_upper_bound},
             {"error", row.reason.empty() ? json(nullptr) : json(row.reason)}};
      if (row.design) j["design"] = json{{"n", row.design->n}, {"k", row.design->k}};
      if (row.result) j["result"] = to_json(*row.result);
      reports.push_back(std::move(j));
    }
    const json params{{"path", a.path.empty() ? "-" : a.path},
                      {"assume_rm", a.assume_rm},
                      {"prior_h0", a.prior_h0}};
    out << json{{"schema_version", kReportSchemaVersion},
                {"manifest", to_json(make_manifest("parse", params))},
                {"reports", std::move(reports)}}
               .dump(2)
        << '\n';
    return kOk;
  }

  out << fmt::format("{:<32} {:>9} {:>6} {:>6} {:>5} {:>3} {:>10} {:>8}  {}\n", "Report", "F",
                     "df1", "df2", "n", "k", "BF01", "p(H0|y)", "Note");
  for (const auto& row : rows) {
    const auto& s = row.stat;
    std::string f = (s.f_upper_bound ? "<" : "") + format_number(s.f_value);
    std::string text_col = s.text.size() > 32 ? s.text.substr(0, 29) + "..." : s.text;
    std::replace(text_col.begin(), text_col.end(), '\n', ' ');
    if (row.result) {
      out << fmt::format("{:<32} {:>9} {:>6} {:>6} {:>5} {:>3} {:>10} {:>8}  {}\n", text_col, f,
                         s.df1, s.df2, row.design->n, row.design->k,
                         format_number(row.result->bf01), format_number(row.result->posterior_h0),
                         s.f_upper_bound ? "BF01 is a lower bound" : "");
    } else {
      out << fmt::format("{:<32} {:>9} {:>6} {:>6} {:>5} {:>3} {:>10} {:>8}  {}\n", text_col, f,
                         s.df1, s.df2, "-", "-", "-", "-",
                         a.assume_rm ? "uninferable: " + row.reason : "");
    }
  }
  return kOk;
}

} // namespace

std::uint64_t parse_seed(std::string_view text) {
  int base = 10;
  std::string_view digits = text;
  if (digits.starts_with("0x") || digits.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value, base);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw DomainError(fmt::format("invalid seed '{}': expected a 64-bit unsigned decimal or "
                                  "0x-prefixed hexadecimal integer",
                                  text));
  }
  return value;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        std::istream& in) {
  CLI::App app{"Bayes factors for repeated-measures ANOVA from summary statistics", "rmbf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", RMBF_VERSION);

  BfArgs bf;
  auto* bf_cmd = app.add_subcommand("bf", "BF01 from F, number of subjects n and conditions k");
  bf_cmd->add_option("--f", bf.f, "F statistic")->required();
  bf_cmd->add_option("--n", bf.n, "number of subjects")->required();
  bf_cmd->add_option("--k", bf.k, "number of repeated conditions")->required();
  bf_cmd->add_option("--prior-h0", bf.prior_h0, "prior probability of H0")->capture_default_str();
  bf_cmd->add_flag("--json", bf.json, "machine-readable output");

  BetweenArgs bw;
  auto* bw_cmd = app.add_subcommand("bf-between", "BF01 for a between-subjects F test");
  bw_cmd->add_option("--f", bw.f, "F statistic")->required();
  bw_cmd->add_option("--df1", bw.df1, "numerator degrees of freedom")->required();
  bw_cmd->add_option("--df2", bw.df2, "denominator degrees of freedom")->required();
  bw_cmd->add_option("--n-obs", bw.n_obs, "number of independent observations N")->required();
  bw_cmd->add_option("--prior-h0", bw.prior_h0, "prior probability of H0")->capture_default_str();
  bw_cmd->add_flag("--json", bw.json, "machine-readable output");

  SsArgs ss;
  auto* ss_cmd = app.add_subcommand("bf-ss", "Nathoo-Masson BF01 from sums of squares");
  ss_cmd->add_option("--sst", ss.sst, "total sum of squares")->required();
  ss_cmd->add_option("--ssa", ss.ssa, "treatment sum of squares")->required();
  ss_cmd->add_option("--ssb", ss.ssb, "subject sum of squares")->required();
  ss_cmd->add_option("--n", ss.n, "number of subjects")->required();
  ss_cmd->add_option("--k", ss.k, "number of repeated conditions")->required();
  ss_cmd->add_option("--prior-h0", ss.prior_h0, "prior probability of H0")->capture_default_str();
  ss_cmd->add_flag("--json", ss.json, "machine-readable output");

  AnovaArgs an;
  auto* an_cmd = app.add_subcommand("anova", "repeated-measures ANOVA from a wide CSV file");
  an_cmd->add_option("csv", an.csv_path, "CSV with a header row and one row per subject")
      ->required();
  an_cmd->add_flag("--bf", an.bf, "append minimal-BIC and Nathoo-Masson Bayes factors");
  an_cmd->add_option("--prior-h0", an.prior_h0, "prior probability of H0")->capture_default_str();
  an_cmd->add_flag("--json", an.json, "machine-readable output");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo comparison of both methods");
  sim_cmd->add_option("--n", sim.n_values, "subject counts")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--rho", sim.rho_values, "intraclass correlations")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--delta", sim.delta_values, "effect sizes")
      ->delimiter(',')
      ->capture_default_str();
  sim_cmd->add_option("--k", sim.k, "conditions per subject")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "replications per cell")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "master seed (decimal or 0x-hex)")
      ->capture_default_str();
  sim_cmd->add_option("--spacing", sim.spacing,
                      "interior condition means: uniform-interior (redrawn per dataset) or equal")
      ->check(CLI::IsMember({"equal", "uniform-interior"}))
      ->capture_default_str();
  sim_cmd->add_option("--out-dir", sim.out_dir,
                      fmt::format("output directory (default: ${} or ./simulation_out)",
                                  kOutDirEnv));
  sim_cmd->add_flag("--per-rep", sim.per_rep, "also write per_rep.csv");
  sim_cmd->add_option("--threads", sim.threads, "worker threads (0: all cores)")
      ->capture_default_str();

  ParseArgs pa;
  auto* pa_cmd = app.add_subcommand("parse", "Bayes factors for F statistics reported in text");
  pa_cmd->add_option("text", pa.path, "text file (default or '-': standard input)");
  pa_cmd->add_flag("--assume-rm,!--no-assume-rm", pa.assume_rm,
                   "infer a one-factor repeated-measures design from the dfs (default on)");
  pa_cmd->add_option("--prior-h0", pa.prior_h0, "prior probability of H0")->capture_default_str();
  pa_cmd->add_flag("--json", pa.json, "machine-readable output");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*bf_cmd) return cmd_bf(bf, out);
    if (*bw_cmd) return cmd_bf_between(bw, out);
    if (*ss_cmd) return cmd_bf_ss(ss, out);
    if (*an_cmd) return cmd_anova(an, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*pa_cmd) return cmd_parse(pa, out, in);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

} // namespace rmbf::cli
