#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "rankinfer/cli.hpp"
#include "rankinfer/errors.hpp"
#include "rankinfer/multinomcs.hpp"
#include "rankinfer/rankcs.hpp"
#include "rankinfer/rankreg.hpp"
#include "rankinfer/ranking.hpp"
#include "rankinfer/table.hpp"

namespace rankinfer::cli {

namespace {

using nlohmann::json;

struct CommonOptions {
  std::string input = "-";
  std::string output;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  double coverage = 0.95;
};

struct EstimateOptions {
  std::string estimates;
  std::string se;
  std::string cov;
  std::string labels;
  std::size_t draws = 1000;
};

// What a command produced: the envelope plus its CSV rendering and an
// optional chart.
struct CommandResult {
  OutputEnvelope envelope;
  std::string csv;
  std::string svg_path;
  std::string svg;
};

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path == "-") {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return read_text_file(path);
}

std::uint64_t resolve_seed(const CommonOptions& common) {
  if (common.seed) return *common.seed;
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

void add_common(CLI::App* app, CommonOptions& common, bool randomized, bool with_coverage) {
  app->add_option("--input", common.input, "Input CSV path, '-' for stdin")->capture_default_str();
  app->add_option("--output", common.output, "Output path (default: stdout)");
  app->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app->add_option("--seed", common.seed,
                  randomized ? "Bootstrap seed (default: drawn from OS entropy)"
                             : "Accepted for uniformity; this procedure is not randomized");
  if (with_coverage) {
    app->add_option("--coverage", common.coverage, "Nominal coverage")->capture_default_str();
  }
}

void add_estimate_options(CLI::App* app, EstimateOptions& opts) {
  app->add_option("--estimates", opts.estimates, "Column with point estimates")->required();
  auto* se = app->add_option("--se", opts.se, "Column with standard errors (independent estimates)");
  auto* cov = app->add_option("--cov", opts.cov, "CSV file with the full covariance matrix");
  se->excludes(cov);
  app->add_option("--labels", opts.labels, "Column with population names");
  app->add_option("--draws", opts.draws, "Number of bootstrap draws")->capture_default_str();
}

std::vector<std::string> labels_from(const TableData& table, const std::string& column) {
  if (column.empty()) return {};
  return table.text(column);
}

EstimatesWithCovariance load_estimates(const TableData& table, const EstimateOptions& opts,
                                       std::string& cov_text) {
  std::vector<double> theta = table.numeric(opts.estimates);
  std::vector<std::string> labels = labels_from(table, opts.labels);
  if (opts.se.empty() == opts.cov.empty()) {
    throw InvalidArgument("exactly one of --se and --cov is required");
  }
  if (!opts.se.empty()) {
    return EstimatesWithCovariance::from_standard_errors(std::move(theta), table.numeric(opts.se),
                                                         std::move(labels));
  }
  cov_text = read_text_file(opts.cov);
  const TableData cov = TableData::parse_csv(std::string_view(cov_text));
  const std::size_t p = theta.size();
  if (cov.cols() != p || cov.rows() != p) {
    throw InvalidArgument("covariance file must hold a " + std::to_string(p) + "x" +
                          std::to_string(p) + " matrix below a header row");
  }
  EstimatesWithCovariance est;
  est.theta_hat = std::move(theta);
  est.labels = std::move(labels);
  est.sigma_hat.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t c = 0; c < p; ++c) {
    const std::vector<double> column = cov.numeric(cov.names()[c]);
    for (std::size_t r = 0; r < p; ++r) {
      est.sigma_hat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = column[r];
    }
  }
  return est;
}

std::vector<std::size_t> zero_based(const std::vector<std::size_t>& one_based, std::size_t p) {
  std::vector<std::size_t> out;
  for (std::size_t i : one_based) {
    if (i < 1 || i > p) {
      throw InvalidArgument("index " + std::to_string(i) + " is outside 1.." + std::to_string(p));
    }
    out.push_back(i - 1);
  }
  return out;
}

const char* mode_name(CsMode mode) {
  return mode == CsMode::marginal ? "marginal" : "simultaneous";
}

json confidence_set_json(const RankConfidenceSet& cs, const std::vector<std::string>& labels) {
  json r;
  r["mode"] = mode_name(cs.mode);
  r["sidedness"] = cs.sidedness == Sidedness::two_sided ? "two-sided" : "lower-bounds-only";
  r["p"] = cs.p;
  json index = json::array(), label = json::array();
  for (std::size_t j : cs.populations) {
    index.push_back(j + 1);
    label.push_back(j < labels.size() ? json(labels[j]) : json(nullptr));
  }
  r["index"] = index;
  r["labels"] = label;
  r["L"] = cs.lower;
  r["rank"] = cs.rank;
  r["U"] = cs.upper;
  return r;
}

std::string confidence_set_csv(const RankConfidenceSet& cs, const std::vector<std::string>& labels) {
  std::string csv = "index,label,L,rank,U\n";
  for (std::size_t i = 0; i < cs.populations.size(); ++i) {
    const std::size_t j = cs.populations[i];
    csv += std::to_string(j + 1) + "," + (j < labels.size() ? labels[j] : "") + "," +
           std::to_string(cs.lower[i]) + "," + format_number(cs.rank[i]) + "," +
           std::to_string(cs.upper[i]) + "\n";
  }
  return csv;
}

// ---------------------------------------------------------------------------

struct RanksOptions {
  std::string column;
  std::string against;
  std::string labels;
  double omega = 0.0;
  bool increasing = false;
  bool decreasing = false;
};

CommandResult cmd_ranks(const CommonOptions& common, const RanksOptions& opts, std::istream& in) {
  const std::string text = read_input(common.input, in);
  const TableData table = TableData::parse_csv(std::string_view(text));
  const TieRule rule(opts.omega, opts.increasing ? Direction::increasing : Direction::decreasing);
  const std::vector<double> x = table.numeric(opts.column);
  const std::vector<std::string> labels = labels_from(table, opts.labels);

  RankVector ir, fr;
  if (opts.against.empty()) {
    ir = irank(x, rule);
    fr = frank(x, rule);
  } else {
    const std::vector<double> reference = table.numeric(opts.against);
    ir = irank_against(x, reference, rule);
    fr = frank_against(x, reference, rule);
  }

  CommandResult res;
  res.envelope.procedure = "ranks";
  res.envelope.input_digest = fnv1a_hex(text);
  json r;
  r["column"] = opts.column;
  r["against"] = opts.against.empty() ? json(nullptr) : json(opts.against);
  r["omega"] = opts.omega;
  r["direction"] = opts.increasing ? "increasing" : "decreasing";
  r["labels"] = labels.empty() ? json(nullptr) : json(labels);
  r["irank"] = ir.values;
  r["frank"] = fr.values;
  res.envelope.results = r;

  res.csv = labels.empty() ? "value,irank,frank\n" : "label,value,irank,frank\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!labels.empty()) res.csv += labels[i] + ",";
    res.csv += format_number(x[i]) + "," + format_number(ir[i]) + "," + format_number(fr[i]) + "\n";
  }
  return res;
}

struct CsRanksOptions {
  EstimateOptions est;
  bool simul = false;
  std::vector<std::size_t> indices;
  std::string svg;
};

CommandResult cmd_csranks(const CommonOptions& common, const CsRanksOptions& opts,
                          std::istream& in) {
  const std::string text = read_input(common.input, in);
  const TableData table = TableData::parse_csv(std::string_view(text));
  std::string cov_text;
  const EstimatesWithCovariance est = load_estimates(table, opts.est, cov_text);
  const BootstrapConfig cfg{opts.est.draws, common.coverage, resolve_seed(common)};
  const CsMode mode = opts.simul ? CsMode::simultaneous : CsMode::marginal;
  std::optional<std::vector<std::size_t>> indices;
  if (!opts.indices.empty()) indices = zero_based(opts.indices, est.size());

  const RankConfidenceSet cs = cs_ranks(est, cfg, mode, indices);

  CommandResult res;
  res.envelope.procedure = "cs-ranks";
  res.envelope.input_digest = fnv1a_hex(text + '\0' + cov_text);
  res.envelope.seed = cfg.seed;
  res.envelope.coverage = cfg.coverage;
  res.envelope.results = confidence_set_json(cs, est.labels);
  res.envelope.results["draws"] = cfg.draws;
  res.csv = confidence_set_csv(cs, est.labels);
  if (!opts.svg.empty()) {
    res.svg_path = opts.svg;
    res.svg = render_interval_chart(
        cs, est.labels,
        std::string(opts.simul ? "Simultaneous" : "Marginal") + " confidence sets for ranks (" +
            format_number(100.0 * cfg.coverage) + "%)");
  }
  return res;
}

struct TauOptions {
  EstimateOptions est;
  std::size_t tau = 1;
};

CommandResult cmd_tau(const CommonOptions& common, const TauOptions& opts, std::istream& in,
                      bool worst) {
  const std::string text = read_input(common.input, in);
  const TableData table = TableData::parse_csv(std::string_view(text));
  std::string cov_text;
  const EstimatesWithCovariance est = load_estimates(table, opts.est, cov_text);
  const BootstrapConfig cfg{opts.est.draws, common.coverage, resolve_seed(common)};
  const TauBestSet set = worst ? cs_tau_worst(est, cfg, opts.tau) : cs_tau_best(est, cfg, opts.tau);

  CommandResult res;
  res.envelope.procedure = worst ? "cs-tauworst" : "cs-taubest";
  res.envelope.input_digest = fnv1a_hex(text + '\0' + cov_text);
  res.envelope.seed = cfg.seed;
  res.envelope.coverage = cfg.coverage;
  json members = json::array(), member_labels = json::array();
  for (std::size_t j : set.members) {
    members.push_back(j + 1);
    member_labels.push_back(j < est.labels.size() ? json(est.labels[j]) : json(nullptr));
  }
  res.envelope.results = {{"tau", set.tau},
                          {"p", est.size()},
                          {"draws", cfg.draws},
                          {"members", members},
                          {"member_labels", member_labels}};
  res.csv = "index,label,member\n";
  std::vector<char> in_set(est.size(), 0);
  for (std::size_t j : set.members) in_set[j] = 1;
  for (std::size_t j = 0; j < est.size(); ++j) {
    res.csv += std::to_string(j + 1) + "," + (j < est.labels.size() ? est.labels[j] : "") + "," +
               (in_set[j] ? "1" : "0") + "\n";
  }
  return res;
}

struct MultinomOptions {
  std::string counts;
  std::string labels;
  bool simul = false;
  std::string multcorr = "holm";
  std::vector<std::size_t> indices;
  std::string svg;
};

CommandResult cmd_multinom(const CommonOptions& common, const MultinomOptions& opts,
                           std::istream& in) {
  const std::string text = read_input(common.input, in);
  const TableData table = TableData::parse_csv(std::string_view(text));
  MultinomialCounts data;
  for (double c : table.numeric(opts.counts)) {
    if (!(c >= 0.0) || c != std::floor(c) || c > 9.0e15) {
      throw InvalidArgument("counts must be nonnegative integers, got " + format_number(c));
    }
    data.counts.push_back(static_cast<std::uint64_t>(c));
  }
  data.labels = labels_from(table, opts.labels);
  const Correction method = opts.multcorr == "holm" ? Correction::holm : Correction::bonferroni;
  const CsMode mode = opts.simul ? CsMode::simultaneous : CsMode::marginal;
  std::optional<std::vector<std::size_t>> indices;
  if (!opts.indices.empty()) indices = zero_based(opts.indices, data.counts.size());

  const RankConfidenceSet cs = cs_ranks_multinomial(data, common.coverage, mode, method, indices);

  CommandResult res;
  res.envelope.procedure = "cs-multinom";
  res.envelope.input_digest = fnv1a_hex(text);
  res.envelope.coverage = common.coverage;
  res.envelope.results = confidence_set_json(cs, data.labels);
  res.envelope.results["multcorr"] = opts.multcorr;
  res.csv = confidence_set_csv(cs, data.labels);
  if (!opts.svg.empty()) {
    res.svg_path = opts.svg;
    res.svg = render_interval_chart(cs, data.labels,
                                    std::string(opts.simul ? "Simultaneous" : "Marginal") +
                                        " confidence sets for ranks (multinomial)");
  }
  return res;
}

struct RankRegOptions {
  std::string formula;
  double omega = 1.0;
};

CommandResult cmd_rankreg(const CommonOptions& common, const RankRegOptions& opts,
                          std::istream& in) {
  RankRegressionModel model = parse_formula(opts.formula);
  model.omega = opts.omega;
  model.validate();
  const std::string text = read_input(common.input, in);
  const TableData table = TableData::parse_csv(std::string_view(text));
  const RankRegressionFit f = fit(model, table);
  const CorrectedCovariance cov = corrected_vcov(f);
  const auto rows = summarize(f, cov);
  const auto intervals = confint(f, cov, common.coverage);

  CommandResult res;
  res.envelope.procedure = "rank-reg";
  res.envelope.input_digest = fnv1a_hex(text);
  res.envelope.coverage = common.coverage;
  res.envelope.warnings.push_back(kDegreesOfFreedomWarning);
  for (const auto& w : f.warnings()) res.envelope.warnings.push_back(w);

  auto number = [](double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); };
  json coefficients = json::array();
  for (const auto& row : rows) {
    coefficients.push_back({{"name", row.name},
                            {"estimate", row.estimate},
                            {"std_error", row.std_error},
                            {"z_value", number(row.z_value)},
                            {"p_value", row.p_value},
                            {"signif", row.signif}});
  }
  json ci = json::array();
  for (const auto& iv : intervals) {
    ci.push_back({{"name", iv.name}, {"lower", iv.lower}, {"upper", iv.upper}});
  }
  json vcov = json::array();
  for (Eigen::Index j = 0; j < cov.vcov.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index k = 0; k < cov.vcov.cols(); ++k) row.push_back(cov.vcov(j, k));
    vcov.push_back(row);
  }
  res.envelope.results = {{"formula", model.formula()},
                          {"omega", model.omega},
                          {"n", f.n()},
                          {"coefficients", coefficients},
                          {"vcov", vcov},
                          {"confint", ci}};

  res.csv = "term,estimate,std_error,z_value,p_value,lower,upper\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    res.csv += rows[i].name + "," + format_number(rows[i].estimate) + "," +
               format_number(rows[i].std_error) + "," + format_number(rows[i].z_value) + "," +
               format_number(rows[i].p_value) + "," + format_number(intervals[i].lower) + "," +
               format_number(intervals[i].upper) + "\n";
  }
  return res;
}

void emit(const CommonOptions& common, const CommandResult& res, std::ostream& out) {
  const std::string body = common.format == "csv" ? res.csv : res.envelope.serialize();
  if (common.output.empty() || common.output == "-") {
    out << body;
  } else {
    write_atomically(common.output, body);
  }
  if (!res.svg_path.empty()) write_atomically(res.svg_path, res.svg);
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Confidence sets for ranks and inference in regressions with ranked variables",
               "rankinfer"};
  app.require_subcommand(1);

  CommonOptions common;

  RanksOptions ranks_opts;
  auto* ranks = app.add_subcommand("ranks", "Integer and fractional ranks of a column");
  add_common(ranks, common, false, false);
  ranks->add_option("--column", ranks_opts.column, "Column to rank")->required();
  ranks->add_option("--against", ranks_opts.against, "Reference column for the counts");
  ranks->add_option("--labels", ranks_opts.labels, "Column with row names");
  ranks->add_option("--omega", ranks_opts.omega, "Tie parameter in [0, 1]")->capture_default_str();
  auto* inc = ranks->add_flag("--increasing", ranks_opts.increasing, "Largest value gets rank p");
  auto* dec = ranks->add_flag("--decreasing", ranks_opts.decreasing, "Largest value gets rank 1 (default)");
  inc->excludes(dec);

  CsRanksOptions cs_opts;
  auto* csr = app.add_subcommand("cs-ranks", "Marginal or simultaneous confidence sets for ranks");
  add_common(csr, common, true, true);
  add_estimate_options(csr, cs_opts.est);
  csr->add_flag("--simul", cs_opts.simul, "Simultaneous instead of marginal sets");
  csr->add_option("--indices", cs_opts.indices, "1-based populations (marginal mode)")
      ->delimiter(',');
  csr->add_option("--svg", cs_opts.svg, "Write an interval chart to this path");

  TauOptions best_opts;
  auto* best = app.add_subcommand("cs-taubest", "Confidence set for the tau-best populations");
  add_common(best, common, true, true);
  add_estimate_options(best, best_opts.est);
  best->add_option("--tau", best_opts.tau, "tau")->required();

  TauOptions worst_opts;
  auto* worst = app.add_subcommand("cs-tauworst", "Confidence set for the tau-worst populations");
  add_common(worst, common, true, true);
  add_estimate_options(worst, worst_opts.est);
  worst->add_option("--tau", worst_opts.tau, "tau")->required();

  MultinomOptions mn_opts;
  auto* mn = app.add_subcommand("cs-multinom", "Finite-sample confidence sets for multinomial ranks");
  add_common(mn, common, false, true);
  mn->add_option("--counts", mn_opts.counts, "Column with category counts")->required();
  mn->add_option("--labels", mn_opts.labels, "Column with category names");
  mn->add_flag("--simul", mn_opts.simul, "Simultaneous instead of marginal sets");
  mn->add_option("--multcorr", mn_opts.multcorr, "Multiplicity correction")
      ->check(CLI::IsMember({"holm", "bonferroni"}))
      ->capture_default_str();
  mn->add_option("--indices", mn_opts.indices, "1-based categories (marginal mode)")
      ->delimiter(',');
  mn->add_option("--svg", mn_opts.svg, "Write an interval chart to this path");

  RankRegOptions reg_opts;
  auto* reg = app.add_subcommand("rank-reg", "Regression with ranked variables");
  add_common(reg, common, false, true);
  reg->add_option("--formula", reg_opts.formula, "Model, e.g. 'r(Y) ~ r(X) + W'")->required();
  reg->add_option("--omega", reg_opts.omega, "Tie parameter in [0, 1]")->capture_default_str();

  std::vector<std::string> argv_storage{"rankinfer"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInput;
  }

  try {
    CommandResult res;
    if (ranks->parsed()) {
      res = cmd_ranks(common, ranks_opts, in);
    } else if (csr->parsed()) {
      res = cmd_csranks(common, cs_opts, in);
    } else if (best->parsed()) {
      res = cmd_tau(common, best_opts, in, false);
    } else if (worst->parsed()) {
      res = cmd_tau(common, worst_opts, in, true);
    } else if (mn->parsed()) {
      res = cmd_multinom(common, mn_opts, in);
    } else {
      res = cmd_rankreg(common, reg_opts, in);
    }
    emit(common, res, out);
    return kExitOk;
  } catch (const FormulaError& e) {
    err << "error: " << e.what() << "\n" << caret_diagnostic(reg_opts.formula, e.position()) << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace rankinfer::cli
