#include "semibounds/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "semibounds/bounds.hpp"
#include "semibounds/oracle.hpp"

namespace semibounds::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kVerifyTolerance = 1e-9;
constexpr double kExtremalTolerance = 1e-12;

json num(double v) { return round_to_emitted(v); }

json opt_num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

void validate(const CliConfig& cfg) {
  if (!std::isfinite(cfg.mean)) throw UsageError("--mean must be finite");
  if (!std::isfinite(cfg.std_dev) || !(cfg.std_dev > 0.0)) {
    throw UsageError("--std must be positive and finite");
  }
  if (cfg.tail_prob && !(*cfg.tail_prob >= 0.0 && *cfg.tail_prob <= 1.0)) {
    throw UsageError("--tail-prob must lie in [0, 1]");
  }
  if (cfg.command == Command::Sweep) {
    if (!cfg.strike_min || !cfg.strike_max) throw UsageError("sweep needs --strike-min and --strike-max");
    if (!std::isfinite(*cfg.strike_min) || !std::isfinite(*cfg.strike_max) ||
        !(*cfg.strike_min < *cfg.strike_max)) {
      throw UsageError("--strike-min must be below --strike-max");
    }
    if (cfg.steps < 2) throw UsageError("--steps must be at least 2");
    return;
  }
  if (!cfg.strike || !std::isfinite(*cfg.strike)) throw UsageError("--strike is required and must be finite");
  if (cfg.command == Command::Verify && cfg.grid_points < 3) {
    throw UsageError("--grid-points must be at least 3");
  }
}

MomentSpec positive_spec(const CliConfig& cfg) {
  if (!(cfg.mean > 0.0)) throw DomainError("mean must be positive");
  return {cfg.mean, cfg.std_dev};
}

void require_positive_strike(double c) {
  if (!(c > 0.0)) throw DomainError("degenerate strike");
}

void write_csv(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i].first;
  os << '\n';
  for (std::size_t i = 0; i < fields.size(); ++i) os << (i ? "," : "") << fields[i].second;
  os << '\n';
}

json echo_inputs(const CliConfig& cfg) {
  json doc;
  doc["mean"] = cfg.mean;
  doc["std_dev"] = cfg.std_dev;
  if (cfg.strike) doc["strike"] = *cfg.strike;
  if (cfg.tail_prob) doc["tail_prob"] = *cfg.tail_prob;
  return doc;
}

void emit(const json& doc, Format fmt, std::ostream& os) {
  if (fmt == Format::Json) {
    os << doc.dump(2) << '\n';
    return;
  }
  std::vector<std::pair<std::string, std::string>> fields;
  for (const auto& [key, value] : doc.items()) {
    std::string text;
    if (value.is_number()) {
      text = format_number(value.get<double>());
    } else if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (!value.is_null()) {
      continue;
    }
    fields.emplace_back(key, text);
  }
  write_csv(os, fields);
}

int run_bounds(const CliConfig& cfg, std::ostream& os) {
  const MomentSpec spec = positive_spec(cfg);
  const Strike c(*cfg.strike);
  require_positive_strike(c.value());

  const ScarfSolution sol = scarf_min(spec, c);
  json doc = echo_inputs(cfg);
  doc["scarf_min"] = num(sol.min_winsorized);
  doc["lo_max"] = num(lo_max(spec, c));
  doc["branch"] = std::string(to_string(sol.branch));
  doc["p_opt"] = opt_num(sol.p_opt);
  doc["threshold_strike"] = num(threshold_strike(spec));
  doc["winsorized_floor"] = num(winsorized_floor(spec, c));
  if (cfg.tail_prob) {
    const auto dlp = dlp_bounds(spec, c, *cfg.tail_prob);
    doc["dlp_lower"] = num(dlp.lower);
    doc["dlp_upper"] = num(dlp.upper);
  }
  const double c_std = standardize(c, spec).strike_std;
  if (c_std > 0.0) {
    const double raw = two_sided_tail_bound(c_std);
    doc["two_sided_tail_bound"] = num(std::min(raw, 1.0));
    doc["two_sided_tail_capped"] = raw > 1.0;
  }
  emit(doc, cfg.format.value_or(Format::Json), os);
  return kOk;
}

int run_extremal(const CliConfig& cfg, std::ostream& os) {
  const MomentSpec spec = positive_spec(cfg);
  const Strike c(*cfg.strike);
  require_positive_strike(c.value());

  const ScarfSolution sol = scarf_min(spec, c);
  if (!sol.extremal) throw DomainError("degenerate strike");
  const auto& x = *sol.extremal;
  const double check = x.winsorized(c.value());
  if (std::fabs(check - sol.min_winsorized) >
      kExtremalTolerance * std::max(1.0, std::fabs(sol.min_winsorized))) {
    throw std::logic_error("extremal distribution does not reproduce the minimum");
  }
  json doc = echo_inputs(cfg);
  doc["low"] = num(x.low());
  doc["high"] = num(x.high());
  doc["p_low"] = num(x.p_low());
  doc["branch"] = std::string(to_string(sol.branch));
  doc["scarf_min"] = num(sol.min_winsorized);
  emit(doc, cfg.format.value_or(Format::Json), os);
  return kOk;
}

json report_json(const VerificationReport& r) {
  json doc;
  doc["closed_form"] = num(r.closed_form);
  doc["oracle_value"] = num(r.oracle_value);
  doc["gap"] = num(r.gap);
  doc["random_trials"] = r.random_trials;
  doc["worst_violation"] = num(r.worst_violation);
  doc["passed"] = r.passed(kVerifyTolerance);
  json support = json::array();
  json probs = json::array();
  for (double v : r.oracle_distribution.support()) support.push_back(num(v));
  for (double v : r.oracle_distribution.probs()) probs.push_back(num(v));
  doc["oracle_support"] = std::move(support);
  doc["oracle_probs"] = std::move(probs);
  return doc;
}

int run_verify(const CliConfig& cfg, std::ostream& os) {
  const MomentSpec spec = positive_spec(cfg);
  const Strike c(*cfg.strike);
  require_positive_strike(c.value());

  ScarfVerifyOptions sopt;
  sopt.grid_points = cfg.grid_points;
  sopt.trials = cfg.trials;
  sopt.seed = cfg.seed;
  sopt.include_extremal = !cfg.exclude_extremal;
  sopt.kernel = cfg.kernel;
  DlpVerifyOptions dopt;
  dopt.trials = cfg.trials;
  dopt.seed = cfg.seed;
  dopt.kernel = cfg.kernel;

  const auto scarf = verify_scarf(spec, c, sopt);
  const auto dlp = verify_dlp(spec, c, dopt);
  const bool passed = scarf.passed(kVerifyTolerance) && dlp.passed(kVerifyTolerance);

  const Format fmt = cfg.format.value_or(Format::Json);
  if (fmt == Format::Json) {
    json doc = echo_inputs(cfg);
    doc["grid_points"] = cfg.grid_points;
    doc["trials"] = cfg.trials;
    doc["seed"] = cfg.seed;
    doc["scarf"] = report_json(scarf);
    doc["dlp"] = report_json(dlp);
    doc["passed"] = passed;
    os << doc.dump(2) << '\n';
  } else {
    os << "check,closed_form,oracle_value,gap,random_trials,worst_violation,passed\n";
    for (const auto& [name, r] : {std::pair{"scarf", &scarf}, std::pair{"dlp", &dlp}}) {
      os << name << ',' << format_number(r->closed_form) << ',' << format_number(r->oracle_value)
         << ',' << format_number(r->gap) << ',' << r->random_trials << ','
         << format_number(r->worst_violation) << ',' << (r->passed(kVerifyTolerance) ? "true" : "false")
         << '\n';
    }
  }
  return passed ? kOk : kVerifyFailed;
}

struct SweepRow {
  double c;
  double scarf_min;
  double lo_max;
  std::string branch;
  std::optional<double> p_opt;
  std::optional<double> dlp_upper;
};

SweepRow sweep_row(const MomentSpec& spec, double strike, bool at_threshold) {
  const Strike c(strike);
  const ScarfSolution sol = scarf_min(spec, c);
  SweepRow row{strike, sol.min_winsorized, sol.max_call, std::string(to_string(sol.branch)),
               sol.p_opt, std::nullopt};
  if (sol.p_opt) row.dlp_upper = dlp_bounds(spec, c, 1.0 - *sol.p_opt).upper;
  if (at_threshold) row.branch = "Threshold";
  return row;
}

int run_sweep(const CliConfig& cfg, std::ostream& os) {
  const MomentSpec spec = positive_spec(cfg);
  const double lo = *cfg.strike_min;
  const double hi = *cfg.strike_max;
  const double t = threshold_strike(spec);

  std::vector<std::pair<double, bool>> strikes;
  strikes.reserve(cfg.steps + 1);
  for (std::size_t k = 0; k < cfg.steps; ++k) {
    const double c = k + 1 == cfg.steps
                         ? hi
                         : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cfg.steps - 1);
    strikes.emplace_back(c, false);
  }
  if (t >= lo && t <= hi) {
    bool snapped = false;
    for (auto& [c, flag] : strikes) {
      if (std::fabs(c - t) <= 1e-9 * std::max(1.0, std::fabs(t))) {
        c = t;
        flag = true;
        snapped = true;
        break;
      }
    }
    if (!snapped) {
      strikes.emplace_back(t, true);
      std::stable_sort(strikes.begin(), strikes.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
    }
  }

  std::vector<SweepRow> rows;
  rows.reserve(strikes.size());
  for (const auto& [c, flag] : strikes) rows.push_back(sweep_row(spec, c, flag));

  if (cfg.format.value_or(Format::Csv) == Format::Csv) {
    os << kSweepHeader << '\n';
    for (const auto& r : rows) {
      os << format_number(r.c) << ',' << format_number(r.scarf_min) << ',' << format_number(r.lo_max)
         << ',' << r.branch << ',' << cell(r.p_opt) << ',' << cell(r.dlp_upper) << '\n';
    }
  } else {
    json doc = echo_inputs(cfg);
    json cols = {{"c", json::array()},        {"scarf_min", json::array()}, {"lo_max", json::array()},
                 {"branch", json::array()},   {"p_opt", json::array()},     {"dlp_upper_at_pstar", json::array()}};
    for (const auto& r : rows) {
      cols["c"].push_back(num(r.c));
      cols["scarf_min"].push_back(num(r.scarf_min));
      cols["lo_max"].push_back(num(r.lo_max));
      cols["branch"].push_back(r.branch);
      cols["p_opt"].push_back(opt_num(r.p_opt));
      cols["dlp_upper_at_pstar"].push_back(opt_num(r.dlp_upper));
    }
    doc.update(cols);
    os << doc.dump(2) << '\n';
  }
  return kOk;
}

int dispatch(const CliConfig& cfg, std::ostream& os) {
  switch (cfg.command) {
    case Command::Bounds:
      return run_bounds(cfg, os);
    case Command::Extremal:
      return run_extremal(cfg, os);
    case Command::Verify:
      return run_verify(cfg, os);
    case Command::Sweep:
      return run_sweep(cfg, os);
  }
  return kBadArguments;
}

void error_json(std::ostream& out, const std::string& message) {
  out << json{{"error", message}}.dump() << '\n';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round_to_emitted(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kBadArguments;
  }

  std::ostringstream buffer;
  int code = kOk;
  try {
    code = dispatch(config, buffer);
  } catch (const DomainError& e) {
    error_json(out, e.what());
    return kDomainError;
  } catch (const InvalidSpec& e) {
    error_json(out, e.what());
    return kDomainError;
  } catch (const OutOfRange& e) {
    error_json(out, e.what());
    return kDomainError;
  } catch (const Infeasible& e) {
    error_json(out, e.what());
    return kDomainError;
  } catch (const IllConditioned& e) {
    error_json(out, e.what());
    return kDomainError;
  } catch (const std::logic_error& e) {
    error_json(out, e.what());
    return kVerifyFailed;
  }

  if (config.output_path) {
    std::ofstream file(*config.output_path, std::ios::binary | std::ios::trunc);
    if (!file || !(file << buffer.str()) || !file.flush()) {
      err << "error: cannot write " << *config.output_path << '\n';
      return kIoError;
    }
  } else {
    out << buffer.str();
  }
  return code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"Sharp semi-parametric bounds on E(X ^ c) and E(X - c)+"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{{"json", Format::Json}, {"csv", Format::Csv}};
  const std::map<std::string, kernels::Kernel> kernel_names{{"auto", kernels::Kernel::Auto},
                                                            {"scalar", kernels::Kernel::Scalar},
                                                            {"avx2", kernels::Kernel::Avx2},
                                                            {"generic", kernels::Kernel::Generic}};
  std::string format_name = "json";
  std::string kernel_name = "auto";
  double strike = 0.0, strike_min = 0.0, strike_max = 0.0, tail = 0.0;
  std::string out_path;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--mean", cfg.mean, "Mean of X")->required();
    sub->add_option("--std", cfg.std_dev, "Standard deviation of X")->required();
    sub->add_option("--format", format_name, "Output format (json|csv)")
        ->check(CLI::IsMember({"json", "csv"}, CLI::ignore_case));
    sub->add_option("--out", out_path, "Write output to this file instead of stdout");
  };

  auto* bounds = app.add_subcommand("bounds", "Scarf minimum, Lo maximum and optional dlP bounds");
  auto* extremal = app.add_subcommand("extremal", "Two-point distribution attaining the Scarf minimum");
  auto* verify = app.add_subcommand("verify", "Check the closed forms against the brute-force oracle");
  auto* sweep = app.add_subcommand("sweep", "Tabulate the bounds over a strike range");
  for (auto* sub : {bounds, extremal, verify, sweep}) common(sub);
  for (auto* sub : {bounds, extremal, verify}) {
    sub->add_option("--strike", strike, "Strike c")->required();
  }
  bounds->add_option("--tail-prob", tail, "Known P(X > c) for the dlP bounds");
  verify->add_option("--grid-points", cfg.grid_points, "Uniform oracle grid size");
  verify->add_option("--trials", cfg.trials, "Random feasible distributions to sample");
  verify->add_option("--seed", cfg.seed, "Seed for the random trials");
  verify->add_flag("--exclude-extremal", cfg.exclude_extremal,
                   "Do not add the closed-form extremal support to the grid");
  verify->add_option("--kernel", kernel_name, "Vertex scan kernel (auto|scalar|avx2|generic)")
      ->check(CLI::IsMember({"auto", "scalar", "avx2", "generic"}, CLI::ignore_case));
  sweep->add_option("--strike-min", strike_min, "First strike")->required();
  sweep->add_option("--strike-max", strike_max, "Last strike")->required();
  sweep->add_option("--steps", cfg.steps, "Number of uniform strikes")->required();

  std::vector<std::string> argv_storage{"semibounds"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kBadArguments;
  }

  if (bounds->parsed()) cfg.command = Command::Bounds;
  if (extremal->parsed()) cfg.command = Command::Extremal;
  if (verify->parsed()) cfg.command = Command::Verify;
  if (sweep->parsed()) cfg.command = Command::Sweep;
  auto* active = app.get_subcommands().front();
  if (cfg.command != Command::Sweep && active->count("--strike")) cfg.strike = strike;
  if (cfg.command == Command::Sweep) {
    cfg.strike_min = strike_min;
    cfg.strike_max = strike_max;
  }
  if (cfg.command == Command::Bounds && bounds->count("--tail-prob")) cfg.tail_prob = tail;
  if (active->count("--format")) cfg.format = formats.at(CLI::detail::to_lower(format_name));
  if (active->count("--out")) cfg.output_path = out_path;
  cfg.kernel = kernel_names.at(CLI::detail::to_lower(kernel_name));
  return run(cfg, out, err);
}

}  // namespace semibounds::cli
