// acnum - command line front end for the experiment harness.
//
//   acnum <command> [--flag value ...] [--seed S] [--out FILE] [--record FILE] [--tol.key=value ...]
//   acnum --config run.json              (fields: command, params, seed, out, tolerances)
//   acnum report --inputs a.json b.json [--x col --y col --plot FILE] [--out FILE]
//
// Exit codes: 0 all assertions pass, 1 assertion failure or runtime error, 2 usage error.

#include "acnum/experiment.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

struct Flag {
  const char* name;
  const char* help;
};

const std::map<std::string, std::vector<Flag>>& command_flags() {
  static const std::map<std::string, std::vector<Flag>> flags{
      {"gap-search",
       {{"n", "matrix dimension"}, {"eps", "slack above 2 sqrt 2 (default 0.05)"}, {"trials", "maximum trials (default 200)"},
        {"check_samples", "random samples for the certificate check (default 1000)"}}},
      {"witness-audit", {{"n", "qubits per side"}, {"t", "deformation angle"}, {"dense", "1 dense path, 0 leg-local"}}},
      {"deform-check",
       {{"t", "deformation angle (default 0.1)"}, {"pairs", "random 2x2 pairs (default 1000)"},
        {"samples", "random x per n (default 100)"}, {"nmax", "largest n (default 4)"}}},
      {"dim-bounds", {{"t", "deformation angle"}, {"eps", "containment slack"}, {"nmax", "sweep n = 1..nmax"}}},
      {"reduction",
       {{"k", "number of U's"}, {"m", "number of V's"}, {"n", "dimension (qubits when --t is given)"},
        {"t", "take U's and V's from the qubit witness family"}, {"mode", "f2 (default) or f3"}}},
      {"nearcomm",
       {{"input", "CMAT2 pair file"}, {"sweeps", "max sweeps (default 100)"}, {"restarts", "extra starts (default 4)"},
        {"n", "witness qubits when no input (default 1)"}, {"t", "witness angle (default 0.05)"},
        {"k", "witness U count (default 1)"}, {"m", "witness V count (default 3)"}}},
      {"invariants", {}},
  };
  return flags;
}

const std::map<std::string, std::string>& command_summary() {
  static const std::map<std::string, std::string> text{
      {"gap-search", "search Haar pairs with a spectral gap and check the certificate"},
      {"witness-audit", "commutator norms of the deformed qubit family (CSV table)"},
      {"deform-check", "deformation identities on 2x2 pairs and the theta expectation"},
      {"dim-bounds", "upper and lower dimension bounds per n and the first crossing (CSV table)"},
      {"reduction", "commutator table of the product or cyclic assembly (CSV table)"},
      {"nearcomm", "alternating descent towards a nearby commuting pair"},
      {"invariants", "quick self-check across all modules"},
  };
  return text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
}

int run_report(const std::vector<std::string>& inputs, const std::string& x, const std::string& y,
               const std::string& out, const std::string& plot) {
  std::vector<acnum::ExperimentRecord> records;
  for (const std::string& path : inputs) {
    std::ifstream is(path);
    if (!is) throw acnum::UsageError("cannot read " + path);
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception& e) {
      throw acnum::UsageError(path + ": " + e.what());
    }
    records.push_back(acnum::record_from_json(j));
  }
  if (!plot.empty() && (x.empty() || y.empty())) throw acnum::UsageError("report: --plot needs --x and --y");
  const acnum::ReportOutput r = acnum::report(records, x, y);
  if (out.empty()) std::cout << r.csv;
  else write_file(out, r.csv);
  if (!plot.empty()) write_file(plot, r.plot);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // --tol.key=value is not expressible as a CLI11 option; peel it off first.
  std::map<std::string, double> tol_overrides;
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--tol.", 0) == 0) {
      const auto eq = a.find('=');
      if (eq == std::string::npos || eq == 6) {
        std::cerr << "error: expected --tol.key=value, got " << a << "\n";
        return 2;
      }
      try {
        std::size_t used = 0;
        const std::string v = a.substr(eq + 1);
        tol_overrides[a.substr(6, eq - 6)] = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        std::cerr << "error: bad tolerance value in " << a << "\n";
        return 2;
      }
      continue;
    }
    args.push_back(a);
  }

  CLI::App app{"Almost commuting matrices: witness families, expander search and subalgebra checks"};
  app.require_subcommand(0, 1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config mirroring the flags");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  std::uint64_t seed = 1;
  std::string out_path, record_path;
  for (const auto& [name, flags] : command_flags()) {
    CLI::App* sub = app.add_subcommand(name, command_summary().at(name));
    subs[name] = sub;
    for (const Flag& f : flags) sub->add_option("--" + std::string(f.name), values[name][f.name], f.help);
    sub->add_option("--seed", seed, "root seed (default 1)");
    sub->add_option("--out", out_path, "output file (CSV for tables, JSON otherwise)");
    sub->add_option("--record", record_path, "write the full record as JSON (input for report)");
  }
  std::vector<std::string> report_inputs;
  std::string report_x, report_y, report_out, report_plot;
  CLI::App* rep = app.add_subcommand("report", "aggregate saved records into CSV and plot data");
  rep->add_option("--inputs", report_inputs, "record JSON files")->required();
  rep->add_option("--x", report_x, "plot x column");
  rep->add_option("--y", report_y, "plot y column");
  rep->add_option("--out", report_out, "aggregated CSV (stdout when absent)");
  rep->add_option("--plot", report_plot, "two-column plot data file");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (rep->parsed()) return run_report(report_inputs, report_x, report_y, report_out, report_plot);

    acnum::ExperimentConfig cfg;
    bool have = false;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) throw acnum::UsageError("cannot read " + config_path);
      nlohmann::json j;
      try {
        is >> j;
      } catch (const nlohmann::json::exception& e) {
        throw acnum::UsageError(config_path + ": " + e.what());
      }
      cfg = acnum::config_from_json(j);
      have = true;
    }
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const acnum::Command c = acnum::parse_command(name);
      if (have && cfg.command != c) throw acnum::UsageError("config command differs from " + name);
      cfg.command = c;
      for (const Flag& f : command_flags().at(name))
        if (sub->count("--" + std::string(f.name))) cfg.params[f.name] = values[name][f.name];
      if (sub->count("--seed")) cfg.seed.value = seed;
      if (sub->count("--out")) cfg.out_path = out_path;
      have = true;
    }
    if (!have) {
      std::cerr << app.help();
      return 2;
    }
    for (const auto& [k, v] : tol_overrides) cfg.tolerances[k] = v;

    const acnum::ExperimentRecord r = acnum::run(cfg);
    const bool table = !r.table_header.empty();
    if (table && cfg.out_path.empty()) std::cout << acnum::table_csv(r);
    else std::cout << acnum::output_json(r).dump(2) << "\n";
    if (!record_path.empty()) write_file(record_path, acnum::to_json(r).dump(2) + "\n");
    for (const acnum::PassFlag& f : r.pass_flags)
      if (!f.ok) std::cerr << "FAIL " << f.name << "\n";
    return acnum::exit_code(r);
  } catch (const acnum::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const acnum::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
