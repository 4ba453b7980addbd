#include "doctest.h"

#include "acnum/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace acnum;

namespace {

ExperimentConfig cfg(Command c, std::map<std::string, std::string> params, std::uint64_t seed = 1) {
  ExperimentConfig e;
  e.command = c;
  e.params = std::move(params);
  e.seed = Seed{seed};
  return e;
}

struct Cli {
  int code;
  std::string out;
};

Cli cli(const std::string& args) {
  const std::string cmd = std::string(ACNUM_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[512];
  while (std::fgets(buf, sizeof buf, p)) out += buf;
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("acnum_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("command names round trip") {
  for (Command c : {Command::GapSearch, Command::WitnessAudit, Command::DeformCheck, Command::DimBounds,
                    Command::Reduction, Command::Nearcomm, Command::Invariants})
    CHECK(parse_command(command_name(c)) == c);
  CHECK_THROWS_AS(parse_command("frobnicate"), UsageError);
}

TEST_CASE("validation rejects bad configs") {
  CHECK_THROWS_AS(validate(cfg(Command::WitnessAudit, {{"n", "3"}})), UsageError);
  CHECK_THROWS_AS(validate(cfg(Command::WitnessAudit, {{"n", "x"}, {"t", "0.1"}})), UsageError);
  CHECK_THROWS_AS(validate(cfg(Command::WitnessAudit, {{"n", "3"}, {"t", "0.1"}, {"bogus", "1"}})), UsageError);
  CHECK_THROWS_AS(validate(cfg(Command::WitnessAudit, {{"n", "11"}, {"t", "0.1"}})), UsageError);
  CHECK_THROWS_AS(validate(cfg(Command::GapSearch, {{"n", "8"}, {"eps", "0.2"}})), UsageError);
  CHECK_THROWS_AS(validate(cfg(Command::DimBounds, {{"t", "0.2"}, {"eps", "0.1"}, {"nmax", "10"}})), UsageError);
  CHECK_THROWS_AS(validate(cfg(Command::Reduction, {{"k", "2"}, {"m", "2"}, {"n", "2"}, {"mode", "f4"}})),
                  UsageError);
  ExperimentConfig t = cfg(Command::WitnessAudit, {{"n", "2"}, {"t", "0.1"}});
  CHECK_NOTHROW(validate(t));
  t.tolerances["slack"] = -1.0;
  CHECK_THROWS_AS(validate(t), UsageError);
  t.tolerances = {{"nope", 1.0}};
  CHECK_THROWS_AS(validate(t), UsageError);
}

TEST_CASE("runs are deterministic for a seed") {
  const ExperimentConfig c = cfg(Command::Reduction, {{"k", "2"}, {"m", "2"}, {"n", "2"}}, 5);
  const ExperimentRecord a = run(c), b = run(c);
  CHECK(a.measurements == b.measurements);
  CHECK(a.pass_flags == b.pass_flags);
  CHECK(a.table_rows == b.table_rows);
  CHECK(a.all_pass());
  CHECK(exit_code(a) == 0);
  const ExperimentRecord other = run(cfg(Command::Reduction, {{"k", "2"}, {"m", "2"}, {"n", "2"}}, 6));
  CHECK_FALSE(other.measurements == a.measurements);
}

TEST_CASE("record and config JSON round trip") {
  ExperimentConfig c = cfg(Command::WitnessAudit, {{"n", "2"}, {"t", "0.15"}}, 9);
  c.tolerances["slack"] = 1e-8;
  const ExperimentConfig back = config_from_json(to_json(c));
  CHECK(back.command == c.command);
  CHECK(back.params == c.params);
  CHECK(back.seed.value == c.seed.value);
  CHECK(back.tolerances == c.tolerances);

  const ExperimentRecord r = run(c);
  const ExperimentRecord rr = record_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(rr.measurements == r.measurements);
  CHECK(rr.pass_flags == r.pass_flags);
  CHECK(rr.table_header == r.table_header);
  CHECK(rr.table_rows == r.table_rows);
  CHECK(rr.wall_time == r.wall_time);

  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"params", nlohmann::json::object()}}), UsageError);
  CHECK_THROWS_AS(record_from_json(nlohmann::json{{"config", to_json(c)}}), SchemaError);
}

TEST_CASE("exit code follows the pass flags") {
  ExperimentRecord r;
  r.pass_flags = {{"a", true}, {"b", true}};
  CHECK(exit_code(r) == 0);
  r.pass_flags.push_back({"c", false});
  CHECK(exit_code(r) == 1);
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("double formatting keeps 17 digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("report aggregates records") {
  CHECK(report({}).csv == "command,seed\n");
  const ExperimentRecord a = run(cfg(Command::WitnessAudit, {{"n", "2"}, {"t", "0.1"}}, 1));
  const ExperimentRecord b = run(cfg(Command::WitnessAudit, {{"n", "2"}, {"t", "0.2"}}, 2));
  const ReportOutput out = report({a, b}, "t", "max_comm_op");
  std::istringstream lines(out.csv);
  std::string header, row1, row2, extra;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  CHECK_FALSE(std::getline(lines, extra));
  CHECK(header.rfind("command,seed,n,t,", 0) == 0);
  CHECK(row1.rfind("witness-audit,1,2,0.1,", 0) == 0);
  CHECK(row2.rfind("witness-audit,2,2,0.2,", 0) == 0);
  // Measurements take precedence over parameters of the same name.
  CHECK(out.plot == format_double(0.1) + " " + format_double(a.find("max_comm_op")->as_double()) + "\n" +
                        format_double(0.2) + " " + format_double(b.find("max_comm_op")->as_double()) + "\n");
  CHECK_THROWS_AS(report({a, b}, "t", "nothing"), SchemaError);
  const ExperimentRecord d = run(cfg(Command::DimBounds, {{"t", "0.2"}, {"eps", "0.03125"}, {"nmax", "5"}}));
  CHECK_THROWS_AS(report({a, d}), SchemaError);
}

TEST_CASE("output files: CSV for tables, JSON otherwise") {
  const auto csv = scratch("audit.csv");
  ExperimentConfig c = cfg(Command::WitnessAudit, {{"n", "2"}, {"t", "0.1"}});
  c.out_path = csv.string();
  const ExperimentRecord r = run(c);
  CHECK(slurp(csv) == table_csv(r));
  CHECK(slurp(csv).rfind("u_index,v_index,comm_hs,comm_op,bound_4t\n", 0) == 0);
  std::filesystem::remove(csv);

  const auto js = scratch("gap.json");
  ExperimentConfig g = cfg(Command::GapSearch, {{"n", "4"}, {"check_samples", "20"}}, 3);
  g.out_path = js.string();
  const ExperimentRecord gr = run(g);
  const nlohmann::json j = nlohmann::json::parse(slurp(js));
  CHECK(j == output_json(gr));
  CHECK(j.contains("found"));
  CHECK(j.contains("restricted_norm"));
  std::filesystem::remove(js);
}

TEST_CASE("command line exit codes") {
  // Tables go to stdout unless --out takes them; then stdout has the summary.
  const auto table = scratch("cli_audit.csv");
  const Cli ok = cli("witness-audit --n 3 --t 0.1 --out " + table.string());
  CHECK(ok.code == 0);
  CHECK(slurp(table).rfind("u_index,", 0) == 0);
  std::filesystem::remove(table);
  CHECK(cli("witness-audit --n 2 --t 0.1").out.rfind("u_index,", 0) == 0);
  const nlohmann::json j = nlohmann::json::parse(ok.out);
  CHECK(j.at("max_comm_op").get<double>() <= 0.4);
  CHECK(j.at("pass").get<bool>());

  CHECK(cli("witness-audit --n 3").code == 2);
  CHECK(cli("witness-audit --n 3 --t 0.1 --bogus 1").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("witness-audit --n 3 --t 0.1 --tol.slack=1e-6").code == 0);
  CHECK(cli("witness-audit --n 3 --t 0.1 --tol.nope=1").code == 2);
  CHECK(cli("witness-audit --n 3 --t 0.1 --tol.slack=abc").code == 2);
  CHECK(cli("witness-audit --n 3 --t 0.1 --tol.slack").code == 2);
  CHECK(cli("invariants").code == 0);
}

TEST_CASE("command line config file and report") {
  const auto conf = scratch("conf.json");
  const auto rec1 = scratch("r1.json"), rec2 = scratch("r2.json"), agg = scratch("agg.csv");
  {
    std::ofstream(conf) << R"({"command": "dim-bounds", "params": {"t": 0.2, "eps": 0.03125, "nmax": 10}, "seed": 4})";
  }
  CHECK(cli("--config " + conf.string()).code == 0);
  CHECK(cli("dim-bounds --t 0.2 --eps 0.03125 --nmax 10 --record " + rec1.string()).code == 0);
  CHECK(cli("dim-bounds --t 0.1 --eps 0.03125 --nmax 10 --record " + rec2.string()).code == 0);
  CHECK(cli("report --inputs " + rec1.string() + " " + rec2.string() + " --out " + agg.string()).code == 0);
  const std::string csv = slurp(agg);
  CHECK(csv.rfind("command,seed,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  for (const auto& p : {conf, rec1, rec2, agg}) std::filesystem::remove(p);
}
