// crlab: command-line front end.
//
//   crlab validate  SCENARIO [--depth N]
//   crlab search    (--table FILE | --program TEXT [--oracle BITS]) --x BITS --i N
//   crlab construct SCENARIO --out DIR
//   crlab decode    SCENARIO (--beta BITS | --beta-file FILE) --out DIR [--alpha-length N]
//   crlab roundtrip SCENARIO --out DIR
//   crlab check     [--scenario FILE] [--seed N] [--quick] [--inject-fault]
//
// Exit status: 0 pass, 1 check or logic failure, 2 usage or I/O failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "crlab/checks.hpp"
#include "crlab/coding.hpp"
#include "crlab/construction.hpp"
#include "crlab/decoder.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Options {
  std::string scenario;
  std::string out;
  std::size_t depth = 8;
  std::string table;
  std::string program;
  std::string oracle;
  std::uint64_t budget = 100000;
  std::string x;
  std::size_t i = 0;
  std::string beta;
  std::string beta_file;
  std::uint64_t alpha_length = 0;
  std::uint64_t seed = crlab::checks::SuiteOptions{}.seed;
  bool quick = false;
  bool inject_fault = false;
  bool serial = false;
};

void print_config(const std::string& command, const json& fields) {
  json config = fields;
  config["subcommand"] = command;
  std::cout << "config " << config.dump() << "\n";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw crlab::FormatError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  return s.substr(start);
}

crlab::kernels::Execution execution(const Options& o) {
  return o.serial ? crlab::kernels::Execution::kSerial
                  : crlab::kernels::Execution::kParallel;
}

int cmd_validate(const Options& o) {
  print_config("validate", {{"scenario", o.scenario}, {"depth", o.depth}});
  auto sc = crlab::load_scenario(o.scenario);
  auto problems = crlab::validate_scenario(sc, o.depth);
  if (sc.candidates.empty()) problems.push_back("scenario has no candidates");
  for (const auto& p : problems) std::cout << "FAIL " << p << "\n";
  if (!problems.empty()) return kFail;
  std::cout << "OK " << sc.candidates.size() << " candidates, stages 0.." << sc.stages
            << ", eval_set " << crlab::to_string(sc.eval_set) << "\n";
  return kPass;
}

int cmd_search(const Options& o) {
  print_config("search", {{"table", o.table},
                          {"program", o.program},
                          {"oracle", o.oracle},
                          {"budget", o.budget},
                          {"x", o.x},
                          {"i", o.i}});
  if (o.table.empty() == o.program.empty()) {
    std::cerr << "error: give exactly one of --table and --program\n";
    return kUsage;
  }
  auto d = [&] {
    if (!o.table.empty()) {
      std::ifstream in(o.table);
      if (!in) throw crlab::FormatError("cannot open " + o.table);
      return crlab::read_table(in);
    }
    return crlab::Martingale::program(
        crlab::mdsl::parse(o.program),
        crlab::BitSource::explicit_bits(crlab::BitString::parse(o.oracle)), o.budget);
  }();
  auto x = crlab::BitString::parse(o.x);
  auto found = crlab::safe_extensions(d, x, o.i, execution(o));
  std::cout << "d(x) " << crlab::to_string(d(x)) << "\n";
  std::cout << "count " << found.size() << "\n";
  for (const auto& y : found) {
    std::cout << "safe " << y.str() << " " << crlab::to_string(d(x.concat(y))) << "\n";
  }
  if (found.size() < 2) {
    std::cout << "FAIL fewer than two safe extensions\n";
    return kFail;
  }
  std::cout << "first_two " << found[0].str() << " " << found[1].str() << "\n";
  return kPass;
}

int cmd_construct(const Options& o) {
  print_config("construct", {{"scenario", o.scenario}, {"out", o.out}});
  auto sc = crlab::load_scenario(o.scenario);
  crlab::ConstructionOptions options;
  options.exec = execution(o);
  auto r = crlab::run_construction(sc, options);
  crlab::write_construction(r, sc, o.out);
  std::cout << "beta " << r.beta.str() << "\n";
  std::cout << "d(beta) " << crlab::to_string(r.final_d(r.beta)) << "\n";
  return kPass;
}

crlab::BitString load_beta(const Options& o) {
  if (!o.beta.empty() && !o.beta_file.empty()) {
    throw CLI::ValidationError("give only one of --beta and --beta-file");
  }
  if (!o.beta_file.empty()) return crlab::BitString::parse(trim(read_file(o.beta_file)));
  return crlab::BitString::parse(o.beta);
}

std::string flag_string(const std::vector<bool>& flags) {
  std::string s;
  for (bool f : flags) s += f ? 'T' : 'F';
  return s;
}

int cmd_decode(const Options& o) {
  print_config("decode", {{"scenario", o.scenario},
                          {"beta", o.beta},
                          {"beta_file", o.beta_file},
                          {"alpha_length", o.alpha_length},
                          {"out", o.out}});
  auto sc = crlab::load_scenario(o.scenario);
  auto beta = load_beta(o);
  try {
    auto r = crlab::write_decode(sc, beta, o.alpha_length, o.out);
    std::cout << "flags " << flag_string(r.flags) << "\n";
    std::cout << "capital " << crlab::to_string(r.final_capital) << "\n";
  } catch (const crlab::DecodeError& e) {
    std::cout << "FAIL " << e.what() << "\n";
    return kFail;
  }
  return kPass;
}

int cmd_roundtrip(const Options& o) {
  print_config("roundtrip", {{"scenario", o.scenario}, {"out", o.out}});
  auto sc = crlab::load_scenario(o.scenario);
  crlab::ConstructionOptions options;
  options.exec = execution(o);
  auto r = crlab::run_construction(sc, options);
  crlab::write_construction(r, sc, o.out);
  std::vector<bool> expected;
  for (std::size_t s = 0; s <= sc.stages; ++s) {
    expected.push_back(s < sc.candidates.size() && sc.candidates[s].declared_total);
  }
  auto decoded = crlab::write_decode(sc, r.beta, r.traces.back().t, o.out);
  crlab::Rational target = crlab::pow2(static_cast<long>(sc.stages + 1));
  std::cout << "declared " << flag_string(expected) << "\n";
  std::cout << "decoded  " << flag_string(decoded.flags) << "\n";
  std::cout << "capital  " << crlab::to_string(decoded.final_capital) << "\n";
  bool ok = decoded.flags == expected && decoded.final_capital == target;
  std::cout << (ok ? "PASS" : "FAIL") << " roundtrip\n";
  return ok ? kPass : kFail;
}

int cmd_check(const Options& o) {
  print_config("check", {{"scenario", o.scenario},
                         {"seed", o.seed},
                         {"quick", o.quick},
                         {"inject_fault", o.inject_fault}});
  crlab::checks::SuiteOptions options;
  options.seed = o.seed;
  options.quick = o.quick;
  options.fault = o.inject_fault ? crlab::checks::Fault::kUnfairTables
                                 : crlab::checks::Fault::kNone;
  auto main = o.scenario.empty() ? crlab::checks::builtin_scenario("s3")
                                 : crlab::load_scenario(o.scenario);
  auto results = crlab::checks::run_suite(options, main, [](const auto& r) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
  });
  for (const auto& r : results) {
    if (!r.passed) {
      std::cout << "first failing property: " << r.name << "\n";
      return kFail;
    }
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact martingale toolkit and the pair construction"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", o.scenario, "Scenario JSON")->required();
  validate->add_option("--depth", o.depth, "Fairness check depth");

  auto* search = app.add_subcommand("search", "List the safe extensions of x");
  search->add_option("--table", o.table, "Martingale table file");
  search->add_option("--program", o.program, "Martingale program");
  search->add_option("--oracle", o.oracle, "Oracle bits for --program");
  search->add_option("--budget", o.budget, "Step budget for --program");
  search->add_option("--x", o.x, "Base string (default: the empty string)");
  search->add_option("--i", o.i, "Precision index")->required();
  search->add_flag("--serial", o.serial, "Use the serial kernel");

  auto* construct = app.add_subcommand("construct", "Run the construction");
  construct->add_option("scenario", o.scenario, "Scenario JSON")->required();
  construct->add_option("--out", o.out, "Output directory")->required();
  construct->add_flag("--serial", o.serial, "Use the serial kernels");

  auto* decode = app.add_subcommand("decode", "Replay beta and trace e");
  decode->add_option("scenario", o.scenario, "Scenario JSON")->required();
  decode->add_option("--beta", o.beta, "Beta bits");
  decode->add_option("--beta-file", o.beta_file, "File holding beta");
  decode->add_option("--alpha-length", o.alpha_length, "Alpha prefix length");
  decode->add_option("--out", o.out, "Output directory")->required();

  auto* roundtrip = app.add_subcommand("roundtrip", "Construct, then decode");
  roundtrip->add_option("scenario", o.scenario, "Scenario JSON")->required();
  roundtrip->add_option("--out", o.out, "Output directory")->required();
  roundtrip->add_flag("--serial", o.serial, "Use the serial kernels");

  auto* check = app.add_subcommand("check", "Run the property suite");
  check->add_option("--scenario", o.scenario, "Scenario for the construction checks");
  check->add_option("--seed", o.seed, "Seed for random tables");
  check->add_flag("--quick", o.quick, "Smaller samples");
  check->add_flag("--inject-fault", o.inject_fault, "Negative control");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*search) return cmd_search(o);
    if (*construct) return cmd_construct(o);
    if (*decode) return cmd_decode(o);
    if (*roundtrip) return cmd_roundtrip(o);
    if (*check) return cmd_check(o);
  } catch (const crlab::AlphaTooShortError& e) {
    std::cout << "FAIL " << e.what() << "\n";
    return kFail;
  } catch (const crlab::ScenarioError& e) {
    std::cout << "FAIL " << e.what() << "\n";
    return kFail;
  } catch (const crlab::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const crlab::Error& e) {
    std::cout << "FAIL " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
