// bpe-atlas command line front end. Talks to the library only through the C
// interface.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bpe_atlas.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCompute = 2;

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<unsigned> nmax;
  std::optional<unsigned> depth;
  std::optional<std::string> grid;
  std::optional<double> threshold;
  std::optional<unsigned long long> seed;
  std::optional<std::string> family;
  std::optional<unsigned> k;
  std::optional<std::string> z;
  std::optional<std::string> w;
  bool strict = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--nmax", o.nmax, "horizon N for this subcommand");
  cmd->add_option("--depth", o.depth, "materialization depth");
  cmd->add_option("--grid", o.grid, "polar or cartesian")
      ->check(CLI::IsMember({"polar", "cartesian"}));
  cmd->add_option("--threshold", o.threshold, "slope threshold per step");
  cmd->add_option("--seed", o.seed, "seed for sphere sampling");
  cmd->add_option("--family", o.family, "example1, example2, classical or custom");
  cmd->add_option("--k", o.k, "number of branches for example2");
  cmd->add_flag("--strict", o.strict,
                "exit 2 on INCONCLUSIVE scan points or failed verification rows");
}

// "re,im" or "re".
json parse_point(const std::string& s) {
  std::stringstream in(s);
  double re = 0, im = 0;
  char comma = 0;
  in >> re;
  if (in.fail()) throw std::invalid_argument("bad complex number '" + s + "'");
  if (in >> comma) {
    if (comma != ',' || !(in >> im))
      throw std::invalid_argument("bad complex number '" + s + "'");
  }
  return json::array({re, im});
}

int fail_status(bpe_status st) {
  std::cerr << "bpe-atlas: " << bpe_status_string(st) << ": " << bpe_last_error() << "\n";
  return st == BPE_PARSE_ERROR || st == BPE_VALIDATION_ERROR ? kExitConfig : kExitCompute;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bpe-atlas: bounded point evaluations of weighted shifts"};
  app.require_subcommand(1);
  Options o;
  const char* names[] = {"describe", "radii", "scan", "kernel", "verify-example1",
                         "verify-example2"};
  const char* help[] = {"summarize the operator", "disc radii and r(T') estimates",
                        "classify a grid of points", "reproducing kernel at (z, w)",
                        "check the lacunary chain example", "check the tree example"};
  for (int i = 0; i < 6; ++i) {
    auto* cmd = app.add_subcommand(names[i], help[i]);
    add_common(cmd, o);
    if (std::string(names[i]) == "kernel") {
      cmd->add_option("--z", o.z, "z as re,im");
      cmd->add_option("--w", o.w, "w as re,im");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  json doc = json::object();
  try {
    if (!o.config_path.empty()) {
      std::ifstream f(o.config_path);
      std::stringstream ss;
      ss << f.rdbuf();
      doc = json::parse(ss.str());
    }
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    if (o.family) doc["operator"]["family"] = *o.family;
    if (o.depth) doc["operator"]["depth"] = *o.depth;
    if (o.k) doc["operator"]["k"] = *o.k;
    if (o.grid) doc["scan"]["grid"] = *o.grid;
    if (o.threshold) doc["scan"]["slope_threshold"] = *o.threshold;
    if (o.seed) doc["seed"] = *o.seed;
    if (o.z) doc["kernel"]["z"] = parse_point(*o.z);
    if (o.w) doc["kernel"]["w"] = parse_point(*o.w);
    if (o.nmax) {
      if (cmd == "scan")
        doc["scan"]["N"] = *o.nmax;
      else if (cmd == "kernel")
        doc["kernel"]["N"] = *o.nmax;
      else
        doc["radii"]["N"] = *o.nmax;
    }
  } catch (const std::exception& e) {
    std::cerr << "bpe-atlas: parse-error: " << e.what() << "\n";
    return kExitConfig;
  }

  bpe_config* config = nullptr;
  if (const auto st = bpe_config_parse(doc.dump().c_str(), &config); st != BPE_OK)
    return fail_status(st);

  std::string out_dir = o.out_dir;
  if (out_dir.empty() && cmd == "scan") out_dir = ".";
  const char* dir = out_dir.empty() ? nullptr : out_dir.c_str();

  char* report = nullptr;
  bpe_status st = BPE_OK;
  int all_pass = 1;
  if (cmd == "describe")
    st = bpe_run_describe(config, dir, &report);
  else if (cmd == "radii")
    st = bpe_run_radii(config, dir, &report);
  else if (cmd == "scan")
    st = bpe_run_scan(config, dir, 0, &report);
  else if (cmd == "kernel")
    st = bpe_run_kernel(config, dir, &report);
  else
    st = bpe_run_verify(cmd == "verify-example1" ? 1 : 2, config, dir, &report, &all_pass);
  bpe_config_free(config);
  if (st != BPE_OK) return fail_status(st);

  const json out = json::parse(report);
  bpe_string_free(report);

  int rc = kExitOk;
  if (cmd.rfind("verify-", 0) == 0) {
    for (const auto& row : out["table"]["rows"]) {
      std::printf("%s  %-58s computed=%.17g target=%.17g tol=%g (%s)\n",
                  row["pass"].get<bool>() ? "PASS" : "FAIL",
                  row["name"].get<std::string>().c_str(),
                  row["computed"].is_number() ? row["computed"].get<double>() : NAN,
                  row["target"].is_number() ? row["target"].get<double>() : NAN,
                  row["tolerance"].get<double>(),
                  row["relation"].get<std::string>().c_str());
    }
    std::printf("%s\n", all_pass ? "all rows pass" : "some rows fail");
    if (o.strict && !all_pass) rc = kExitCompute;
  } else {
    std::cout << out.dump(2) << "\n";
    if (cmd == "scan" && o.strict && out["counts"]["INCONCLUSIVE"].get<std::size_t>() > 0) {
      std::cerr << "bpe-atlas: strict mode: scan has INCONCLUSIVE points\n";
      rc = kExitCompute;
    }
  }
  return rc;
}
