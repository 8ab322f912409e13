#include <sovxxz/cli.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

using namespace sovxxz;
using namespace sovxxz::cli;

namespace {

struct Flags {
  std::string config, out, csv, bcase = "minus";
  std::uint64_t seed = 7;
  std::optional<double> tol_rel, tol_abs;
  int site = 1;
  int sites = 3;
  unsigned workers = 1;
};

RunConfig load(const Flags& f) {
  RunConfig cfg;
  cfg.seed = f.seed;
  cfg.site = f.site;
  cfg.workers = std::max(1u, f.workers);
  if (f.config.empty()) {
    if (f.bcase != "minus" && f.bcase != "plus") throw ValidationError("--case must be minus or plus");
    if (f.sites < 1 || f.sites > 8) throw ValidationError("--sites must lie in [1, 8]");
    cfg.params = random_params(f.sites, f.seed, f.bcase == "minus" ? Case::Minus : Case::Plus);
    return cfg;
  }
  std::ifstream in(f.config);
  if (!in) throw ValidationError("cannot open config '" + f.config + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.params = parse_params(j);
  cfg.sweep = parse_sweep(j);
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(path, std::ios::binary);
  if (!o) throw ValidationError("cannot write '" + path + "'");
  o << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separation of variables for the open XXZ chain"};
  app.require_subcommand(1);
  Flags f;
  for (const char* name : {"verify", "spectrum", "scalar", "matelem", "sweep"}) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", f.config, "JSON model file");
    s->add_option("--seed", f.seed, "random seed");
    s->add_option("--case", f.bcase, "minus or plus, used without --config");
    s->add_option("--sites", f.sites, "chain length, used without --config");
    s->add_option("--out", f.out, "report path (stdout if omitted)");
    s->add_option("--tol-rel", f.tol_rel, "override every relative tolerance");
    s->add_option("--tol-abs", f.tol_abs, "override every absolute tolerance");
    s->add_option("--workers", f.workers, "worker threads");
    if (std::string(name) == "matelem" || std::string(name) == "sweep") s->add_option("--n", f.site, "site n, 1-based");
    if (std::string(name) == "sweep") s->add_option("--csv", f.csv, "CSV path");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::string csv;
  try {
    const RunConfig cfg = load(f);
    const TolSet tol{f.tol_rel, f.tol_abs};
    if (cmd == "sweep") {
      o = run_sweep(cfg, tol, csv);
      if (!csv.empty()) {
        std::string path = f.csv;
        if (path.empty()) path = f.out.empty() ? "sweep.csv" : f.out + ".csv";
        emit(path, csv);
      }
    } else {
      o = run_command(cmd, cfg, tol);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    json r;
    r["command"] = cmd;
    r["error"] = e.what();
    r["exit_code"] = int(kValidation);
    o = {r, kValidation};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << cmd << ": exit " << o.code << " in " << secs << " s\n";
  if (o.report.contains("error")) std::cerr << "error: " << o.report["error"].get<std::string>() << '\n';
  try {
    emit(f.out, o.report.dump(2) + "\n");
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return o.code;
}
