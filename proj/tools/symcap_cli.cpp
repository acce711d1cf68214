#include "symcap/symcap.h"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

enum Exit { kPass = 0, kCheckFail = 1, kUsage = 2, kNumeric = 3, kInternal = 4 };

int exit_for(symcap_status s) {
  switch (s) {
    case SYMCAP_OK: return kPass;
    case SYMCAP_E_PARSE:
    case SYMCAP_E_INVALID_ARGUMENT: return kUsage;
    case SYMCAP_E_NUMERIC: return kNumeric;
    default: return kInternal;
  }
}

int report_error(symcap_status s, const std::string& context) {
  std::cerr << "symcap: " << context << ": " << symcap_last_error() << "\n";
  return exit_for(s);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return static_cast<bool>(out);
}

// Flag values in the order they were declared; empty strings are unset.
struct Flags {
  std::map<std::string, std::string> global;
  std::map<std::string, std::string> local;
};

void add_local(CLI::App* sub, Flags& f, const std::string& flag, const std::string& key, const std::string& help) {
  sub->add_option(flag, f.local[key], help);
}

std::string config_text(const std::string& base, const std::string& command, const Flags& f) {
  std::string text = base;
  if (!text.empty() && text.back() != '\n') text += '\n';
  text += "[global]\n";
  for (const auto& [k, v] : f.global) {
    if (!v.empty()) text += k + " = " + v + "\n";
  }
  text += "[" + command + "]\n";
  for (const auto& [k, v] : f.local) {
    if (!v.empty()) text += k + " = " + v + "\n";
  }
  return text;
}

int write_report(const symcap_report* r, const std::string& out, bool summary_to_stdout) {
  if (!out.empty()) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
      std::cerr << "symcap: cannot create " << out << ": " << ec.message() << "\n";
      return kInternal;
    }
    for (std::size_t i = 0; i < symcap_report_file_count(r); ++i) {
      const fs::path p = fs::path(out) / symcap_report_file_name(r, i);
      if (!write_file(p, symcap_report_file_content(r, i))) {
        std::cerr << "symcap: cannot write " << p.string() << "\n";
        return kInternal;
      }
    }
  }
  (summary_to_stdout ? std::cout : std::cerr) << symcap_report_summary(r);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean width, capacity and symplectic image experiments for convex bodies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(symcap_version()));

  std::string out, config_path;
  Flags flags;
  std::string seed, workers;

  struct Spec {
    const char* name;
    const char* help;
    std::vector<std::tuple<const char*, const char*, const char*>> options;  // flag, key, help
  };
  const char* body = "Body in the description grammar, e.g. 'ellipsoid(2,1)' or 'polydisk(1,2)'";
  const char* bodies = "Bodies separated by ';'";
  const std::vector<Spec> specs{
      {"meanwidth", "Mean width by antithetic Monte Carlo (and quadrature in the plane)",
       {{"--body", "body", body}, {"--samples", "samples", "Sphere nodes"}, {"--antithetic", "antithetic", "true|false"}}},
      {"quermass", "Steiner fit: quermassintegrals and the normalized chain",
       {{"--body", "body", body}, {"--budget", "budget", "Directions for the volume estimator"},
        {"--samples", "samples", "Sphere nodes for the mean width cross-check"}}},
      {"ffunctions", "F and F-tilde on a t grid",
       {{"--body", "body", body}, {"--t-grid", "t_grid", "Comma-separated t values"},
        {"--budget", "budget", "Directions for the volume estimator"}, {"--modes", "modes", "Fourier modes"},
        {"--starts", "starts", "Optimizer starts"}}},
      {"capacity", "Loop-minimization capacity estimate (JSON)",
       {{"--body", "body", body}, {"--modes", "modes", "Fourier modes"}, {"--starts", "starts", "Optimizer starts"}}},
      {"localmin", "Local minimality of a ball product over Sp(2n) (JSON verdict)",
       {{"--body", "body", body}, {"--directions", "directions", "Random directions"},
        {"--samples", "samples", "Sphere nodes"}}},
      {"search", "Descent on M over Sp(2n); the M trace as CSV",
       {{"--body", "body", body}, {"--steps", "steps", "Maximum steps"}, {"--samples", "samples", "Sphere nodes"}}},
      {"green", "Planar minimality criterion", {{"--bodies", "bodies", bodies}}},
      {"squash", "Area-preserving squash family of superellipses", {{"--p-grid", "p_grid", "Comma-separated p values"}}},
      {"roundtest", "Rounded product test on a ball product with a square factor pair",
       {{"--body", "body", body}, {"--p-grid", "p_grid", "Comma-separated p values"},
        {"--samples", "samples", "Sphere nodes"}}},
      {"probe", "Naive extension of the planar area map",
       {{"--body", "body", body}, {"--index", "index", "Plane index i (1-based)"}, {"--p", "p", "Superellipse exponent"},
        {"--samples", "samples", "Sphere nodes"}}},
      {"flowcheck", "First variation of M along random Hamiltonian flows",
       {{"--bodies", "bodies", bodies}, {"--hamiltonians", "hamiltonians", "Random Hamiltonians per body"},
        {"--samples", "samples", "Sphere nodes"}}},
      {"scan", "Capacity against the normalized quermassintegrals",
       {{"--bodies", "bodies", bodies}, {"--budget", "budget", "Directions for the volume estimator"},
        {"--modes", "modes", "Fourier modes"}, {"--starts", "starts", "Optimizer starts"}}},
      {"verify-all", "Run every acceptance criterion", {{"--criteria", "criteria", "Comma-separated subset"}}},
  };

  std::string command;
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    for (const auto& [flag, key, help] : s.options) add_local(sub, flags, flag, key, help);
    sub->add_option("--seed", seed, "Random seed (default 7)");
    sub->add_option("--workers", workers, "Worker threads; results do not depend on it");
    sub->add_option("--out", out, "Directory for report files; without it the primary report goes to stdout");
    sub->add_option("--config", config_path, "Config file; flags override its values");
    sub->callback([&command, name = std::string(s.name)] { command = name; });
  }

  std::string plot_report;
  CLI::App* plot = app.add_subcommand("plotdata", "Plot series from a report file");
  plot->add_option("--report", plot_report, "Report file (ffunctions.csv, squash.csv or search.csv)")->required();
  plot->add_option("--out", out, "Output directory (default: next to the report)");
  plot->callback([&command] { command = "plotdata"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  if (command == "plotdata") {
    const auto content = read_file(plot_report);
    if (!content) {
      std::cerr << "symcap: cannot read report " << plot_report << "\n";
      return kUsage;
    }
    symcap_report* r = nullptr;
    const std::string name = fs::path(plot_report).filename().string();
    const symcap_status s = symcap_plotdata(name.c_str(), content->c_str(), &r);
    if (s != SYMCAP_OK) return report_error(s, plot_report);
    if (out.empty()) out = fs::path(plot_report).parent_path().string();
    if (out.empty()) out = ".";
    const int code = write_report(r, out, true);
    for (std::size_t i = 0; code == kPass && i < symcap_report_file_count(r); ++i) {
      std::cout << (fs::path(out) / symcap_report_file_name(r, i)).string() << "\n";
    }
    symcap_report_free(r);
    return code;
  }

  std::string base;
  if (!config_path.empty()) {
    const auto content = read_file(config_path);
    if (!content) {
      std::cerr << "symcap: cannot read config " << config_path << "\n";
      return kUsage;
    }
    base = *content;
  }
  flags.global["seed"] = seed;
  flags.global["workers"] = workers;
  const std::string text = config_text(base, command, flags);

  symcap_report* r = nullptr;
  const symcap_status s = symcap_run(command.c_str(), text.c_str(), &r);
  if (s != SYMCAP_OK) {
    const int line = symcap_last_error_line();
    const int base_lines = static_cast<int>(std::count(base.begin(), base.end(), '\n')) + (base.empty() || base.back() == '\n' ? 0 : 1);
    if (s == SYMCAP_E_PARSE && line > base_lines) {
      // the offending value came from a flag: report the key and the position inside the value
      std::istringstream lines(text);
      std::string l;
      for (int i = 0; i < line && std::getline(lines, l);) ++i;
      const std::size_t eq = l.find(" = ");
      std::string msg = symcap_last_error();
      const std::size_t at = msg.rfind(" (line ");
      if (at != std::string::npos) msg.erase(at);
      std::cerr << "symcap: " << command << ": " << msg;
      if (eq != std::string::npos) {
        std::cerr << " (value of '" << l.substr(0, eq) << "', character "
                  << symcap_last_error_column() - static_cast<int>(eq) - 3 << ")";
      }
      std::cerr << "\n";
      return kUsage;
    }
    return report_error(s, config_path.empty() ? command : config_path);
  }
  int code = write_report(r, out, !out.empty());
  if (code == kPass && out.empty() && symcap_report_file_count(r) > 0) std::cout << symcap_report_file_content(r, 0);
  if (code == kPass) code = symcap_report_exit_code(r) == 0 ? kPass : kCheckFail;
  symcap_report_free(r);
  return code;
}
