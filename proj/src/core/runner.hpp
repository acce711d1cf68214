#pragma once

#include "common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace symcap {

// Flat key = value text with [section] headers. Keys before the first header,
// or under [global], apply to every command unless the command's own section
// overrides them. A section may be reopened later in the text; its keys then
// override earlier ones. '#' starts a comment. Lists of bodies are separated by ';',
// numeric lists by ','.
class RunConfig {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    int column = 0;  // column of the first value character
  };

  static RunConfig parse(std::string_view text);

  void set(const std::string& section, const std::string& key, std::string value);
  bool has(const std::string& section, const std::string& key) const;
  // Section value, else global value, else nullptr.
  const Entry* find(const std::string& section, const std::string& key) const;

  std::string text(const std::string& section, const std::string& key, const std::string& fallback) const;
  long long integer(const std::string& section, const std::string& key, long long fallback) const;
  // Positive integer (budgets, counts).
  std::size_t budget(const std::string& section, const std::string& key, std::size_t fallback) const;
  double number(const std::string& section, const std::string& key, double fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key,
                              const std::vector<double>& fallback) const;
  std::vector<std::string> list(const std::string& section, const std::string& key,
                                const std::vector<std::string>& fallback) const;

  std::uint64_t seed() const;
  int workers() const;

  // Canonical text (sorted sections and keys), recorded next to the reports.
  std::string canonical() const;

 private:
  [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& what) const;

  std::map<std::string, std::map<std::string, Entry>> sections_;
};

// One row of a standard report. Wall time is kept out of the report files so
// that identical runs produce identical bytes; it goes to timing.csv.
struct ReportRecord {
  std::string experiment;
  std::string body;
  std::string parameter;
  double value = 0.0;
  double std_error = 0.0;
  std::string verdict;  // PASS/FAIL for checks; other words are outcomes
  std::uint64_t seed = 0;
  std::size_t budget = 0;
};

std::string records_csv(const std::vector<ReportRecord>& records);
std::string csv_field(const std::string& s);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct ReportFile {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<ReportFile> files;
  std::string summary;  // human-readable primary output
  int exit_code = 0;    // 0 iff every PASS/FAIL check passed
};

const std::vector<std::string>& run_commands();

// Runs one subcommand. Throws ParseError for bad body strings (positions refer
// to the config text), ValidationError for bad parameters and NumericalError
// for numerical failures.
RunResult run(const std::string& command, const RunConfig& config);

// Series files (one per figure-like output) derived from a report file:
// ffunctions.csv, squash.csv and search.csv. Throws ValidationError for
// reports that carry no series.
std::vector<ReportFile> emit_plotdata(const ReportFile& report);

}  // namespace symcap
