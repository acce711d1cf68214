#include "runner.hpp"

#include "acceptance.hpp"
#include "body_grammar.hpp"
#include "capacity.hpp"
#include "experiments.hpp"
#include "sphere.hpp"
#include "steiner.hpp"
#include "symplectic.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

namespace symcap {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Pieces of a list value with their offsets inside the value. Separators
// inside brackets or parentheses do not split.
std::vector<std::pair<std::string, int>> split_top(std::string_view value, char sep) {
  std::vector<std::pair<std::string, int>> out;
  int depth = 0;
  std::size_t start = 0;
  const auto flush = [&](std::size_t end) {
    std::string_view raw = value.substr(start, end - start);
    std::string_view t = trim(raw);
    const int offset = static_cast<int>(start + (t.empty() ? 0 : t.data() - raw.data()));
    out.emplace_back(std::string(t), offset);
  };
  for (std::size_t i = 0; i < value.size(); ++i) {
    const char c = value[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == sep && depth == 0) {
      flush(i);
      start = i + 1;
    }
  }
  flush(value.size());
  return out;
}

}  // namespace

// --- RunConfig ----------------------------------------------------------------

RunConfig RunConfig::parse(std::string_view text) {
  RunConfig cfg;
  std::string section;
  std::set<std::string> block;  // keys seen since the last header
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::string_view body = trim(line);
    const int lead = static_cast<int>(body.data() - line.data()) + 1;
    if (!body.empty()) {
      if (body.front() == '[') {
        if (body.back() != ']') throw ParseError("unterminated section header", line_no, lead);
        std::string_view name = trim(body.substr(1, body.size() - 2));
        if (name.empty()) throw ParseError("empty section name", line_no, lead + 1);
        section = name == "global" ? "" : std::string(name);
        block.clear();
      } else {
        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no, lead);
        std::string_view key = trim(body.substr(0, eq));
        if (key.empty()) throw ParseError("missing key before '='", line_no, lead);
        for (std::size_t i = 0; i < key.size(); ++i) {
          const char c = key[i];
          if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
            throw ParseError("invalid character '" + std::string(1, c) + "' in key", line_no,
                             lead + static_cast<int>(i));
          }
        }
        std::string_view raw = body.substr(eq + 1);
        std::string_view value = trim(raw);
        const int col = lead + static_cast<int>(eq + 1) + static_cast<int>(value.data() - raw.data());
        if (value.empty()) throw ParseError("missing value for '" + std::string(key) + "'", line_no, col);
        if (!block.insert(std::string(key)).second) {
          throw ParseError("duplicate key '" + std::string(key) + "'", line_no, lead);
        }
        cfg.sections_[section][std::string(key)] = Entry{std::string(value), line_no, col};
      }
    }
    if (end == text.size()) break;
    pos = end + 1;
  }
  return cfg;
}

void RunConfig::set(const std::string& section, const std::string& key, std::string value) {
  sections_[section == "global" ? "" : section][key] = Entry{std::move(value), 0, 0};
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const RunConfig::Entry* RunConfig::find(const std::string& section, const std::string& key) const {
  for (const std::string& s : {section, std::string()}) {
    auto it = sections_.find(s);
    if (it == sections_.end()) continue;
    auto k = it->second.find(key);
    if (k != it->second.end()) return &k->second;
  }
  return nullptr;
}

void RunConfig::fail(const Entry& e, const std::string& key, const std::string& what) const {
  const std::string msg = "'" + key + "': " + what + " (got '" + e.value + "')";
  if (e.line > 0) throw ParseError(msg, e.line, e.column);
  throw ValidationError(msg);
}

std::string RunConfig::text(const std::string& section, const std::string& key, const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

long long RunConfig::integer(const std::string& section, const std::string& key, long long fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  long long v = 0;
  const auto [p, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (ec != std::errc() || p != e->value.data() + e->value.size()) fail(*e, key, "expected an integer");
  return v;
}

std::size_t RunConfig::budget(const std::string& section, const std::string& key, std::size_t fallback) const {
  const long long v = integer(section, key, static_cast<long long>(fallback));
  if (v <= 0) fail(*find(section, key), key, "must be positive");
  return static_cast<std::size_t>(v);
}

double RunConfig::number(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
  if (ec != std::errc() || p != e->value.data() + e->value.size() || !std::isfinite(v)) {
    fail(*e, key, "expected a number");
  }
  return v;
}

std::vector<double> RunConfig::numbers(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<double> out;
  for (const auto& [item, offset] : split_top(e->value, ',')) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || p != item.data() + item.size() || !std::isfinite(v)) {
      const std::string msg = "'" + key + "': expected a number, got '" + item + "'";
      if (e->line > 0) throw ParseError(msg, e->line, e->column + offset);
      throw ValidationError(msg);
    }
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> RunConfig::list(const std::string& section, const std::string& key,
                                         const std::vector<std::string>& fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  std::vector<std::string> out;
  for (auto& [item, offset] : split_top(e->value, ';')) {
    if (!item.empty()) out.push_back(std::move(item));
  }
  if (out.empty()) fail(*e, key, "empty list");
  return out;
}

std::uint64_t RunConfig::seed() const {
  const long long s = integer("", "seed", 7);
  if (s < 0) fail(*find("", "seed"), "seed", "must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

int RunConfig::workers() const {
  return static_cast<int>(std::min<std::size_t>(budget("", "workers", 1), 256));
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [section, keys] : sections_) {
    if (keys.empty()) continue;
    out += "[" + (section.empty() ? std::string("global") : section) + "]\n";
    for (const auto& [key, e] : keys) out += key + " = " + e.value + "\n";
  }
  return out;
}

// --- CSV --------------------------------------------------------------------

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string records_csv(const std::vector<ReportRecord>& records) {
  std::string out = "experiment,body,parameter,value,std_error,verdict,seed,budget\n";
  for (const auto& r : records) {
    out += csv_field(r.experiment) + "," + csv_field(r.body) + "," + csv_field(r.parameter) + "," + num(r.value) +
           "," + num(r.std_error) + "," + csv_field(r.verdict) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.budget) + "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- commands ---------------------------------------------------------------

namespace {

const std::string kDefaultSquare = "ballproduct(rho=[1,1,1], I=[[1],[],[2]], J=[[],[1],[2]])";
const std::string kDefaultLagrangian = "ballproduct(rho=[1,1], I=[[1,2],[]], J=[[],[1,2]])";

struct Context {
  const std::string& command;
  const RunConfig& cfg;
  std::uint64_t seed;
  int workers;
  RunResult result;
  bool failed = false;

  std::string sec() const { return command; }

  SupportBody parse_at(const std::string& text, const RunConfig::Entry* e, int offset) const {
    try {
      return parse_body(text);
    } catch (const ParseError& err) {
      if (!e || e->line == 0) throw;
      const int line = e->line + err.line() - 1;
      const int col = err.line() == 1 ? e->column + offset + err.column() - 1 : err.column();
      throw ParseError(err.message(), line, col);
    }
  }

  SupportBody body(const std::string& fallback, const std::string& key = "body") const {
    const RunConfig::Entry* e = cfg.find(sec(), key);
    return parse_at(e ? e->value : fallback, e, 0);
  }

  std::vector<SupportBody> bodies(const std::vector<std::string>& fallback, const std::string& key = "bodies") const {
    const RunConfig::Entry* e = cfg.find(sec(), key);
    std::vector<SupportBody> out;
    if (!e) {
      for (const auto& t : fallback) out.push_back(parse_body(t));
      return out;
    }
    for (const auto& [item, offset] : split_top(e->value, ';')) {
      if (!item.empty()) out.push_back(parse_at(item, e, offset));
    }
    if (out.empty()) throw ParseError("'" + key + "': empty list", e->line, e->column);
    return out;
  }

  BallProductSpec spec(const SupportBody& k) const {
    if (!k.ball_product()) throw ValidationError(command + " needs a ball product body, got " + k.label());
    return *k.ball_product();
  }

  SphereSampler sampler(int dim, std::size_t fallback = 200000) const {
    SphereSampler s;
    s.dim = dim;
    s.seed = seed;
    s.count = cfg.budget(sec(), "samples", fallback);
    const std::string anti = cfg.text(sec(), "antithetic", "true");
    if (anti != "true" && anti != "false") throw ValidationError("'antithetic' must be true or false, got " + anti);
    s.antithetic = anti == "true";
    s.workers = workers;
    s.validate();
    return s;
  }

  CapacityOptions capacity_options() const {
    CapacityOptions o;
    o.modes = static_cast<int>(cfg.budget(sec(), "modes", 8));
    o.starts = static_cast<int>(cfg.budget(sec(), "starts", 8));
    o.seed = seed;
    o.workers = workers;
    return o;
  }

  CapacityFn capacity_fn() const {
    const CapacityOptions o = capacity_options();
    return [o](const SupportBody& k) { return eh_capacity_estimate(k, o).estimate(); };
  }

  SteinerOptions steiner(std::size_t fallback_budget) const {
    SteinerOptions o;
    o.budget = cfg.budget(sec(), "budget", fallback_budget);
    o.T = cfg.number(sec(), "T", 2.0);
    if (!(o.T > 0.0)) throw ValidationError("'T' must be positive");
    o.seed = seed;
    o.workers = workers;
    return o;
  }

  void record(std::vector<ReportRecord>& rows, const std::string& body, const std::string& parameter, double value,
              double err, const std::string& verdict, std::size_t budget) {
    rows.push_back({command, body, parameter, value, err, verdict, seed, budget});
    if (verdict == "FAIL") failed = true;
  }

  void file(std::string name, std::string content) { result.files.push_back({std::move(name), std::move(content)}); }
  void line(const std::string& s) { result.summary += s + "\n"; }
};

std::string pm(double v, double e) { return short_num(v) + " +- " + short_num(e); }

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

void cmd_meanwidth(Context& c) {
  const SupportBody k = c.body("ball(2)");
  const SphereSampler s = c.sampler(k.dim());
  std::vector<ReportRecord> rows;
  const Estimate m = mean_width(k, s);
  c.record(rows, k.label(), "M (Monte Carlo)", m.value, m.std_error, "ESTIMATE", s.count);
  c.line("M(" + k.label() + ") = " + pm(m.value, m.std_error) + " (" + std::to_string(s.nodes()) + " nodes)");
  if (k.dim() == 2) {
    const double q = mean_width_2d(k);
    c.record(rows, k.label(), "M (quadrature)", q, 0.0, "ESTIMATE", 0);
    c.line("M(" + k.label() + ") by quadrature = " + num(q));
  }
  c.file("meanwidth.csv", records_csv(rows));
}

void cmd_quermass(Context& c) {
  const SupportBody k = c.body("cube(2)");
  const SteinerOptions so = c.steiner(40000);
  const SteinerFit fit = steiner_fit(k, so);
  std::string csv = "body,i,W_i,W_i_err,Wbar_i,Wbar_i_err,seed,budget\n";
  for (std::size_t i = 0; i < fit.W.size(); ++i) {
    const bool bar = i < fit.Wbar.size();
    csv += csv_field(k.label()) + "," + std::to_string(i) + "," + num(fit.W[i]) + "," + num(fit.W_err[i]) + "," +
           (bar ? num(fit.Wbar[i]) : "") + "," + (bar ? num(fit.Wbar_err[i]) : "") + "," + std::to_string(c.seed) +
           "," + std::to_string(so.budget) + "\n";
  }
  c.file("quermass.csv", csv);

  std::vector<ReportRecord> rows;
  c.record(rows, k.label(), "relative fit residual", fit.residual, 0.0, "ESTIMATE", so.budget);
  for (std::size_t i = 1; i < fit.Wbar.size(); ++i) {
    const double gap = fit.Wbar[i] - fit.Wbar[i - 1];
    const double err = std::hypot(fit.Wbar_err[i], fit.Wbar_err[i - 1]);
    c.record(rows, k.label(), "Wbar_" + std::to_string(i) + " - Wbar_" + std::to_string(i - 1), gap, err,
             verdict(gap >= -3.0 * err), so.budget);
  }
  const Estimate mq = meanwidth_from_quermass(fit);
  const Estimate mc = mean_width(k, c.sampler(k.dim()));
  const Estimate d = mq - mc;
  c.record(rows, k.label(), "2 W_{d-1}/kappa - M", d.value, d.std_error, verdict(agree(mq, mc)), so.budget);
  if (k.volume()) {
    const double rel = fit.W[0] / *k.volume() - 1.0;
    c.record(rows, k.label(), "W_0/Vol - 1", rel, fit.W_err[0] / *k.volume(), "ESTIMATE", so.budget);
  }
  c.file("quermass_report.csv", records_csv(rows));

  c.line("quermassintegrals of " + k.label() + " (budget " + std::to_string(so.budget) + ")");
  for (std::size_t i = 0; i < fit.W.size(); ++i) {
    std::string l = "  W_" + std::to_string(i) + " = " + pm(fit.W[i], fit.W_err[i]);
    if (i < fit.Wbar.size()) l += "   Wbar = " + pm(fit.Wbar[i], fit.Wbar_err[i]);
    c.line(l);
  }
  c.line("  2W_{d-1}/kappa = " + pm(mq.value, mq.std_error) + ", M (Monte Carlo) = " + pm(mc.value, mc.std_error));
}

void cmd_ffunctions(Context& c) {
  const SupportBody k = c.body("cube(1)");
  std::vector<double> def;
  for (int i = 1; i <= 10; ++i) def.push_back(0.2 * i);
  const std::vector<double> grid = c.cfg.numbers(c.sec(), "t_grid", def);
  FOptions fo;
  fo.steiner = c.steiner(100000);
  const FTable t = f_functions(k, c.capacity_fn(), grid, fo);
  const std::size_t budget = fo.steiner.budget;

  std::string csv = "t,F,F_err,Ftilde,Ftilde_err,capacity,capacity_err,seed,budget\n";
  std::vector<ReportRecord> rows;
  for (const auto& r : t.rows) {
    csv += num(r.t) + "," + num(r.F) + "," + num(r.F_err) + "," + num(r.Ftilde) + "," + num(r.Ftilde_err) + "," +
           num(r.capacity.value) + "," + num(r.capacity.std_error) + "," + std::to_string(c.seed) + "," +
           std::to_string(budget) + "\n";
    c.record(rows, k.label(), "Ftilde - F at t=" + short_num(r.t), r.Ftilde - r.F, std::hypot(r.F_err, r.Ftilde_err),
             verdict(r.ordered), budget);
  }
  c.file("ffunctions.csv", csv);
  const double rel = t.derivative_fd.value / t.derivative_closed.value - 1.0;
  c.record(rows, k.label(), "Ftilde'(0) closed form", t.derivative_closed.value, t.derivative_closed.std_error,
           "ESTIMATE", budget);
  c.record(rows, k.label(), "Ftilde'(0) finite difference", t.derivative_fd.value, t.derivative_fd.std_error,
           "ESTIMATE", budget);
  c.record(rows, k.label(), "finite difference / closed form - 1", rel, 0.0, verdict(std::abs(rel) <= 0.02), budget);
  c.file("ffunctions_report.csv", records_csv(rows));

  c.line("F and Ftilde for " + k.label() + ", c(K) = " + pm(t.capacity_k.value, t.capacity_k.std_error));
  for (const auto& r : t.rows) {
    c.line("  t=" + short_num(r.t) + "  F=" + pm(r.F, r.F_err) + "  Ftilde=" + pm(r.Ftilde, r.Ftilde_err) +
           (r.ordered ? "" : "  ORDER VIOLATED"));
  }
  c.line("  Ftilde'(0): closed " + pm(t.derivative_closed.value, t.derivative_closed.std_error) + ", difference " +
         pm(t.derivative_fd.value, t.derivative_fd.std_error));
}

void cmd_capacity(Context& c) {
  const SupportBody k = c.body("ball(2)");
  const CapacityOptions o = c.capacity_options();
  const CapacityResult r = eh_capacity_estimate(k, o);
  nlohmann::ordered_json j;
  j["body"] = k.label();
  j["raw"] = r.raw;
  j["raw_cost"] = r.raw_cost;
  j["normalized"] = r.normalized;
  j["error"] = r.error;
  j["modes"] = r.modes;
  j["starts"] = r.starts;
  j["converged"] = r.converged;
  j["start_costs"] = r.start_costs;
  j["seed"] = c.seed;
  c.file("capacity.json", j.dump(2) + "\n");
  c.line("c(" + k.label() + ") <= " + pm(r.normalized, r.error) + "  (raw " + num(r.raw) + ", " +
         std::to_string(r.modes) + " modes, " + std::to_string(r.starts) + " starts" +
         (r.converged ? "" : ", NOT CONVERGED") + ")");
}

nlohmann::ordered_json direction_json(const DirectionCheck& d) {
  nlohmann::ordered_json j;
  const auto mat = [](const Mat& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index k = 0; k < m.cols(); ++k) rows[i][k] = m(i, k);
    return rows;
  };
  j["C"] = mat(d.direction.C);
  j["D"] = mat(d.direction.D);
  j["first"] = d.first.value;
  j["first_err"] = d.first.std_error;
  j["second"] = d.second.value.value;
  j["second_err"] = d.second.value.std_error;
  j["pass"] = d.pass;
  return j;
}

void cmd_localmin(Context& c) {
  const SupportBody k = c.body(kDefaultLagrangian);
  const BallProductSpec spec = c.spec(k);
  LocalMinOptions lo;
  lo.directions = static_cast<int>(c.cfg.budget(c.sec(), "directions", 20));
  lo.step = c.cfg.number(c.sec(), "step", 0.05);
  const SphereSampler s = c.sampler(k.dim());
  const LocalMinVerdict v = verify_local_min(spec, s, lo);
  nlohmann::ordered_json j;
  j["body"] = v.label;
  j["cond"] = v.cond;
  j["verdict"] = verdict(v.pass);
  j["seed"] = c.seed;
  j["samples"] = s.count;
  j["directions"] = nlohmann::ordered_json::array();
  for (const auto& d : v.directions) j["directions"].push_back(direction_json(d));
  if (v.descent_witness) j["descent_witness"] = direction_json(*v.descent_witness);
  c.file("localmin.json", j.dump(2) + "\n");
  c.failed = c.failed || !v.pass;

  int passed = 0;
  for (const auto& d : v.directions) passed += d.pass ? 1 : 0;
  c.line(std::string(verdict(v.pass)) + " " + v.label + ": " + std::to_string(passed) + "/" +
         std::to_string(v.directions.size()) + " directions stationary with f'' > 0" +
         (v.cond ? "" : " (cond violated)"));
  if (v.descent_witness) {
    const auto& w = v.descent_witness->first;
    c.line("  descent direction: f'(0) = " + pm(w.value, w.std_error) + " (" +
           short_num(std::abs(w.value) / w.std_error) + " sigma)");
  }
}

void cmd_search(Context& c) {
  const SupportBody k = c.body("ellipsoid(2,1)");
  if (k.dim() % 2 != 0) throw ValidationError("search needs an even-dimensional body");
  const int n = k.dim() / 2;
  SearchOptions so;
  so.steps = static_cast<int>(c.cfg.budget(c.sec(), "steps", 60));
  so.initial_step = c.cfg.number(c.sec(), "initial_step", 0.25);
  const SphereSampler s = c.sampler(k.dim());
  const SearchResult r = local_search(k, SymmetricDirection{Mat::Zero(n, n), Mat::Zero(n, n)}, s, so);
  std::string csv = "step,M,M_err,seed,samples\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    csv += std::to_string(i) + "," + num(r.trace[i]) + "," + num(r.trace_error[i]) + "," + std::to_string(c.seed) +
           "," + std::to_string(s.count) + "\n";
  }
  c.file("search.csv", csv);
  c.line("local search on " + k.label() + ": M " + num(r.trace.front()) + " -> " + num(r.trace.back()) + " +- " +
         short_num(r.trace_error.back()) + " in " + std::to_string(r.trace.size() - 1) + " steps" +
         (r.stopped_early ? " (no further decrease)" : ""));
}

void cmd_green(Context& c) {
  const auto bodies = c.bodies({"ball(1)", "cube(1)", "ellipsoid(2,1)"});
  std::vector<ReportRecord> rows;
  for (const auto& k : bodies) {
    if (k.dim() != 2) throw ValidationError("green needs planar bodies, got " + k.label());
    const GreenResult g = green_test(k);
    c.record(rows, k.label(), "I_cos", g.i_cos, 0.0, "ESTIMATE", 0);
    c.record(rows, k.label(), "I_sin", g.i_sin, 0.0, "ESTIMATE", 0);
    c.record(rows, k.label(), "|(I_cos, I_sin)|", g.magnitude, 0.0, g.minimal ? "MINIMAL" : "NOT_MINIMAL", 0);
    c.line(k.label() + ": " + (g.minimal ? "MINIMAL" : "NOT_MINIMAL") + " (|I| = " + short_num(g.magnitude) + ")");
  }
  c.file("green.csv", records_csv(rows));
}

void cmd_squash(Context& c) {
  const std::vector<double> ps = c.cfg.numbers(c.sec(), "p_grid", {64, 32, 16, 8, 4, 3, 2});
  const double area = c.cfg.number(c.sec(), "area", 4.0);
  const SquashTable t = squash_family(ps, area);
  std::vector<ReportRecord> rows;
  for (const auto& r : t.rows) {
    c.record(rows, superellipse(r.p, r.radius).label(), "p=" + short_num(r.p), r.mean_width, 0.0, "ESTIMATE", 0);
    c.line("  p=" + short_num(r.p) + "  r=" + short_num(r.radius) + "  M=" + num(r.mean_width));
  }
  c.record(rows, "superellipse family", "monotone in p", t.monotone ? 1.0 : 0.0, 0.0, verdict(t.monotone), 0);
  c.line(std::string("monotone: ") + verdict(t.monotone));
  c.file("squash.csv", records_csv(rows));
}

void cmd_roundtest(Context& c) {
  const SupportBody k = c.body(kDefaultSquare);
  const BallProductSpec spec = c.spec(k);
  const std::vector<double> ps = c.cfg.numbers(c.sec(), "p_grid", {2, 4, 16, 64});
  const SphereSampler s = c.sampler(k.dim());
  std::vector<ReportRecord> rows;
  for (double p : ps) {
    const RoundedProductReport r = rounded_product_test(spec, p, s);
    const std::string ptag = "p=" + short_num(p);
    c.record(rows, r.label, "M before, " + ptag, r.before.value, r.before.std_error, "ESTIMATE", s.count);
    c.record(rows, r.label, "M after, " + ptag, r.after.value, r.after.std_error, "ESTIMATE", s.count);
    c.record(rows, r.label, "M after - M before, " + ptag, r.difference.value, r.difference.std_error,
             verdict(r.strict_decrease), s.count);
    c.record(rows, r.label, "difference - formula, " + ptag, r.difference.value - r.formula_difference,
             r.difference.std_error, verdict(r.formula_consistent), s.count);
    c.line(ptag + ": M " + pm(r.before.value, r.before.std_error) + " -> " + pm(r.after.value, r.after.std_error) +
           ", difference " + pm(r.difference.value, r.difference.std_error) + " (formula " +
           short_num(r.formula_difference) + ")" + (r.strict_decrease && r.formula_consistent ? "" : "  FAIL"));
  }
  c.file("roundtest.csv", records_csv(rows));
}

void cmd_probe(Context& c) {
  const SupportBody k = c.body(kDefaultLagrangian);
  const BallProductSpec spec = c.spec(k);
  ProbeOptions po;
  po.p = c.cfg.number(c.sec(), "p", 2.0);
  po.grid = static_cast<int>(c.cfg.budget(c.sec(), "grid", 33));
  const int index = static_cast<int>(c.cfg.integer(c.sec(), "index", 1));
  const SphereSampler s = c.sampler(k.dim(), 20000);
  const ProbeReport r = naive_extension_probe(spec, index, s, po);
  std::vector<ReportRecord> rows;
  c.record(rows, r.label, "projection error", r.projection_error, 0.0, "ESTIMATE", s.count);
  c.record(rows, r.label, "in-plane error", r.inplane_error, 0.0, "ESTIMATE", s.count);
  c.record(rows, r.label, "M original", r.original.value, r.original.std_error, "ESTIMATE", s.count);
  c.record(rows, r.label, "M image", r.image.value, r.image.std_error, "ESTIMATE", s.count);
  c.record(rows, r.label, "grid gap", r.grid_gap, 0.0, "ESTIMATE", s.count);
  c.record(rows, r.label, "M image - M original", r.difference.value, r.difference.std_error, r.conclusion, s.count);
  c.file("probe.csv", records_csv(rows));
  c.line(r.label + " index " + std::to_string(r.index) + ", p=" + short_num(r.p) + ": M image in [" +
         short_num(r.image_low) + ", " + short_num(r.image_high) + "], original in [" + short_num(r.original_low) +
         ", " + short_num(r.original_high) + "]: " + r.conclusion);
}

void cmd_flowcheck(Context& c) {
  const auto bodies = c.bodies({"polydisk(1,2)", kDefaultSquare});
  FlowOptions fo;
  fo.hamiltonians = static_cast<int>(c.cfg.budget(c.sec(), "hamiltonians", 5));
  fo.degree = static_cast<int>(c.cfg.budget(c.sec(), "degree", 4));
  fo.t = c.cfg.number(c.sec(), "t", 1e-4);
  std::vector<ReportRecord> rows;
  for (const auto& k : bodies) {
    const SphereSampler s = c.sampler(k.dim(), 20000);
    const FlowReport f = nonlinear_flow_check(k, s, fo);
    int zero = 0;
    for (const auto& r : f.rows) {
      zero += r.zero ? 1 : 0;
      const std::string v = f.toric ? verdict(r.zero) : (r.zero ? "ZERO" : "NONZERO");
      c.record(rows, f.label, "dM/dt, H" + std::to_string(r.hamiltonian) + " = " + r.description, r.derivative.value,
               r.derivative.std_error, v, s.count);
    }
    c.line(f.label + (f.toric ? " (toric): " : ": ") + std::to_string(zero) + "/" + std::to_string(f.rows.size()) +
           " derivatives within 3 sigma of 0" + (f.toric ? (f.pass ? "  PASS" : "  FAIL") : ""));
  }
  c.file("flowcheck.csv", records_csv(rows));
}

void cmd_scan(Context& c) {
  std::vector<std::string> def;
  for (const auto& e : standard_bodies()) def.push_back(e.grammar);
  const auto bodies = c.bodies(def);
  const SteinerOptions so = c.steiner(40000);
  const auto scan = quermass_capacity_scan(bodies, c.capacity_fn(), so);
  std::vector<ReportRecord> rows;
  for (const auto& r : scan) {
    const int d = r.fit.dim;
    c.record(rows, r.label, "c", r.capacity.value, r.capacity.std_error, "ESTIMATE", so.budget);
    std::string l = r.label + ": c = " + pm(r.capacity.value, r.capacity.std_error);
    for (std::size_t i = 0; i < r.wbar_sq.size(); ++i) {
      // c <= Wbar_{d-1}^2 is the only proved bound of the family
      const bool proved = static_cast<int>(i) == d - 1;
      const std::string v = proved ? verdict(r.capacity_below[i]) : (r.capacity_below[i] ? "HOLDS" : "VIOLATED");
      c.record(rows, r.label, "Wbar_" + std::to_string(i) + "^2", r.wbar_sq[i], r.wbar_sq_err[i], v, so.budget);
      if (!r.capacity_below[i]) l += "  c > Wbar_" + std::to_string(i) + "^2";
    }
    bool chain = true;
    for (std::size_t i = 0; i < r.chain_ok.size(); ++i) {
      chain = chain && r.chain_ok[i];
      c.record(rows, r.label, "chain Wbar_" + std::to_string(i) + " <= Wbar_" + std::to_string(i + 1),
               r.fit.Wbar[i + 1] - r.fit.Wbar[i], std::hypot(r.fit.Wbar_err[i], r.fit.Wbar_err[i + 1]),
               verdict(r.chain_ok[i]), so.budget);
    }
    c.line(l + (chain ? "" : "  CHAIN FAIL"));
  }
  c.file("scan.csv", records_csv(rows));
}

void cmd_verify_all(Context& c) {
  AcceptanceOptions o;
  o.seed = c.seed;
  o.workers = c.workers;
  std::vector<double> all;
  for (int i = 1; i <= kAcceptanceCriteria; ++i) all.push_back(i);
  std::vector<ReportRecord> rows;
  for (double idv : c.cfg.numbers(c.sec(), "criteria", all)) {
    const int id = static_cast<int>(idv);
    if (id != idv || id < 1 || id > kAcceptanceCriteria) {
      throw ValidationError("'criteria' entries must be integers in 1.." + std::to_string(kAcceptanceCriteria));
    }
    const CriterionResult r = acceptance_check(id, o);
    rows.insert(rows.end(), r.records.begin(), r.records.end());
    c.failed = c.failed || !r.pass;
    c.line(std::string(verdict(r.pass)) + " " + std::to_string(r.id) + " " + r.title);
  }
  c.file("verify.csv", records_csv(rows));
}

using Command = void (*)(Context&);

const std::vector<std::pair<std::string, Command>>& table() {
  static const std::vector<std::pair<std::string, Command>> t{
      {"meanwidth", cmd_meanwidth}, {"quermass", cmd_quermass}, {"ffunctions", cmd_ffunctions},
      {"capacity", cmd_capacity},   {"localmin", cmd_localmin}, {"search", cmd_search},
      {"green", cmd_green},         {"squash", cmd_squash},     {"roundtest", cmd_roundtest},
      {"probe", cmd_probe},         {"flowcheck", cmd_flowcheck}, {"scan", cmd_scan},
      {"verify-all", cmd_verify_all},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& run_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : table()) n.push_back(name);
    return n;
  }();
  return names;
}

RunResult run(const std::string& command, const RunConfig& config) {
  Command fn = nullptr;
  for (const auto& [name, f] : table()) {
    if (name == command) fn = f;
  }
  if (!fn) throw ValidationError("unknown command '" + command + "'");

  Context c{command, config, config.seed(), config.workers(), {}};
  const auto t0 = std::chrono::steady_clock::now();
  fn(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::vector<ReportFile> plots;
  for (const auto& f : c.result.files) {
    if (f.name == "ffunctions.csv" || f.name == "squash.csv" || f.name == "search.csv") {
      for (auto& p : emit_plotdata(f)) plots.push_back(std::move(p));
    }
  }
  for (auto& p : plots) c.result.files.push_back(std::move(p));
  c.result.files.push_back({"config.txt", "# command: " + command + "\n# seed: " + std::to_string(c.seed) +
                                               ", workers: " + std::to_string(c.workers) + "\n" + config.canonical()});
  c.result.files.push_back({"timing.csv", "experiment,seconds\n" + command + "," + num(seconds) + "\n"});
  c.result.exit_code = c.failed ? 1 : 0;
  return std::move(c.result);
}

std::vector<ReportFile> emit_plotdata(const ReportFile& report) {
  const auto rows = parse_csv(report.content);
  if (rows.empty()) throw ValidationError("report " + report.name + " is empty");
  const auto& head = rows.front();
  const auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < head.size(); ++i) {
      if (head[i] == name) return i;
    }
    throw ValidationError("report " + report.name + " has no column '" + name + "'");
  };
  const auto series = [&](const std::string& name, const std::string& xname, std::size_t x, const std::string& yname,
                          std::size_t y) {
    std::string out = xname + "," + yname + "\n";
    for (std::size_t r = 1; r < rows.size(); ++r) out += rows[r].at(x) + "," + rows[r].at(y) + "\n";
    return ReportFile{name, out};
  };

  if (report.name == "ffunctions.csv") {
    const std::size_t t = column("t");
    return {series("ffunctions_F.csv", "t", t, "F", column("F")),
            series("ffunctions_Ftilde.csv", "t", t, "Ftilde", column("Ftilde"))};
  }
  if (report.name == "search.csv") return {series("search_series.csv", "step", column("step"), "M", column("M"))};
  if (report.name == "squash.csv") {
    const std::size_t param = column("parameter");
    const std::size_t value = column("value");
    std::string out = "p,M\n";
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const std::string& p = rows[r].at(param);
      if (p.rfind("p=", 0) == 0) out += p.substr(2) + "," + rows[r].at(value) + "\n";
    }
    return {{"squash_series.csv", out}};
  }
  throw ValidationError("report " + report.name + " carries no plot series");
}

}  // namespace symcap
