#include "symcap/symcap.h"

#include "body_grammar.hpp"
#include "capacity.hpp"
#include "runner.hpp"
#include "sphere.hpp"

#include <exception>
#include <new>
#include <string>

struct symcap_body {
  symcap::SupportBody body;
};

struct symcap_report {
  symcap::RunResult result;
};

namespace {

thread_local std::string g_error;
thread_local int g_line = 0;
thread_local int g_column = 0;

symcap_status set_error(symcap_status s, const std::string& what, int line = 0, int column = 0) {
  g_error = what;
  g_line = line;
  g_column = column;
  return s;
}

template <class F>
symcap_status guarded(F&& f) {
  try {
    g_error.clear();
    g_line = g_column = 0;
    f();
    return SYMCAP_OK;
  } catch (const symcap::ParseError& e) {
    return set_error(SYMCAP_E_PARSE, e.what(), e.line(), e.column());
  } catch (const symcap::ValidationError& e) {
    return set_error(SYMCAP_E_INVALID_ARGUMENT, e.what());
  } catch (const symcap::NumericalError& e) {
    return set_error(SYMCAP_E_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SYMCAP_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SYMCAP_E_INTERNAL, e.what());
  } catch (...) {
    return set_error(SYMCAP_E_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw symcap::ValidationError(std::string(name) + " is null");
}

}  // namespace

extern "C" {

const char* symcap_version(void) { return "0.1.0"; }

const char* symcap_last_error(void) { return g_error.c_str(); }
int symcap_last_error_line(void) { return g_line; }
int symcap_last_error_column(void) { return g_column; }

symcap_status symcap_body_parse(const char* text, symcap_body** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = nullptr;
    *out = new symcap_body{symcap::parse_body(text)};
  });
}

void symcap_body_free(symcap_body* body) { delete body; }

int symcap_body_dim(const symcap_body* body) { return body ? body->body.dim() : 0; }

const char* symcap_body_label(const symcap_body* body) { return body ? body->body.label().c_str() : ""; }

symcap_status symcap_body_support(const symcap_body* body, const double* u, size_t len, double* out) {
  return guarded([&] {
    require(body, "body");
    require(u, "u");
    require(out, "out");
    if (len != static_cast<size_t>(body->body.dim())) {
      throw symcap::ValidationError("direction has length " + std::to_string(len) + ", body dimension is " +
                                    std::to_string(body->body.dim()));
    }
    *out = body->body.support(Eigen::Map<const symcap::Vec>(u, static_cast<Eigen::Index>(len)));
  });
}

symcap_status symcap_mean_width(const symcap_body* body, uint64_t seed, size_t samples, int workers, double* value,
                                double* std_error) {
  return guarded([&] {
    require(body, "body");
    require(value, "value");
    symcap::SphereSampler s;
    s.dim = body->body.dim();
    s.seed = seed;
    s.count = samples;
    s.workers = workers;
    const symcap::Estimate m = symcap::mean_width(body->body, s);
    *value = m.value;
    if (std_error) *std_error = m.std_error;
  });
}

symcap_status symcap_capacity(const symcap_body* body, int modes, int starts, uint64_t seed, int workers,
                              double* normalized, double* error, int* converged) {
  return guarded([&] {
    require(body, "body");
    require(normalized, "normalized");
    symcap::CapacityOptions o;
    o.modes = modes;
    o.starts = starts;
    o.seed = seed;
    o.workers = workers;
    const symcap::CapacityResult r = symcap::eh_capacity_estimate(body->body, o);
    *normalized = r.normalized;
    if (error) *error = r.error;
    if (converged) *converged = r.converged ? 1 : 0;
  });
}

symcap_status symcap_run(const char* command, const char* config_text, symcap_report** out) {
  return guarded([&] {
    require(command, "command");
    require(out, "out");
    *out = nullptr;
    const symcap::RunConfig cfg = symcap::RunConfig::parse(config_text ? config_text : "");
    *out = new symcap_report{symcap::run(command, cfg)};
  });
}

symcap_status symcap_plotdata(const char* report_name, const char* report_content, symcap_report** out) {
  return guarded([&] {
    require(report_name, "report_name");
    require(report_content, "report_content");
    require(out, "out");
    *out = nullptr;
    symcap::RunResult r;
    r.files = symcap::emit_plotdata({report_name, report_content});
    *out = new symcap_report{std::move(r)};
  });
}

size_t symcap_report_file_count(const symcap_report* report) { return report ? report->result.files.size() : 0; }

const char* symcap_report_file_name(const symcap_report* report, size_t index) {
  if (!report || index >= report->result.files.size()) return nullptr;
  return report->result.files[index].name.c_str();
}

const char* symcap_report_file_content(const symcap_report* report, size_t index) {
  if (!report || index >= report->result.files.size()) return nullptr;
  return report->result.files[index].content.c_str();
}

const char* symcap_report_summary(const symcap_report* report) {
  return report ? report->result.summary.c_str() : "";
}

int symcap_report_exit_code(const symcap_report* report) { return report ? report->result.exit_code : 1; }

void symcap_report_free(symcap_report* report) { delete report; }

size_t symcap_command_count(void) { return symcap::run_commands().size(); }

const char* symcap_command_name(size_t index) {
  const auto& c = symcap::run_commands();
  return index < c.size() ? c[index].c_str() : nullptr;
}

}  // extern "C"
