#ifndef SYMCAP_SYMCAP_H
#define SYMCAP_SYMCAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SYMCAP_API __declspec(dllexport)
#else
#define SYMCAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum symcap_status {
  SYMCAP_OK = 0,
  SYMCAP_E_PARSE = 1,             /* body grammar or config text */
  SYMCAP_E_INVALID_ARGUMENT = 2,  /* bad parameters, null pointers, dimension mismatch */
  SYMCAP_E_NUMERIC = 3,           /* a numerical procedure could not deliver a result */
  SYMCAP_E_IO = 4,
  SYMCAP_E_INTERNAL = 5
} symcap_status;

typedef struct symcap_body symcap_body;
typedef struct symcap_report symcap_report;

SYMCAP_API const char* symcap_version(void);

/* Message of the last failed call on this thread ("" after success).
   Parse errors carry 1-based line and column; both are 0 otherwise. */
SYMCAP_API const char* symcap_last_error(void);
SYMCAP_API int symcap_last_error_line(void);
SYMCAP_API int symcap_last_error_column(void);

/* Bodies. */
SYMCAP_API symcap_status symcap_body_parse(const char* text, symcap_body** out);
SYMCAP_API void symcap_body_free(symcap_body* body);
SYMCAP_API int symcap_body_dim(const symcap_body* body);
SYMCAP_API const char* symcap_body_label(const symcap_body* body);
/* h_K(u) for u of length dim. */
SYMCAP_API symcap_status symcap_body_support(const symcap_body* body, const double* u, size_t len, double* out);

/* Mean width by antithetic Monte Carlo on the sphere. */
SYMCAP_API symcap_status symcap_mean_width(const symcap_body* body, uint64_t seed, size_t samples, int workers,
                                           double* value, double* std_error);

/* Normalized capacity estimate (the unit ball gives 1) and its error bar. */
SYMCAP_API symcap_status symcap_capacity(const symcap_body* body, int modes, int starts, uint64_t seed, int workers,
                                         double* normalized, double* error, int* converged);

/* Runs one experiment subcommand on config text (see README for keys). */
SYMCAP_API symcap_status symcap_run(const char* command, const char* config_text, symcap_report** out);
/* Plot series derived from a report file given by name and content. */
SYMCAP_API symcap_status symcap_plotdata(const char* report_name, const char* report_content, symcap_report** out);

SYMCAP_API size_t symcap_report_file_count(const symcap_report* report);
SYMCAP_API const char* symcap_report_file_name(const symcap_report* report, size_t index);
SYMCAP_API const char* symcap_report_file_content(const symcap_report* report, size_t index);
SYMCAP_API const char* symcap_report_summary(const symcap_report* report);
/* 0 iff every PASS/FAIL check passed. */
SYMCAP_API int symcap_report_exit_code(const symcap_report* report);
SYMCAP_API void symcap_report_free(symcap_report* report);

/* Subcommand names, index in [0, count). */
SYMCAP_API size_t symcap_command_count(void);
SYMCAP_API const char* symcap_command_name(size_t index);

#ifdef __cplusplus
}
#endif

#endif
