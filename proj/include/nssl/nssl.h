#ifndef NSSL_NSSL_H
#define NSSL_NSSL_H

#include <stddef.h>

#if defined(NSSL_BUILDING)
#define NSSL_API __attribute__((visibility("default")))
#else
#define NSSL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values match the CLI exit codes; NSSL_INTERNAL covers
   allocation failures and other non-numerical faults. */
typedef enum nssl_status {
  NSSL_OK = 0,
  NSSL_MONITOR_FAILURE = 1,
  NSSL_CONFIG_ERROR = 2,
  NSSL_NUMERICAL_ERROR = 3,
  NSSL_INTERNAL = 4
} nssl_status;

typedef enum nssl_verdict {
  NSSL_PASS = 0,
  NSSL_FAIL = 1,
  NSSL_REPORT_ONLY = 2
} nssl_verdict;

typedef struct nssl_run nssl_run;
typedef struct nssl_fit_set nssl_fit_set;
typedef struct nssl_snapshot nssl_snapshot;

typedef struct nssl_monitor {
  const char* id;
  const char* anchor;
  const char* note;
  double lhs;
  double rhs;
  double ratio;
  int verdict;     /* nssl_verdict */
  int lower_bound; /* 1 when the monitor passes iff lhs >= rhs */
} nssl_monitor;

typedef struct nssl_fit {
  const char* name;
  double slope;
  double intercept;
  double r2;
  double t0;
  double t1;
  int samples;
} nssl_fit;

typedef struct nssl_snapshot_info {
  unsigned version;
  int ndim;
  int dims[3];
  double lengths[3];
  int ncomp;
  size_t points; /* samples per component */
} nssl_snapshot_info;

NSSL_API const char* nssl_version(void);

/* Message of the last failing call on this thread; "" after success. */
NSSL_API const char* nssl_last_error(void);

NSSL_API size_t nssl_experiment_kind_count(void);
NSSL_API const char* nssl_experiment_kind(size_t i);
NSSL_API size_t nssl_generator_count(void);
NSSL_API const char* nssl_generator(size_t i);

/* Runs a config file. out_dir may be NULL to use output.dir from the file.
   On NSSL_OK or NSSL_MONITOR_FAILURE *run receives the result. */
NSSL_API int nssl_run_file(const char* path, const char* out_dir, nssl_run** run);
/* Same, from config text; source names the text in error messages. */
NSSL_API int nssl_run_text(const char* text, const char* source, const char* out_dir,
                           nssl_run** run);
NSSL_API void nssl_run_free(nssl_run* run);

NSSL_API int nssl_run_exit_code(const nssl_run* run);
NSSL_API const char* nssl_run_kind(const nssl_run* run);
NSSL_API const char* nssl_run_config_hash(const nssl_run* run);
NSSL_API const char* nssl_run_manifest_json(const nssl_run* run);
NSSL_API double nssl_run_wall_clock(const nssl_run* run);
NSSL_API size_t nssl_run_monitor_count(const nssl_run* run);
/* Strings stay valid until nssl_run_free. */
NSSL_API int nssl_run_monitor(const nssl_run* run, size_t i, nssl_monitor* out);

/* Report text for a run directory; release with nssl_string_free. */
NSSL_API int nssl_report(const char* dir, char** text);
/* Number of artifacts whose checksum no longer matches the manifest. */
NSSL_API int nssl_verify(const char* dir, size_t* mismatches);
NSSL_API void nssl_string_free(char* s);

/* Log-log fits of series in a CSV over [t0, t1]; name NULL fits every
   positive series. */
NSSL_API int nssl_fit_csv(const char* csv, double t0, double t1, const char* name,
                          nssl_fit_set** fits);
NSSL_API size_t nssl_fit_count(const nssl_fit_set* fits);
NSSL_API int nssl_fit_get(const nssl_fit_set* fits, size_t i, nssl_fit* out);
NSSL_API void nssl_fit_free(nssl_fit_set* fits);

NSSL_API int nssl_snapshot_open(const char* path, nssl_snapshot** snap);
NSSL_API int nssl_snapshot_get_info(const nssl_snapshot* snap, nssl_snapshot_info* out);
/* Samples of one component, row-major, valid until nssl_snapshot_free. */
NSSL_API int nssl_snapshot_component(const nssl_snapshot* snap, int c, const double** data);
NSSL_API void nssl_snapshot_free(nssl_snapshot* snap);

#ifdef __cplusplus
}
#endif

#endif
