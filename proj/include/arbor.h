/* arbor: finite approximation engine for tree systems of metric compacta.
 *
 * C interface over the core library: opaque handles, integer status codes,
 * JSON strings for structured data. All returned strings belong to the
 * library until freed with arbor_string_free; reports and handles have their
 * own destructors. Thread safety: handles are immutable after creation; the
 * error message slot is thread-local.
 */
#ifndef ARBOR_H
#define ARBOR_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arbor_status {
  ARBOR_OK = 0,
  ARBOR_ERR_CHECK = 1,    /* computation ran, checks failed */
  ARBOR_ERR_USAGE = 2,    /* bad arguments / unknown command */
  ARBOR_ERR_IO = 3,       /* file or parse error */
  ARBOR_ERR_INTERNAL = 4  /* invariant violation inside the engine */
} arbor_status;

typedef struct arbor_system arbor_system;
typedef struct arbor_realization arbor_realization;
typedef struct arbor_report arbor_report;

/* Last error message for the calling thread (empty string when none). */
const char* arbor_last_error(void);
const char* arbor_version(void);

void arbor_string_free(char* s);

/* ---- systems ---------------------------------------------------------- */

arbor_status arbor_system_from_json(const char* json_text, arbor_system** out);
arbor_status arbor_system_load(const char* path, arbor_system** out);
arbor_status arbor_system_save(const arbor_system* sys, const char* path);
arbor_status arbor_system_to_json(const arbor_system* sys, char** json_out);
void arbor_system_free(arbor_system* sys);

/* Generator spec: {"kind": "punctured-circle"|"punctured-interval"|
 * "reflection-disk"|"labeled", "depth": n, "seed": s, "k": k}. */
arbor_status arbor_system_generate(const char* spec_json, arbor_system** out);

size_t arbor_system_vertex_count(const arbor_system* sys);

/* ---- reports ----------------------------------------------------------- */

const char* arbor_report_json(const arbor_report* rep);
int arbor_report_ok(const arbor_report* rep);
void arbor_report_free(arbor_report* rep);

/* TS1-TS4 validation. Returns ARBOR_OK with the report even when the system
 * is invalid; the report carries the violations. */
arbor_status arbor_system_validate(const arbor_system* sys, arbor_report** out);

/* ---- realization ------------------------------------------------------- */

/* options: {"ratio": r} with r >= 1 meaning unit weights (default: unit for
 * generated/truncated systems). */
arbor_status arbor_realize(const arbor_system* sys, const char* options_json,
                           arbor_realization** out);
size_t arbor_realization_size(const arbor_realization* r);
double arbor_realization_error(const arbor_realization* r);
double arbor_realization_distance(const arbor_realization* r, size_t i, size_t j);
/* Writes <stem>.json manifest, <stem>.f64 matrix and optionally <stem>.obj. */
arbor_status arbor_realization_export(const arbor_realization* r, const char* dir,
                                      const char* stem, const char* format);
void arbor_realization_free(arbor_realization* r);

/* target: "circle256" or a path to a compactum JSON. */
arbor_status arbor_compare(const arbor_realization* r, const char* target,
                           arbor_report** out);

/* ---- pipelines --------------------------------------------------------- */

/* Full subcommand runner: config JSON mirrors the CLI flags
 * {"command","input","aux","output","kind","against","format","seed","depth",
 *  "k","ratio","tolerance"}. Returns the exit status the CLI should use; the
 * report (always produced) is written to <output>/<command>-report.json and
 * returned. */
arbor_status arbor_run(const char* config_json, arbor_report** out);

#ifdef __cplusplus
}
#endif

#endif /* ARBOR_H */
