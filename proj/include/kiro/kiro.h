/*
 * Copyright 2026 The KIRO Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface of the knowledge-integrity risk observatory.
 *
 * Every object is an opaque handle created and destroyed by this library.
 * Functions return a kiro_status; on failure kiro_last_error() returns a
 * human-readable message for the calling thread, valid until the next call
 * made from that thread. Strings returned through char** out-parameters are
 * owned by the caller and released with kiro_string_free().
 */

#ifndef KIRO_KIRO_H
#define KIRO_KIRO_H

#include <stddef.h>
#include <stdint.h>

#if defined(KIRO_BUILDING_LIBRARY)
#define KIRO_API __attribute__((visibility("default")))
#else
#define KIRO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kiro_status {
  KIRO_OK = 0,
  KIRO_E_INVALID_ARGUMENT = 1,
  KIRO_E_EMPTY_DISTRIBUTION = 2,
  KIRO_E_EMPTY_COHORT = 3,
  KIRO_E_DEGENERATE_FIT = 4,
  KIRO_E_INSUFFICIENT_DATA = 5,
  KIRO_E_KIND_MISMATCH = 6,
  KIRO_E_UNKNOWN_INDICATOR = 7,
  KIRO_E_NETWORK = 8,
  KIRO_E_PARSE = 9,
  KIRO_E_UNKNOWN_WIKI = 10,
  KIRO_E_NO_DATA = 11,
  KIRO_E_HARD_FAILURE = 12,
  KIRO_E_SCHEMA_VERSION_MISMATCH = 13,
  KIRO_E_FILE_NOT_FOUND = 14,
  KIRO_E_CONFLICT = 15,
  KIRO_E_SCHEMA_VIOLATION = 16,
  KIRO_E_INTEGRITY = 17,
  KIRO_E_IO = 18,
  KIRO_E_BIND = 19,
  KIRO_E_STORE_UNAVAILABLE = 20,
  KIRO_E_CONFIG = 21,
  KIRO_E_INTERNAL = 99
} kiro_status;

typedef enum kiro_ingest_mode {
  KIRO_INGEST_LIVE = 0,     /* Wikimedia APIs over HTTPS */
  KIRO_INGEST_REPLAY = 1,   /* recorded payload corpus, virtual clock */
  KIRO_INGEST_FIXTURES = 2  /* checked-in snapshot documents, no fetching */
} kiro_ingest_mode;

typedef struct kiro_observatory kiro_observatory;
typedef struct kiro_ingest_report kiro_ingest_report;
typedef struct kiro_server kiro_server;

KIRO_API const char* kiro_version(void);
/* Stable snake_case name of a status, e.g. "unknown_wiki". */
KIRO_API const char* kiro_status_string(kiro_status status);
KIRO_API const char* kiro_last_error(void);
KIRO_API void kiro_string_free(char* s);

/* config_path may be NULL (built-in defaults); overrides_json may be NULL or
 * a JSON object of config keys applied after the file and the environment. */
KIRO_API kiro_status kiro_open(const char* config_path, const char* overrides_json, kiro_observatory** out);
KIRO_API void kiro_close(kiro_observatory* obs);

/* Effective configuration as canonical JSON. */
KIRO_API kiro_status kiro_config_json(const kiro_observatory* obs, char** out);
KIRO_API kiro_status kiro_taxonomy_json(char** out);
KIRO_API kiro_status kiro_registry_json(const kiro_observatory* obs, char** out);

/* wikis_csv: comma-separated slugs, or NULL/"" for the configured cohort.
 * source_dir: fixture or corpus directory (ignored in live mode). A report is
 * produced whenever the call gets as far as attempting wikis; per-wiki
 * failures do not change the returned status. */
KIRO_API kiro_status kiro_ingest(kiro_observatory* obs, const char* wikis_csv, const char* window,
                                 kiro_ingest_mode mode, const char* source_dir, kiro_ingest_report** out);
KIRO_API size_t kiro_ingest_report_count(const kiro_ingest_report* report);
/* 1 when every wiki was stored. */
KIRO_API int kiro_ingest_report_ok(const kiro_ingest_report* report);
/* Borrowed strings, valid for the lifetime of the report. */
KIRO_API kiro_status kiro_ingest_report_entry(const kiro_ingest_report* report, size_t index, const char** wiki,
                                              kiro_status* status, const char** message, int* created);
/* Full report (entries, warnings, request counts) as canonical JSON. */
KIRO_API kiro_status kiro_ingest_report_json(const kiro_ingest_report* report, char** out);
KIRO_API void kiro_ingest_report_free(kiro_ingest_report* report);

/* Computes and stores indicators, the risk matrix and the scatter for a
 * window. summary_json (optional) receives counts of what was written. */
KIRO_API kiro_status kiro_compute(kiro_observatory* obs, const char* window, char** summary_json);

/* min_articles 0 means the configured default. out_dir NULL skips writing
 * scatter.csv and fit.json; fit_json (optional) receives the fit document. */
KIRO_API kiro_status kiro_scatter(kiro_observatory* obs, const char* window, uint64_t min_articles,
                                  const char* out_dir, char** fit_json);

KIRO_API kiro_status kiro_export(kiro_observatory* obs, const char* window, const char* out_dir,
                                 size_t* files_written);

/* Starts the read-only HTTP API. host NULL and port < 0 take the configured
 * values; port 0 picks a free port. The server must be freed before the
 * observatory is closed. */
KIRO_API kiro_status kiro_server_start(kiro_observatory* obs, const char* host, int port, kiro_server** out);
KIRO_API int kiro_server_port(const kiro_server* server);
/* Thread-safe; not async-signal-safe (call it from a signal-waiting thread). */
KIRO_API void kiro_server_stop(kiro_server* server);
KIRO_API void kiro_server_wait(kiro_server* server);
KIRO_API void kiro_server_free(kiro_server* server);

#ifdef __cplusplus
}
#endif

#endif /* KIRO_KIRO_H */
