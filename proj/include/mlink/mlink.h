/* C interface to the mlink engine.
 *
 * Every fallible call returns an mlink_status; on failure the message is
 * available from mlink_last_error() on the same thread. Strings returned
 * through `char**` out-parameters are owned by the caller and released
 * with mlink_free(). Handles are released with their *_free function. */
#ifndef MLINK_H
#define MLINK_H

#include <stddef.h>

#if defined(_WIN32)
#define MLINK_API __declspec(dllexport)
#else
#define MLINK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct mlink_config mlink_config;
typedef struct mlink_corpus mlink_corpus;
typedef struct mlink_diagram mlink_diagram;
typedef struct mlink_session mlink_session;
typedef struct mlink_server mlink_server;

typedef enum mlink_status {
  MLINK_OK = 0,
  MLINK_E_INVALID_ARGUMENT,
  MLINK_E_IO,
  MLINK_E_EMPTY_HEADING,
  MLINK_E_EMPTY_CORPUS,
  MLINK_E_DOMAIN,
  MLINK_E_NO_CLUSTERS,
  MLINK_E_CDR_UNDEFINED,
  MLINK_E_UNKNOWN_FORMAT,
  MLINK_E_UNKNOWN_TERM,
  MLINK_E_INVALID_INTERMEDIATE,
  MLINK_E_UNKNOWN_INTERMEDIATE,
  MLINK_E_SOURCE_TERM_ABSENT,
  MLINK_E_CORPUS_MISMATCH,
  MLINK_E_CORRUPT_SESSION,
  MLINK_E_NETWORK,
  MLINK_E_SERVICE,
  MLINK_E_QUOTA,
  MLINK_E_INTERNAL
} mlink_status;

/* Output selector for rankings. */
typedef enum mlink_listing { MLINK_LISTING_TEXT = 0, MLINK_LISTING_JSON = 1 } mlink_listing;

MLINK_API const char* mlink_status_name(mlink_status status);
/* 0 ok, 1 usage, 2 I/O, 3 empty corpus, 4 unknown term, 5 workflow order. */
MLINK_API int mlink_exit_code(mlink_status status);
MLINK_API const char* mlink_last_error(void);
MLINK_API void mlink_free(void* p);

/* ---- configuration ----------------------------------------------------
 * Keys: threshold, min_doc_freq, min_cluster, max_cluster, attachment
 * (max|sum), band_low, band_high, strict_titles (true|false), stoplist and
 * highlight (newline-separated descriptors). Values are range-checked on
 * set; cross-field checks run in mlink_config_validate. */
MLINK_API mlink_status mlink_config_new(mlink_config** out);
MLINK_API void mlink_config_free(mlink_config* config);
MLINK_API mlink_status mlink_config_set(mlink_config* config, const char* key, const char* value);
/* One descriptor per line; '#' starts a comment line. */
MLINK_API mlink_status mlink_config_load_stoplist(mlink_config* config, const char* path);
MLINK_API mlink_status mlink_config_validate(const mlink_config* config);

/* ---- corpora ---------------------------------------------------------- */
/* Reads MEDLINE files (gzip detected by magic bytes). A NULL label uses the
 * first file's name. */
MLINK_API mlink_status mlink_corpus_load_files(const char* const* paths, size_t count,
                                               const char* label, mlink_corpus** out);
MLINK_API mlink_status mlink_corpus_load_buffer(const char* data, size_t size, const char* label,
                                                mlink_corpus** out);
MLINK_API void mlink_corpus_free(mlink_corpus* corpus);
MLINK_API const char* mlink_corpus_id(const mlink_corpus* corpus);
MLINK_API size_t mlink_corpus_document_count(const mlink_corpus* corpus);
/* Skipped-input counters from parsing; any pointer may be NULL. */
MLINK_API void mlink_corpus_report(const mlink_corpus* corpus, size_t* records_without_pmid,
                                   size_t* malformed_lines, size_t* empty_headings);

/* ---- diagrams --------------------------------------------------------- */
MLINK_API mlink_status mlink_analyze(const mlink_corpus* corpus, const mlink_config* config,
                                     mlink_diagram** out);
MLINK_API mlink_status mlink_diagram_import(const char* json, size_t size, mlink_diagram** out);
MLINK_API mlink_status mlink_diagram_load(const char* path, mlink_diagram** out);
MLINK_API void mlink_diagram_free(mlink_diagram* diagram);
/* format: table, json or svg. config may be NULL; its highlight set marks
 * clusters in the svg and json outputs. */
MLINK_API mlink_status mlink_diagram_export(const mlink_diagram* diagram, const char* format,
                                            const mlink_config* config, char** out);
MLINK_API mlink_status mlink_diagram_cluster_table(const mlink_diagram* diagram, char** out);
/* "documents=<n> terms=<v> clusters=<k>" */
MLINK_API mlink_status mlink_diagram_summary(const mlink_diagram* diagram, char** out);
MLINK_API size_t mlink_diagram_cluster_count(const mlink_diagram* diagram);

/* Ranks the other clusters of the diagram as intermediates for the cluster
 * holding `source_descriptor`. */
MLINK_API mlink_status mlink_suggest(const mlink_diagram* diagram, const char* source_descriptor,
                                     const mlink_config* config, mlink_listing listing,
                                     char** out);

/* ---- discovery sessions ----------------------------------------------- */
MLINK_API mlink_status mlink_session_create(const mlink_corpus* source, const char* descriptor,
                                            const mlink_config* config, mlink_session** out);
MLINK_API mlink_status mlink_session_load(const char* path, mlink_session** out);
/* Writes a temp file next to `path` and renames it into place. */
MLINK_API mlink_status mlink_session_save(const mlink_session* session, const char* path);
MLINK_API void mlink_session_free(mlink_session* session);
MLINK_API const char* mlink_session_id(const mlink_session* session);
MLINK_API mlink_status mlink_session_mark(mlink_session* session, const char* descriptor);
MLINK_API mlink_status mlink_session_attach(mlink_session* session, const char* descriptor,
                                            const mlink_corpus* corpus);
/* `source` must be the corpus the session was created from. */
MLINK_API mlink_status mlink_session_targets(mlink_session* session, const char* intermediate,
                                             const mlink_corpus* source, mlink_listing listing,
                                             char** out);
MLINK_API mlink_status mlink_session_audit(const mlink_session* session, char** out);
MLINK_API mlink_status mlink_session_json(const mlink_session* session, char** out);

/* ---- retrieval -------------------------------------------------------- */
typedef struct mlink_fetch_options {
  const char* query;
  int date_from;              /* publication year; 0 leaves it open */
  int date_to;
  size_t batch_size;          /* 0 selects 200 */
  long polite_delay_ms;       /* negative selects 350 */
  const char* config_path;    /* optional E-utilities config file */
  const char* fixture_dir;    /* replay recorded responses instead of the network */
  const char* record_dir;     /* record live responses here */
} mlink_fetch_options;

MLINK_API void mlink_fetch_options_init(mlink_fetch_options* options);
/* Runs esearch then efetch. `out_medline` receives the concatenated MEDLINE
 * text; `out_warnings` (may be NULL) newline-separated notices;
 * `out_requests` (may be NULL) the number of HTTP requests, also set on
 * failure. */
MLINK_API mlink_status mlink_fetch(const mlink_fetch_options* options, char** out_medline,
                                   char** out_warnings, size_t* out_requests);

/* ---- HTTP service ----------------------------------------------------- */
/* config_path may be NULL; environment overrides apply either way. */
MLINK_API mlink_status mlink_server_create(const char* config_path, mlink_server** out);
/* Keys: host, port, store, body_limit. Only before mlink_server_bind. */
MLINK_API mlink_status mlink_server_set(mlink_server* server, const char* key, const char* value);
MLINK_API mlink_status mlink_server_bind(mlink_server* server, int* out_port);
/* Blocks until mlink_server_stop is called from another thread. */
MLINK_API mlink_status mlink_server_run(mlink_server* server);
MLINK_API void mlink_server_stop(mlink_server* server);
MLINK_API void mlink_server_free(mlink_server* server);

#ifdef __cplusplus
}
#endif

#endif
