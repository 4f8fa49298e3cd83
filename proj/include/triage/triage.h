/* C interface to the issue triage library.
 *
 * Every function returning triage_status stores a message for the calling
 * thread on failure, readable with triage_last_error(). Strings returned
 * through char** are heap allocated; release them with triage_string_free().
 * JSON option arguments may be NULL or "" for defaults.
 */
#ifndef TRIAGE_H
#define TRIAGE_H

#include <stddef.h>

#if defined(TRIAGE_BUILDING_LIBRARY)
#define TRIAGE_API __attribute__((visibility("default")))
#else
#define TRIAGE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum triage_status {
  TRIAGE_OK = 0,
  TRIAGE_ERR_INVALID_ARGUMENT = 1,
  TRIAGE_ERR_IO = 2,
  TRIAGE_ERR_PARSE = 3,
  TRIAGE_ERR_SCHEMA = 4,
  TRIAGE_ERR_CHECKSUM = 5,
  TRIAGE_ERR_NETWORK = 6,
  TRIAGE_ERR_AUTH = 7,
  TRIAGE_ERR_NOT_FOUND = 8,
  TRIAGE_ERR_RATE_LIMITED = 9,
  TRIAGE_ERR_NUMERIC = 10,
  TRIAGE_ERR_RUNTIME = 11
} triage_status;

typedef struct triage_corpus triage_corpus;
typedef struct triage_objective_model triage_objective_model;
typedef struct triage_objective_source triage_objective_source;
typedef struct triage_priority_model triage_priority_model;

TRIAGE_API const char *triage_version(void);
TRIAGE_API const char *triage_last_error(void);
TRIAGE_API const char *triage_status_name(triage_status status);
TRIAGE_API void triage_string_free(char *s);

TRIAGE_API triage_status triage_file_sha256(const char *path, char **out_hex);
TRIAGE_API triage_status triage_preprocessing_checksum(char **out_hex);

/* Corpus files: JSON Lines plus a `.meta.json` sidecar. `out_errors_json`
 * (optional) receives the malformed lines as [{"line":n,"message":...}]. */
TRIAGE_API triage_status triage_corpus_load(const char *path, int strict, triage_corpus **out,
                                            char **out_errors_json);
TRIAGE_API triage_status triage_corpus_save(const triage_corpus *corpus, const char *path);
TRIAGE_API size_t triage_corpus_size(const triage_corpus *corpus);
TRIAGE_API void triage_corpus_free(triage_corpus *corpus);

/* rules_json: {"min_text_length","non_english_threshold","excluded_clusters"} */
TRIAGE_API triage_status triage_corpus_filter(const triage_corpus *corpus, const char *rules_json,
                                              triage_corpus **out, char **out_report_json);

/* client_json: {"base_url","auth_token_env","max_parallel_requests","cache_dir",
 *               "retry_attempts","backoff_base_seconds","refresh","per_page"}
 * query_json:  {"repos":[...],"state","created_before","include_pull_requests","hydrate"} */
TRIAGE_API triage_status triage_fetch(const char *client_json, const char *query_json, triage_corpus **out,
                                      char **out_report_json);

/* config_json: {"kind","hyperparams","balancing","weight_override","smote_k","search_budget",
 *               "search_folds","search_metric","search_space","title_max_features",
 *               "desc_max_features","seed"} */
TRIAGE_API triage_status triage_objective_train(const triage_corpus *corpus, const char *config_json,
                                                triage_objective_model **out);
TRIAGE_API triage_status triage_objective_load(const char *dir, triage_objective_model **out);
TRIAGE_API triage_status triage_objective_save(const triage_objective_model *model, const char *dir);
TRIAGE_API triage_status triage_objective_fingerprint(const triage_objective_model *model, char **out_hex);
TRIAGE_API triage_status triage_objective_predict(const triage_objective_model *model, const triage_corpus *corpus,
                                                  char **out_csv);
TRIAGE_API void triage_objective_free(triage_objective_model *model);

TRIAGE_API triage_status triage_source_keyword(triage_objective_source **out);
TRIAGE_API triage_status triage_source_model(const triage_objective_model *model, triage_objective_source **out);
/* CSV with header id,Bug,Enhancement,SupportDoc. */
TRIAGE_API triage_status triage_source_imported(const char *csv_path, triage_objective_source **out);
TRIAGE_API void triage_source_free(triage_objective_source *source);

TRIAGE_API triage_status triage_priority_train(const triage_corpus *corpus, const triage_objective_source *source,
                                               const char *config_json, triage_priority_model **out);
TRIAGE_API triage_status triage_priority_load(const char *dir, triage_priority_model **out);
TRIAGE_API triage_status triage_priority_save(const triage_priority_model *model, const char *dir);
TRIAGE_API triage_status triage_priority_fingerprint(const triage_priority_model *model, char **out_hex);
/* source may be NULL to use the stage-1 source stored with the model. */
TRIAGE_API triage_status triage_priority_predict(const triage_priority_model *model, const triage_corpus *corpus,
                                                 const triage_objective_source *source, char **out_csv);
TRIAGE_API void triage_priority_free(triage_priority_model *model);

/* model may be NULL: vectorizers and scaler are then fitted on the corpus. */
TRIAGE_API triage_status triage_features_csv(const triage_corpus *corpus, const triage_objective_source *source,
                                             const triage_priority_model *model, const char *config_json,
                                             char **out_csv);

/* options_json: {"task":"priority"|"objective","mode":"cv"|"project-based"|"cross-project",
 *                "folds","train_ratio","seed","weight_sweep":[i...],"importance_top"}
 * out_csv (optional) receives the per-repository table of project-based runs. */
TRIAGE_API triage_status triage_evaluate(const triage_corpus *corpus, const triage_objective_source *source,
                                         const char *config_json, const char *options_json,
                                         char **out_report_json, char **out_table, char **out_csv);

/* Ratings CSV text; majority != 0 selects majority-fraction item agreement. */
TRIAGE_API triage_status triage_agreement(const char *ratings_csv, int majority, char **out_report_json,
                                          char **out_table);

#ifdef __cplusplus
}
#endif

#endif
