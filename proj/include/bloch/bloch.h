#ifndef BLOCH_BLOCH_H
#define BLOCH_BLOCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(BLOCH_BUILDING_LIBRARY)
#define BLOCH_API __attribute__((visibility("default")))
#else
#define BLOCH_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bloch_status {
  BLOCH_OK = 0,
  BLOCH_ERR_INVALID_ARGUMENT = 1,
  BLOCH_ERR_CONFIG = 2,
  BLOCH_ERR_UNKNOWN_SUBCOMMAND = 3,
  BLOCH_ERR_IO = 4,
  BLOCH_ERR_INTERNAL = 5
} bloch_status;

typedef struct bloch_session bloch_session;

BLOCH_API const char* bloch_version(void);

/* Message for the last failing call on this thread; "" when none. For
   configuration errors one "field: message" line per problem. */
BLOCH_API const char* bloch_last_error(void);

/* Strings returned through char** out-parameters are released with this. */
BLOCH_API void bloch_string_free(char* s);

/* Parses and checks a JSON configuration; on success *normalized (if not
   NULL) receives the fully defaulted document. */
BLOCH_API bloch_status bloch_config_validate(const char* json, const char* base_dir, char** normalized);

BLOCH_API bloch_status bloch_session_create(const char* json, const char* base_dir, bloch_session** out);
BLOCH_API void bloch_session_destroy(bloch_session* s);

/* Dotted field override, e.g. ("lp.restarts", "5"). The value is read as JSON
   when it parses, otherwise as a string. */
BLOCH_API bloch_status bloch_session_set(bloch_session* s, const char* field, const char* value);
BLOCH_API bloch_status bloch_session_set_tau(bloch_session* s, const char* tau_list);
BLOCH_API bloch_status bloch_session_set_seed(bloch_session* s, uint64_t seed);
BLOCH_API bloch_status bloch_session_set_threads(bloch_session* s, int threads);
BLOCH_API bloch_status bloch_session_set_output(bloch_session* s, const char* dir, const char* format);

BLOCH_API bloch_status bloch_session_config(const bloch_session* s, char** normalized);
BLOCH_API bloch_status bloch_session_hash(const bloch_session* s, char** hash);

BLOCH_API size_t bloch_subcommand_count(void);
BLOCH_API const char* bloch_subcommand_name(size_t i);

/* Runs a subcommand and writes its artifacts. *passed is 1 when every check
   expected to hold did; *report (if not NULL) receives the report JSON. */
BLOCH_API bloch_status bloch_session_run(bloch_session* s, const char* subcommand, int* passed, char** report);

/* |Im sqrt(zeta)| for zeta = tau^2 - i rho tau. */
BLOCH_API bloch_status bloch_im_sqrt_shift(double tau, double rho, double* out);

/* min over |j| <= J of |(j + 1/2 + i tau)^2 + lambda|, flat transverse torus of
   dimension n - 1 with K modes. */
BLOCH_API bloch_status bloch_carleman_min(int n, int grid, int K, int J, double tau, double* out);

#ifdef __cplusplus
}
#endif

#endif
