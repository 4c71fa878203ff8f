#ifndef PERIODGRAM_H
#define PERIODGRAM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PG_OK 0

#define PG_ERR_NULL 1

#define PG_ERR_INVALID 2

#define PG_ERR_COMPUTE 3

#define PG_ERR_PANIC 4

// Memoised table of integrals. Safe to share between threads.
typedef struct PgPeriodTable PgPeriodTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates an empty table. Never returns null.
struct PgPeriodTable *pg_table_new(void);

// Releases a table. Null is ignored.
//
// # Safety
// `table` must come from [`pg_table_new`] and not be used afterwards.
void pg_table_free(struct PgPeriodTable *table);

// Number of integrals memoised so far.
//
// # Safety
// `table` must be a live table or null.
size_t pg_table_len(const struct PgPeriodTable *table);

// Exact integral for exponents `s[0..5]` as `const_part + xi_part·ζ(2)`.
// Rationals are written as `p/q` strings; `value` receives the f64 value.
// Any output pointer may be null if unwanted.
//
// # Safety
// `s` must point to five `u32`; output pointers must be valid or null.
int32_t pg_mellin_integral(const struct PgPeriodTable *table,
                           const uint32_t *s,
                           char **const_part,
                           char **xi_part,
                           double *value);

// JSON report of the Gram matrix of `family` at level `n`.
//
// # Safety
// `family` must be a NUL-terminated string; `out` must be valid.
int32_t pg_gram_report_json(const struct PgPeriodTable *table,
                            const char *family,
                            uint32_t n,
                            uint32_t precision,
                            char **out);

// JSON result of a Fekete search for `family` at level `n` over the image
// of the unit square.
//
// # Safety
// `family` must be a NUL-terminated string; `out` must be valid.
int32_t pg_fekete_json(const char *family,
                       uint32_t n,
                       uint32_t restarts,
                       uint64_t seed,
                       char **out);

// ζ(2) to `digits` significant decimal digits.
//
// # Safety
// `out` must be valid.
int32_t pg_zeta2(uint32_t digits, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void pg_string_free(char *s);

// Message for the most recent failure on this thread, or null.
const char *pg_last_error(void);

// Library version as a static string.
const char *pg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERIODGRAM_H */
