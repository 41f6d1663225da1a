#ifndef CLONELAB_H
#define CLONELAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ClonelabMembership {
  CLONELAB_MEMBERSHIP_NO = 0,
  CLONELAB_MEMBERSHIP_YES = 1,
  CLONELAB_MEMBERSHIP_UNKNOWN = 2,
} ClonelabMembership;

typedef enum ClonelabStatus {
  CLONELAB_STATUS_OK = 0,
  CLONELAB_STATUS_NULL_POINTER = 1,
  CLONELAB_STATUS_INVALID_ARGUMENT = 2,
  CLONELAB_STATUS_ARITY_MISMATCH = 3,
  CLONELAB_STATUS_DOMAIN_MISMATCH = 4,
  CLONELAB_STATUS_PARSE = 5,
  CLONELAB_STATUS_BUDGET_EXCEEDED = 6,
  CLONELAB_STATUS_PRECONDITION = 7,
  CLONELAB_STATUS_UTF8 = 8,
  CLONELAB_STATUS_PANIC = 99,
} ClonelabStatus;

typedef struct ClonelabFamily ClonelabFamily;

typedef struct ClonelabFragment ClonelabFragment;

typedef struct ClonelabTable ClonelabTable;

typedef struct ClonelabTerm ClonelabTerm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library and valid until the next failing call on the same thread.
 */
const char *clonelab_last_error(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void clonelab_string_free(char *s);

const char *clonelab_version(void);

/**
 * `m^n_k` on a chain of `chain` elements.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum ClonelabStatus clonelab_table_order_stat(size_t n,
                                              size_t k,
                                              size_t chain,
                                              struct ClonelabTable **out);

/**
 * A table from `len` values in lexicographic input order.
 *
 * # Safety
 * `values` must point to `len` readable bytes; `out` must be writable.
 */
enum ClonelabStatus clonelab_table_from_values(size_t arity,
                                               size_t chain,
                                               const uint8_t *values,
                                               size_t len,
                                               struct ClonelabTable **out);

/**
 * Parses the `optable <arity> <size>` text format.
 *
 * # Safety
 * `text_in` must be a NUL-terminated string; `out` must be writable.
 */
enum ClonelabStatus clonelab_table_parse(const char *text_in, struct ClonelabTable **out);

/**
 * # Safety
 * `t` must be a live table handle or NULL.
 */
void clonelab_table_free(struct ClonelabTable *t);

/**
 * # Safety
 * `t` must be a live table handle.
 */
size_t clonelab_table_arity(const struct ClonelabTable *t);

/**
 * # Safety
 * `t` must be a live table handle.
 */
size_t clonelab_table_chain_size(const struct ClonelabTable *t);

/**
 * # Safety
 * `t` must be live; `input` must hold `len` elements; `out` must be writable.
 */
enum ClonelabStatus clonelab_table_eval(const struct ClonelabTable *t,
                                        const size_t *input,
                                        size_t len,
                                        size_t *out);

/**
 * `outer(inners[0], …, inners[count-1])`.
 *
 * # Safety
 * `inners` must hold `count` live table handles; `out` must be writable.
 */
enum ClonelabStatus clonelab_table_compose(const struct ClonelabTable *outer,
                                           const struct ClonelabTable *const *inners,
                                           size_t count,
                                           struct ClonelabTable **out);

/**
 * Identification of variables: source position `i` reads variable
 * `assignment[i]` (1-based) of the new `target_arity`-ary table.
 *
 * # Safety
 * `assignment` must hold `len` elements; `out` must be writable.
 */
enum ClonelabStatus clonelab_table_identify(const struct ClonelabTable *t,
                                            const size_t *assignment,
                                            size_t len,
                                            size_t target_arity,
                                            struct ClonelabTable **out);

/**
 * # Safety
 * Both handles must be live.
 */
bool clonelab_table_equal(const struct ClonelabTable *a, const struct ClonelabTable *b);

/**
 * # Safety
 * `t` must be live.
 */
bool clonelab_table_is_majority(const struct ClonelabTable *t);

/**
 * Text form; free with `clonelab_string_free`.
 *
 * # Safety
 * `t` must be live.
 */
char *clonelab_table_to_text(const struct ClonelabTable *t);

/**
 * Parses an s-expression term (optionally preceded by `term <arity>`).
 *
 * # Safety
 * `text_in` must be NUL-terminated; `out` must be writable.
 */
enum ClonelabStatus clonelab_term_parse(const char *text_in, struct ClonelabTerm **out);

/**
 * # Safety
 * `t` must be a live term handle or NULL.
 */
void clonelab_term_free(struct ClonelabTerm *t);

/**
 * # Safety
 * `t` must be live.
 */
size_t clonelab_term_arity(const struct ClonelabTerm *t);

/**
 * Tabulates a term over order-statistic symbols.
 *
 * # Safety
 * `t` must be live; `out` must be writable.
 */
enum ClonelabStatus clonelab_term_to_table(const struct ClonelabTerm *t,
                                           size_t chain,
                                           struct ClonelabTable **out);

/**
 * Closes `count` generators (named `f1`, `f2`, … in witnesses).
 *
 * # Safety
 * `gens` must hold `count` live handles on one chain; `out` must be writable.
 */
enum ClonelabStatus clonelab_close(const struct ClonelabTable *const *gens,
                                   size_t count,
                                   size_t max_arity,
                                   size_t max_tables,
                                   struct ClonelabFragment **out);

/**
 * # Safety
 * `f` must be a live fragment handle or NULL.
 */
void clonelab_fragment_free(struct ClonelabFragment *f);

/**
 * Number of members of the given arity (0 if the arity was not computed).
 *
 * # Safety
 * `f` must be live; `exhausted` may be NULL.
 */
size_t clonelab_fragment_level_size(const struct ClonelabFragment *f,
                                    size_t arity,
                                    bool *exhausted);

/**
 * Membership of `target`; on `Yes`, `witness` (if non-NULL) receives the
 * witness term as a string to free with `clonelab_string_free`.
 *
 * # Safety
 * Handles must be live; `membership` must be writable; `witness` may be NULL.
 */
enum ClonelabStatus clonelab_fragment_contains(const struct ClonelabFragment *f,
                                               const struct ClonelabTable *target,
                                               enum ClonelabMembership *membership,
                                               char **witness);

/**
 * Wild family of a monotone term.
 *
 * # Safety
 * `t` must be live; `out` must be writable.
 */
enum ClonelabStatus clonelab_wild_family(const struct ClonelabTerm *t, struct ClonelabFamily **out);

/**
 * # Safety
 * `f` must be a live family handle or NULL.
 */
void clonelab_family_free(struct ClonelabFamily *f);

/**
 * # Safety
 * `f` must be live.
 */
bool clonelab_family_in_pol_t1(const struct ClonelabFamily *f);

/**
 * # Safety
 * `f` must be live; `out` must be writable.
 */
enum ClonelabStatus clonelab_family_almost_unary(const struct ClonelabFamily *f, bool *out);

/**
 * `{"n":…,"minimal_sets":[…]}`; free with `clonelab_string_free`.
 *
 * # Safety
 * `f` must be live.
 */
char *clonelab_family_to_json(const struct ClonelabFamily *f);

/**
 * Amplification schedule for odd `n` and threshold `p/q`, as JSON.
 *
 * # Safety
 * `out` must be writable; the string is freed with `clonelab_string_free`.
 */
enum ClonelabStatus clonelab_amplification_json(size_t n, uint64_t p, uint64_t q, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLONELAB_H */
