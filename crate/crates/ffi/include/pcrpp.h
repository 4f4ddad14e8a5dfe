#ifndef PCRPP_H
#define PCRPP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PcrppStatus {
  PCRPP_STATUS_OK = 0,
  PCRPP_STATUS_NULL_POINTER = 1,
  PCRPP_STATUS_INVALID_UTF8 = 2,
  PCRPP_STATUS_PARSE = 3,
  PCRPP_STATUS_INVALID_INPUT = 4,
  PCRPP_STATUS_CAP_EXCEEDED = 5,
  PCRPP_STATUS_GUARANTEE = 6,
  PCRPP_STATUS_NUMERICAL = 7,
  PCRPP_STATUS_BUFFER_TOO_SMALL = 8,
  PCRPP_STATUS_PANIC = 9,
} PcrppStatus;

/**
 * Parsed instance.
 */
typedef struct PcrppInstance PcrppInstance;

/**
 * Walk returned by one of the solvers.
 */
typedef struct PcrppSolution PcrppSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *pcrpp_last_error(void);

/**
 * Parses an instance from NUL-terminated text.
 *
 * # Safety
 * `text` must be a valid C string and `dst` a writable pointer.
 */
enum PcrppStatus pcrpp_instance_parse(const char *text, struct PcrppInstance **dst);

/**
 * # Safety
 * `inst` must come from [`pcrpp_instance_parse`] or be null.
 */
void pcrpp_instance_free(struct PcrppInstance *inst);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be a live handle or null.
 */
size_t pcrpp_instance_vertex_count(const struct PcrppInstance *inst);

/**
 * Number of edges kept after parsing, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be a live handle or null.
 */
size_t pcrpp_instance_edge_count(const struct PcrppInstance *inst);

/**
 * Best-of-many approximation with default settings.
 *
 * # Safety
 * `inst` must be a live handle and `dst` a writable pointer.
 */
enum PcrppStatus pcrpp_solve(const struct PcrppInstance *inst,
                             bool check_guarantee,
                             struct PcrppSolution **dst);

/**
 * Exact optimum by enumeration, refused above `cap` edges.
 *
 * # Safety
 * `inst` must be a live handle and `dst` a writable pointer.
 */
enum PcrppStatus pcrpp_oracle(const struct PcrppInstance *inst,
                              size_t cap,
                              struct PcrppSolution **dst);

/**
 * Walk obtained through the PCTSP reduction.
 *
 * # Safety
 * `inst` must be a live handle and `dst` a writable pointer.
 */
enum PcrppStatus pcrpp_reduce(const struct PcrppInstance *inst,
                              size_t pctsp_cap,
                              bool fallback,
                              struct PcrppSolution **dst);

/**
 * # Safety
 * `sol` must come from one of the solver calls or be null.
 */
void pcrpp_solution_free(struct PcrppSolution *sol);

/**
 * Objective value, or NaN for a null handle.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
double pcrpp_solution_value(const struct PcrppSolution *sol);

/**
 * LP lower bound, or NaN when the solver produced none.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
double pcrpp_solution_lower_bound(const struct PcrppSolution *sol);

/**
 * Number of vertices on the closed walk, including both root visits.
 *
 * # Safety
 * `sol` must be a live handle or null.
 */
size_t pcrpp_solution_walk_len(const struct PcrppSolution *sol);

/**
 * Copies the walk as 1-based vertex ids into `buf`.
 *
 * # Safety
 * `buf` must hold `cap` writable elements; it may be null when `cap` is 0.
 */
enum PcrppStatus pcrpp_solution_walk(const struct PcrppSolution *sol, size_t *buf, size_t cap);

/**
 * Ratio certificate for the published parameters with grid step `step`.
 *
 * # Safety
 * `certified` and `inconclusive` must be writable pointers.
 */
enum PcrppStatus pcrpp_verify_ratio(double step, double *certified, bool *inconclusive);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PCRPP_H */
