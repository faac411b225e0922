#ifndef STACKPLAN_H
#define STACKPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success; `SP_STATUS_TIMEOUT` is not an error.
typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_TIMEOUT = 1,
  SP_STATUS_NULL_ARGUMENT = -1,
  SP_STATUS_INVALID_UTF8 = -2,
  SP_STATUS_PARSE = -3,
  SP_STATUS_INVALID_INPUT = -4,
  SP_STATUS_GENERATION = -5,
  SP_STATUS_INTERNAL = -6,
} SpStatus;

typedef enum SpFamily {
  SP_FAMILY_REVERSE = 0,
  SP_FAMILY_TRANSFORM = 1,
  SP_FAMILY_ROTATE = 2,
} SpFamily;

// A scene together with its start/goal problem.
typedef struct SpProblem SpProblem;

typedef struct SpSolution SpSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the
// next failing call on this thread; do not free.
const char *sp_last_error(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void sp_string_free(char *s);

// Parses a TOML problem document.
//
// # Safety
// `text` must be a nul-terminated string; `out` must be writable.
enum SpStatus sp_problem_parse(const char *text, struct SpProblem **out);

// Generates a benchmark problem.
//
// # Safety
// `out` must be writable.
enum SpStatus sp_problem_generate(enum SpFamily family,
                                  uintptr_t cubes,
                                  double edge,
                                  uint64_t seed,
                                  struct SpProblem **out);

// Writes the problem as a TOML document.
//
// # Safety
// `p` must be a live problem handle; `out` must be writable.
enum SpStatus sp_problem_to_toml(const struct SpProblem *p, char **out);

// Number of movable objects in the problem, or 0 for null.
//
// # Safety
// `p` must be null or a live problem handle.
uintptr_t sp_problem_object_count(const struct SpProblem *p);

// # Safety
// `p` must be null or a handle from this library not yet freed.
void sp_problem_free(struct SpProblem *p);

// Plans with the given seed and time limit (seconds). On success `*out`
// receives a solution; on `SP_STATUS_TIMEOUT` it is left untouched.
//
// # Safety
// `p` must be a live problem handle; `out` must be writable.
enum SpStatus sp_plan(const struct SpProblem *p,
                      uint64_t seed,
                      double time_limit,
                      struct SpSolution **out);

// Shortens a solution; the input handle stays valid.
//
// # Safety
// `p` and `s` must be live handles; `out` must be writable.
enum SpStatus sp_simplify(const struct SpProblem *p,
                          const struct SpSolution *s,
                          uint64_t seed,
                          struct SpSolution **out);

// Number of pick-and-place moves, or 0 for null.
//
// # Safety
// `s` must be null or a live solution handle.
uintptr_t sp_solution_len(const struct SpSolution *s);

// Total tree vertices created while searching, or 0 for null.
//
// # Safety
// `s` must be null or a live solution handle.
uintptr_t sp_solution_nodes(const struct SpSolution *s);

// Replays the solution against the problem; `*valid` receives the verdict.
// When invalid, the reason is available from [`sp_last_error`].
//
// # Safety
// `p` and `s` must be live handles; `valid` must be writable.
enum SpStatus sp_validate(const struct SpProblem *p, const struct SpSolution *s, bool *valid);

// Exports a JSON trace with frames every `period` seconds.
//
// # Safety
// `p` and `s` must be live handles; `out` must be writable.
enum SpStatus sp_trace_json(const struct SpProblem *p,
                            const struct SpSolution *s,
                            double period,
                            char **out);

// # Safety
// `s` must be null or a handle from this library not yet freed.
void sp_solution_free(struct SpSolution *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STACKPLAN_H */
