#ifndef TROPMETZLER_H
#define TROPMETZLER_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum TmStatus {
  TM_STATUS_OK = 0,
  TM_STATUS_NULL_POINTER = 1,
  TM_STATUS_INVALID_UTF8 = 2,
  TM_STATUS_PARSE = 3,
  TM_STATUS_DIMENSION = 4,
  TM_STATUS_VALIDATION = 5,
  TM_STATUS_SINGULAR = 6,
  TM_STATUS_NOT_COMPLIANT = 7,
  TM_STATUS_INVALID_PENCIL = 8,
  TM_STATUS_PRECONDITION = 9,
  TM_STATUS_OTHER = 10,
  TM_STATUS_PANIC = 11,
} TmStatus;

// A validated game graph together with its absorption table.
typedef struct TmGame TmGame;

// A pencil, possibly with hidden variables and a lift of visible points.
typedef struct TmPencil TmPencil;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call into the library on this thread.
const char *tm_last_error(void);

// Parses a graph document or a min-max operator document and validates it.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum TmStatus tm_game_from_json(const char *json, struct TmGame **out);

// Releases a game. Null is ignored.
//
// # Safety
// `game` must come from `tm_game_from_json` and not be used afterwards.
void tm_game_free(struct TmGame *game);

// Number of Min vertices, i.e. the dimension of the operator; 0 for null.
//
// # Safety
// `game` must be null or a live handle.
uintptr_t tm_game_dim(const struct TmGame *game);

// Evaluates the operator at a comma-separated rational point. The image is
// returned as a JSON array of strings, to be released with `tm_string_free`.
//
// # Safety
// `game` must be a live handle, `point` a NUL-terminated string and `out`
// a writable pointer.
enum TmStatus tm_game_eval(const struct TmGame *game, const char *point, char **out);

// Tests `x ≤ F(x)` for a comma-separated point; `-inf` coordinates are
// allowed.
//
// # Safety
// As for `tm_game_eval`.
enum TmStatus tm_game_subfixed(const struct TmGame *game, const char *point, bool *out);

// Builds the projected pencil whose visible part is the set of points with
// `x ≤ F(x)`.
//
// # Safety
// `game` must be a live handle and `out` a writable pointer.
enum TmStatus tm_game_synthesize(const struct TmGame *game, struct TmPencil **out);

// Reads a pencil document. Such a pencil has no lift, so only
// `tm_pencil_member` applies to it.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum TmStatus tm_pencil_from_json(const char *json, struct TmPencil **out);

// Releases a pencil. Null is ignored.
//
// # Safety
// `pencil` must come from this library and not be used afterwards.
void tm_pencil_free(struct TmPencil *pencil);

// Total number of variables; 0 for null.
//
// # Safety
// `pencil` must be null or a live handle.
uintptr_t tm_pencil_vars(const struct TmPencil *pencil);

// Number of leading visible variables; 0 for null.
//
// # Safety
// `pencil` must be null or a live handle.
uintptr_t tm_pencil_visible(const struct TmPencil *pencil);

// Membership of a point given on all variables.
//
// # Safety
// `pencil` must be a live handle, `point` a NUL-terminated string and `out`
// a writable pointer.
enum TmStatus tm_pencil_member(const struct TmPencil *pencil, const char *point, bool *out);

// Membership of a point given on the visible variables, decided by lifting
// it to all variables. Fails with `TM_STATUS_PRECONDITION` when the pencil
// carries no lift.
//
// # Safety
// As for `tm_pencil_member`.
enum TmStatus tm_pencil_member_visible(const struct TmPencil *pencil, const char *point, bool *out);

// Serializes a pencil as a JSON document, to be released with
// `tm_string_free`.
//
// # Safety
// `pencil` must be a live handle and `out` a writable pointer.
enum TmStatus tm_pencil_to_json(const struct TmPencil *pencil, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void tm_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TROPMETZLER_H */
