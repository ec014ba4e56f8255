#ifndef PEDIGREE_H
#define PEDIGREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Skip the MCF when a cheap sufficient condition for membership holds.
#define PDG_CHECK_SHORTCUTS 1

typedef enum PdgStatus {
  PDG_STATUS_OK = 0,
  PDG_STATUS_NULL_POINTER = 1,
  PDG_STATUS_INVALID_UTF8 = 2,
  PDG_STATUS_PARSE = 3,
  PDG_STATUS_STRUCTURAL = 4,
  PDG_STATUS_PRECONDITION = 5,
  PDG_STATUS_RESOURCE = 6,
  PDG_STATUS_INVARIANT = 7,
  PDG_STATUS_PANIC = 8,
} PdgStatus;

typedef struct PdgPoint PdgPoint;

typedef struct PdgVerdict PdgVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library from the same thread.
const char *pdg_last_error(void);

const char *pdg_version(void);

// Reads a point from JSON text: `{"n": 5, "coords": ["0", "1/3", ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum PdgStatus pdg_point_from_json(const char *json, struct PdgPoint **out);

// Builds a point for `n` cities from `len` rational strings such as "3/8".
//
// # Safety
// `coords` must point to `len` NUL-terminated strings and `out` must be valid.
enum PdgStatus pdg_point_new(size_t n,
                             const char *const *coords,
                             size_t len,
                             struct PdgPoint **out);

// Number of cities of the point, or 0 for NULL.
//
// # Safety
// `point` must be NULL or a live handle.
size_t pdg_point_n(const struct PdgPoint *point);

// # Safety
// `point` must be NULL or a handle not yet freed.
void pdg_point_free(struct PdgPoint *point);

// Decides membership. `flags` is a bit set of `PDG_CHECK_*` values.
//
// # Safety
// `point` must be a live handle and `out` a valid pointer.
enum PdgStatus pdg_check(const struct PdgPoint *point, uint32_t flags, struct PdgVerdict **out);

// Membership by enumerating every pedigree; only for n <= 8.
//
// # Safety
// `point` must be a live handle and `member` a valid pointer.
enum PdgStatus pdg_oracle_check(const struct PdgPoint *point, bool *member);

// # Safety
// `verdict` must be a live handle and `member` a valid pointer.
enum PdgStatus pdg_verdict_is_member(const struct PdgVerdict *verdict, bool *member);

// Stage at which the point was rejected, or the violated block for points
// outside the relaxation; 0 for members.
//
// # Safety
// `verdict` must be NULL or a live handle.
size_t pdg_verdict_failure_stage(const struct PdgVerdict *verdict);

// One-line summary such as "NOT MEMBER (stage 5, ...)". Owned by the
// verdict; NULL for a NULL handle.
//
// # Safety
// `verdict` must be NULL or a live handle.
const char *pdg_verdict_headline(const struct PdgVerdict *verdict);

// # Safety
// `verdict` must be NULL or a handle not yet freed.
void pdg_verdict_free(struct PdgVerdict *verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEDIGREE_H */
