#ifndef BRAIDSCAPE_H
#define BRAIDSCAPE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BsStatus {
  BS_STATUS_OK = 0,
  BS_STATUS_NULL_POINTER = 1,
  BS_STATUS_INVALID_UTF8 = 2,
  BS_STATUS_INVALID_INPUT = 3,
  BS_STATUS_NOT_APPLICABLE = 4,
  BS_STATUS_LIMIT_EXCEEDED = 5,
  BS_STATUS_INTERNAL = 6,
} BsStatus;

/*
 A topological complexity certificate.
 */
typedef struct BsCertificate BsCertificate;

/*
 A planar tree.
 */
typedef struct BsTree BsTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread. Valid until the next
 call on the same thread; empty if nothing has failed.
 */
const char *bs_last_error(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void bs_string_free(char *s);

/*
 Parses a tree from its JSON description.

 # Safety
 `json` must be a nul-terminated string and `out` a writable pointer.
 */
enum BsStatus bs_tree_from_json(const char *json, struct BsTree **out);

/*
 # Safety
 `tree` must be null or a handle from this library, not yet freed.
 */
void bs_tree_free(struct BsTree *tree);

/*
 Writes the tree subdivided for `n` points as JSON.

 # Safety
 `tree` must be a live handle and `out` a writable pointer.
 */
enum BsStatus bs_tree_subdivided_json(const struct BsTree *tree, size_t n, char **out);

/*
 Decides the topological complexity of `n` points on the tree.

 # Safety
 `tree` must be a live handle and `out` a writable pointer.
 */
enum BsStatus bs_tc_decide(const struct BsTree *tree, size_t n, struct BsCertificate **out);

/*
 Reads a certificate back from its JSON form.

 # Safety
 `json` must be a nul-terminated string and `out` a writable pointer.
 */
enum BsStatus bs_certificate_from_json(const char *json, struct BsCertificate **out);

/*
 # Safety
 `cert` must be null or a handle from this library, not yet freed.
 */
void bs_certificate_free(struct BsCertificate *cert);

/*
 The certified value. Returns `NotApplicable` with the reason in
 [`bs_last_error`] when no value was determined.

 # Safety
 `cert` must be a live handle and `value` a writable pointer.
 */
enum BsStatus bs_certificate_value(const struct BsCertificate *cert, size_t *value);

/*
 # Safety
 `cert` must be a live handle and `out` a writable pointer.
 */
enum BsStatus bs_certificate_to_json(const struct BsCertificate *cert, char **out);

/*
 Rechecks a certificate independently; `passed` is set to 1 or 0.

 # Safety
 `cert` must be a live handle and `passed` a writable pointer.
 */
enum BsStatus bs_certificate_verify(const struct BsCertificate *cert, int32_t *passed);

/*
 Plans a motion between two configurations of `n` points on the tree
 subdivided for `n`, written as comma-separated points (`v:id` or
 `e:id1-id2@num/den`). The path is returned as JSON keyframes.

 # Safety
 `tree` must be a live handle, `from` and `to` nul-terminated strings and
 `out` a writable pointer.
 */
enum BsStatus bs_plan(const struct BsTree *tree,
                      size_t n,
                      const char *from,
                      const char *to,
                      int32_t ordered,
                      char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRAIDSCAPE_H */
