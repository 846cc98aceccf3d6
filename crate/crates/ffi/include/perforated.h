#ifndef PERFORATED_H
#define PERFORATED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every call.
typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_POINTER = 1,
  PF_STATUS_INVALID_INPUT = 2,
  PF_STATUS_CONFIG = 3,
  PF_STATUS_GEOMETRY = 4,
  PF_STATUS_DOMAIN = 5,
  PF_STATUS_NUMERICAL = 6,
  PF_STATUS_IO = 7,
  PF_STATUS_BUFFER_TOO_SMALL = 8,
  PF_STATUS_PANIC = 9,
} PfStatus;

// Asymptotic expansion at one `eps`.
typedef struct PfExpansion PfExpansion;

// Exterior conformal map of a reference inclusion.
typedef struct PfMap PfMap;

// Dense reference solution at one `eps`.
typedef struct PfReference PfReference;

// Domain, inclusions and forcing, as read from a scene config.
typedef struct PfScene PfScene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. Valid until the next
// failing call on the same thread; never null.
const char *pf_last_error(void);

// Builds the exterior map of `shape` (`"disk"`, `"ellipse:a,b,c"`,
// `"laurent:[...]"` or `"samples:path.csv"`) truncated at `order`.
//
// # Safety
// `shape` must be a NUL-terminated string and `out` a valid pointer.
enum PfStatus pf_map_new(const char *shape, size_t order, struct PfMap **out);

// # Safety
// `map` must come from [`pf_map_new`] and not be used afterwards; null is ignored.
void pf_map_free(struct PfMap *map);

// Leading coefficient `beta` of the map (reciprocal of the capacity).
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_map_beta(const struct PfMap *map, double *out);

// `T(z)` for `z` exterior to the inclusion.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_map_forward(const struct PfMap *map,
                             double re,
                             double im,
                             double *out_re,
                             double *out_im);

// `T^{-1}(w)` for `|w| >= 1`.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_map_inverse(const struct PfMap *map,
                             double re,
                             double im,
                             double *out_re,
                             double *out_im);

// Reads a scene config file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum PfStatus pf_scene_from_file(const char *path, struct PfScene **out);

// Parses scene config text.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum PfStatus pf_scene_from_str(const char *text, struct PfScene **out);

// # Safety
// `scene` must come from a `pf_scene_*` constructor; null is ignored.
void pf_scene_free(struct PfScene *scene);

// # Safety
// Pointers must be valid.
enum PfStatus pf_scene_inclusion_count(const struct PfScene *scene, size_t *out);

// Expansion at `eps`: `order` iterations for a single inclusion; several
// inclusions always give the first-order system and ignore `order`.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_expand(const struct PfScene *scene,
                        double eps,
                        size_t order,
                        struct PfExpansion **out);

// # Safety
// `e` must come from [`pf_expand`]; null is ignored.
void pf_expansion_free(struct PfExpansion *e);

// Number of iterations held by the expansion.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_expansion_order(const struct PfExpansion *e, size_t *out);

// Value at `(x, y)` of the expansion truncated to `order` iterations.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_expansion_evaluate(const struct PfExpansion *e,
                                    double x,
                                    double y,
                                    size_t order,
                                    double *out);

// Copies the first-iteration corrector amplitudes into `buf`; `len` is the
// capacity, `written` receives the count needed (also on `BufferTooSmall`).
//
// # Safety
// `buf` must hold `len` doubles; other pointers must be valid.
enum PfStatus pf_expansion_coefficients(const struct PfExpansion *e,
                                        double *buf,
                                        size_t len,
                                        size_t *written);

// Largest boundary residual over all components for `order` iterations.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_expansion_residual(const struct PfExpansion *e, size_t order, double *out);

// Reference solution of the scene at `eps`.
//
// # Safety
// Pointers must be valid.
enum PfStatus pf_reference_solve(const struct PfScene *scene, double eps, struct PfReference **out);

// # Safety
// Pointers must be valid.
enum PfStatus pf_reference_evaluate(const struct PfReference *r, double x, double y, double *out);

// # Safety
// `r` must come from [`pf_reference_solve`]; null is ignored.
void pf_reference_free(struct PfReference *r);

// Runs the seeded invariant suite; `passed` receives 1 or 0.
//
// # Safety
// `passed` must be a valid pointer.
enum PfStatus pf_validate(uint64_t seed, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERFORATED_H */
