#ifndef GPD_SPARSIFY_H
#define GPD_SPARSIFY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `INVALID_ARGUMENT`, `FORMAT` and `INTERNAL` match the exit
 * codes of the command-line tool.
 */
typedef enum GpdStatus {
  GPD_STATUS_OK = 0,
  GPD_STATUS_NULL_POINTER = 1,
  GPD_STATUS_INVALID_ARGUMENT = 2,
  GPD_STATUS_FORMAT = 3,
  GPD_STATUS_INTERNAL = 4,
  GPD_STATUS_PANIC = 5,
} GpdStatus;

/**
 * Barcode of an interval-decomposable module.
 */
typedef struct GpdBarcode GpdBarcode;

/**
 * A finite family of intervals.
 */
typedef struct GpdDomain GpdDomain;

/**
 * Loss `dhat(full, J)` as a function of the coordinates of `J`.
 */
typedef struct GpdLossGraph GpdLossGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread; empty if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *gpd_last_error_message(void);

/**
 * Builds a domain from `6 * n` coordinates `x, y, a, b, c, d` per interval.
 */
enum GpdStatus gpd_domain_from_vec6(const double *coords, uintptr_t n, struct GpdDomain **out);

/**
 * Parses domain JSON (NUL-terminated UTF-8).
 */
enum GpdStatus gpd_domain_from_json(const char *json, struct GpdDomain **out);

/**
 * Serializes a domain to JSON. Release the string with [`gpd_string_free`].
 */
enum GpdStatus gpd_domain_to_json(const struct GpdDomain *domain, char **out);

/**
 * Builds the grid domain with `nxy` corner samples per axis in
 * `[xy_lo, xy_hi]` and `nsides` samples of each side length in
 * `[side_lo, side_hi]`.
 */
enum GpdStatus gpd_grid_domain(uintptr_t nxy,
                               uintptr_t nsides,
                               double xy_lo,
                               double xy_hi,
                               double side_lo,
                               double side_hi,
                               struct GpdDomain **out);

/**
 * Number of intervals; 0 for a null handle.
 */
uintptr_t gpd_domain_len(const struct GpdDomain *domain);

/**
 * Copies `6 * len` embedding coordinates into `out`. Fails for domains with
 * intervals that have no six-coordinate form.
 */
enum GpdStatus gpd_domain_coords(const struct GpdDomain *domain, double *out, uintptr_t out_len);

void gpd_domain_free(struct GpdDomain *domain);

void gpd_string_free(char *s);

/**
 * Distance between two intervals given as `x, y, a, b, c, d`.
 */
enum GpdStatus gpd_eps_21(const double *u, const double *v, double *out);

enum GpdStatus gpd_dhat(const struct GpdDomain *a, const struct GpdDomain *b, double *out);

/**
 * Pairwise distances, row-major with rows from `a`; `out_len` must be
 * `len(a) * len(b)`.
 */
enum GpdStatus gpd_eps_matrix(const struct GpdDomain *a,
                              const struct GpdDomain *b,
                              double *out,
                              uintptr_t out_len);

enum GpdStatus gpd_loss_graph_new(const struct GpdDomain *full,
                                  uintptr_t m,
                                  struct GpdLossGraph **out);

/**
 * Evaluates the loss at `6 * m` coordinates. When `grad` is non-null it
 * receives a subgradient of the same length.
 */
enum GpdStatus gpd_loss_graph_eval(const struct GpdLossGraph *graph,
                                   const double *coords,
                                   uintptr_t len,
                                   double *loss,
                                   double *grad);

void gpd_loss_graph_free(struct GpdLossGraph *graph);

/**
 * Sparsifies `full` to `m` intervals from a seeded random subset. Writes
 * the best domain found and its loss.
 */
enum GpdStatus gpd_optimize(const struct GpdDomain *full,
                            uintptr_t m,
                            uintptr_t epochs,
                            double learning_rate,
                            double momentum,
                            double lr_decay,
                            uint64_t seed,
                            struct GpdDomain **out,
                            double *best_loss);

enum GpdStatus gpd_barcode_from_json(const char *json, struct GpdBarcode **out);

void gpd_barcode_free(struct GpdBarcode *barcode);

/**
 * Sparse erosion distance between `(ma, da)` and `(mb, db)`.
 */
enum GpdStatus gpd_sparse_erosion_distance(const struct GpdBarcode *ma,
                                           const struct GpdDomain *da,
                                           const struct GpdBarcode *mb,
                                           const struct GpdDomain *db,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GPD_SPARSIFY_H */
