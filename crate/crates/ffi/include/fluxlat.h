#ifndef FLUXLAT_H
#define FLUXLAT_H

/* Generated by cbindgen. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Charge convention selector for `convention` arguments.
 */
#define FLUXLAT_CONVENTION_QED 0

#define FLUXLAT_CONVENTION_MICRO 1

/**
 * Result of every fallible call.
 */
typedef enum FluxlatStatus {
  FLUXLAT_STATUS_OK = 0,
  FLUXLAT_STATUS_VALIDATION = 1,
  FLUXLAT_STATUS_CAPACITY = 2,
  FLUXLAT_STATUS_IO = 3,
  FLUXLAT_STATUS_NULL_POINTER = 4,
  FLUXLAT_STATUS_INVALID_ARGUMENT = 5,
  FLUXLAT_STATUS_PANIC = 6,
  FLUXLAT_STATUS_NOT_FOUND = 7,
} FluxlatStatus;

/**
 * Lattice geometry handle.
 */
typedef struct FluxlatGeometry FluxlatGeometry;

/**
 * Gauss-sector basis handle; owns a copy of its geometry.
 */
typedef struct FluxlatSector FluxlatSector;

/**
 * One static charge `q` at vertex `(m, n)`.
 */
typedef struct FluxlatCharge {
  uintptr_t m;
  uintptr_t n;
  int32_t q;
} FluxlatCharge;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an `lx × ly` lattice; `periodic` nonzero selects periodic
 * boundaries.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum FluxlatStatus fluxlat_geometry_new(uintptr_t lx,
                                        uintptr_t ly,
                                        int32_t periodic,
                                        struct FluxlatGeometry **out);

/**
 * # Safety
 * `geom` must come from [`fluxlat_geometry_new`] and not be freed yet, or
 * be null.
 */
void fluxlat_geometry_free(struct FluxlatGeometry *geom);

/**
 * # Safety
 * `geom` must be a live handle; each output pointer may be null to skip it.
 */
enum FluxlatStatus fluxlat_geometry_counts(const struct FluxlatGeometry *geom,
                                           uintptr_t *n_vertices,
                                           uintptr_t *n_links,
                                           uintptr_t *n_plaquettes);

/**
 * Sets `*valid` to 1 if the charges satisfy the rules of `convention`
 * and 0 otherwise; in the latter case the violations are the last error
 * message.
 *
 * # Safety
 * `geom` must be a live handle, `sites` must point to `n_sites` records
 * and `valid` must be writable.
 */
enum FluxlatStatus fluxlat_charges_validate(const struct FluxlatGeometry *geom,
                                            const struct FluxlatCharge *sites,
                                            uintptr_t n_sites,
                                            int32_t convention,
                                            int32_t *valid);

/**
 * Enumerates the Gauss-law sector of the given charges at truncation
 * `trunc`.
 *
 * # Safety
 * `geom` must be a live handle, `sites` must point to `n_sites` records
 * and `out` must be writable.
 */
enum FluxlatStatus fluxlat_sector_new(const struct FluxlatGeometry *geom,
                                      const struct FluxlatCharge *sites,
                                      uintptr_t n_sites,
                                      int32_t convention,
                                      uint8_t trunc,
                                      struct FluxlatSector **out);

/**
 * # Safety
 * `sector` must come from [`fluxlat_sector_new`] and not be freed yet, or
 * be null.
 */
void fluxlat_sector_free(struct FluxlatSector *sector);

/**
 * # Safety
 * `sector` must be a live handle and `len` writable.
 */
enum FluxlatStatus fluxlat_sector_len(const struct FluxlatSector *sector, uintptr_t *len);

/**
 * Copies the electric fields of state `index` into `links`
 * (`n_links` entries, link ordinal order).
 *
 * # Safety
 * `sector` must be a live handle and `links` must hold `n_links` entries.
 */
enum FluxlatStatus fluxlat_sector_state(const struct FluxlatSector *sector,
                                        uintptr_t index,
                                        int8_t *links,
                                        uintptr_t n_links);

/**
 * Ordinal of a link configuration; [`FluxlatStatus::NotFound`] if it is
 * not in the sector.
 *
 * # Safety
 * `sector` must be a live handle, `links` must hold `n_links` entries and
 * `index` must be writable.
 */
enum FluxlatStatus fluxlat_sector_index_of(const struct FluxlatSector *sector,
                                           const int8_t *links,
                                           uintptr_t n_links,
                                           uintptr_t *index);

/**
 * Kogut-Susskind ground energy on the sector at coupling `g2`. If `state`
 * is non-null it receives the ground-state amplitudes (`state_len` must
 * equal the sector size).
 *
 * # Safety
 * `sector` must be a live handle, `energy` writable, and `state` null or
 * writable for `state_len` entries.
 */
enum FluxlatStatus fluxlat_ks_ground_state(const struct FluxlatSector *sector,
                                           double g2,
                                           double *energy,
                                           double *state,
                                           uintptr_t state_len);

/**
 * Per-link `⟨E⟩` and `⟨E²⟩` in the Kogut-Susskind ground state.
 *
 * # Safety
 * `sector` must be a live handle; `e_mean` and `e2_mean` must hold
 * `n_links` entries each.
 */
enum FluxlatStatus fluxlat_ks_field_means(const struct FluxlatSector *sector,
                                          double g2,
                                          double *e_mean,
                                          double *e2_mean,
                                          uintptr_t n_links);

/**
 * Static potential `V(R)` for each separation in `r_list`, written to
 * `v_out` in the same order. Separations must be even.
 *
 * # Safety
 * `geom` must be a live handle; `r_list` and `v_out` must hold `n`
 * entries each.
 */
enum FluxlatStatus fluxlat_static_potential(const struct FluxlatGeometry *geom,
                                            double g2,
                                            uint8_t trunc,
                                            const uintptr_t *r_list,
                                            uintptr_t n,
                                            double *v_out);

/**
 * Message of the last failed call on this thread; empty if it succeeded.
 * The pointer stays valid until the next call on the same thread.
 */
const char *fluxlat_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *fluxlat_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLUXLAT_H */
