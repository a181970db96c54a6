#ifndef BARRON_BRIDGE_H
#define BARRON_BRIDGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BbQuadRule {
  BB_QUAD_RULE_MIDPOINT = 0,
  BB_QUAD_RULE_TRAPEZOID = 1,
  BB_QUAD_RULE_GAUSS_LEGENDRE = 2,
} BbQuadRule;

typedef enum BbStatus {
  BB_STATUS_OK = 0,
  BB_STATUS_NULL_POINTER = 1,
  BB_STATUS_INVALID_UTF8 = 2,
  BB_STATUS_INVALID_ARGUMENT = 3,
  BB_STATUS_DIMENSION_MISMATCH = 4,
  BB_STATUS_JSON = 5,
  BB_STATUS_IO = 6,
  BB_STATUS_UNKNOWN_ACTIVATION = 7,
  BB_STATUS_NO_CONSTRUCTION = 8,
  // Ill-conditioned solve, quadrature non-convergence, non-finite input.
  BB_STATUS_NUMERICAL = 9,
  // A construction's precondition does not hold (radius, order, kink, ...).
  BB_STATUS_PRECONDITION = 10,
  // Certificate check ran and failed.
  BB_STATUS_CERTIFICATE_FAILED = 11,
  BB_STATUS_PANIC = 99,
} BbStatus;

// Opaque network handle.
typedef struct BbNet BbNet;

// Conversion options. Fields set to NaN are treated as absent.
typedef struct BbConvertOptions {
  enum BbQuadRule quad_rule;
  size_t quad_nodes;
  // Taylor expansion point; NaN picks it automatically.
  double expansion_point;
  // Required for smooth to RePU(s >= 2).
  double radius;
  // Shift for derivative-to-antiderivative conversions.
  double h;
  // Nonzero: check a user substitution measure pointwise before use.
  int32_t check_gamma;
} BbConvertOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Defaults: Gauss-Legendre with 256 nodes, automatic expansion point, no
// radius, no shift, gamma check on.
struct BbConvertOptions bb_convert_options_default(void);

// Library version, static storage.
const char *bb_version(void);

// Message of the last failed call on this thread; empty after a success.
// Valid until the next `bb_*` call on the same thread.
const char *bb_last_error(void);

// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void bb_string_free(char *s);

// Parses a network from its JSON form.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum BbStatus bb_net_from_json(const char *json, struct BbNet **out);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum BbStatus bb_net_read(const char *path, struct BbNet **out);

// Serializes a network; free the result with [`bb_string_free`].
//
// # Safety
// `net` must be a live handle; `out` must be writable.
enum BbStatus bb_net_to_json(const struct BbNet *net, char **out);

// # Safety
// `net` must be null or a handle from this library, not yet freed.
void bb_net_free(struct BbNet *net);

// Input dimension `d`.
//
// # Safety
// `net` must be a live handle; `out` must be writable.
enum BbStatus bb_net_dim(const struct BbNet *net, size_t *out);

// # Safety
// `net` must be a live handle; `out` must be writable.
enum BbStatus bb_net_atom_count(const struct BbNet *net, size_t *out);

// Evaluates the network at `x[0..len]`; `len` must equal the dimension.
//
// # Safety
// `x` must point to `len` readable doubles; `out` must be writable.
enum BbStatus bb_net_evaluate(const struct BbNet *net, const double *x, size_t len, double *out);

// Representation norm value (Lipschitz form, or RePU form for RePU nets).
//
// # Safety
// `net` must be a live handle; `out` must be writable.
enum BbStatus bb_net_norm(const struct BbNet *net, double *out);

// Full norm report as JSON.
//
// # Safety
// `net` must be a live handle; `out` must be writable.
enum BbStatus bb_net_norm_json(const struct BbNet *net, char **out);

// Sup distance on `[-1, 1]^d`. `sampler` is `grid:N`, `rand:M` or
// `rand:M:SEED`; null selects the default for the dimension (seed 0).
//
// # Safety
// `a`, `b` must be live handles; `sampler` null or NUL-terminated; `out`
// writable.
enum BbStatus bb_sup_error(const struct BbNet *a,
                           const struct BbNet *b,
                           const char *sampler,
                           double *out);

// Converts `net` to the activation named `target` (`relu`, `repu3`, ...).
//
// `gamma_json` is an optional substitution measure `{"d":1,"atoms":[...]}`.
// `report` (optional, may be null) receives
// `{"route":..., "certificate":..., "error_bound":...}`.
//
// # Safety
// Pointers must be valid as documented; `opts` may be null for defaults.
enum BbStatus bb_convert(const struct BbNet *net,
                         const char *target,
                         const struct BbConvertOptions *opts,
                         const char *gamma_json,
                         struct BbNet **out,
                         char **report);

// Exact RePU(s) representation of a polynomial given as JSON
// `{"d":..,"s":..,"terms":[{"alpha":[..],"c":..}]}`. `scale` is `lattice`
// (null), `compact[:ratio]` or `classic`.
//
// # Safety
// Strings must be NUL-terminated (`scale` may be null); `out` writable.
enum BbStatus bb_poly_to_repu(const char *poly_json, const char *scale, struct BbNet **out);

// RePU(s) net for a finite spectral representation given as JSON
// `{"d":..,"terms":[{"xi":[..],"re":..,"im":..}]}`. Only the quadrature
// fields of `opts` are used. `cert` (optional) receives the certificate.
//
// # Safety
// Pointers must be valid as documented; `opts` may be null for defaults.
enum BbStatus bb_spectral_to_repu(const char *spectral_json,
                                  uint32_t s,
                                  const struct BbConvertOptions *opts,
                                  struct BbNet **out,
                                  char **cert);

// Rechecks a certificate against the nets. Returns
// [`BbStatus::CertificateFailed`] when the inequality or a recorded norm does
// not hold; the check report (optional `report`) is written either way.
// `source` may be null for spectral certificates.
//
// # Safety
// Pointers must be valid as documented.
enum BbStatus bb_check_certificate(const char *cert_json,
                                   const struct BbNet *source,
                                   const struct BbNet *target,
                                   double tol_rel,
                                   char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BARRON_BRIDGE_H */
