#ifndef ZRP_H
#define ZRP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible function.
typedef enum ZrpStatus {
  ZRP_STATUS_OK = 0,
  ZRP_STATUS_NULL_POINTER = 1,
  ZRP_STATUS_INVALID_ARGUMENT = 2,
  ZRP_STATUS_STATE_SPACE_TOO_LARGE = 3,
  ZRP_STATUS_IO = 4,
  ZRP_STATUS_PANIC = 5,
} ZrpStatus;

// Exact generator and stationary law of a small system.
typedef struct ZrpExactChain ZrpExactChain;

// Hydrodynamic solution for one profile.
typedef struct ZrpHydro ZrpHydro;

// Rate function handle.
typedef struct ZrpRate ZrpRate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *zrp_last_error(void);

// Clears the last error message of this thread.
void zrp_clear_error(void);

// Builds a rate function from its normalized head `r(1..=len)`.
//
// # Safety
// `head` must point to `len` readable doubles; `out` must be writable.
enum ZrpStatus zrp_rate_new(const double *head, size_t len, struct ZrpRate **out);

// Builds a preset rate function (`"rate-one"`, `"threshold-<k>"`).
//
// # Safety
// `name` must be a nul-terminated string; `out` must be writable.
enum ZrpStatus zrp_rate_preset(const char *name, struct ZrpRate **out);

// # Safety
// `rate` must come from `zrp_rate_new`/`zrp_rate_preset` and not be used again.
void zrp_rate_free(struct ZrpRate *rate);

// `r(k)`.
//
// # Safety
// `rate` must be a live handle and `out` writable.
enum ZrpStatus zrp_rate_value(const struct ZrpRate *rate, uint64_t k, double *out);

// Inverse density map `Ψ^{-1}(s)`.
//
// # Safety
// `rate` must be a live handle and `out` writable.
enum ZrpStatus zrp_psi_inv(const struct ZrpRate *rate, double s, double *out);

// `Φ(t) = ∫_0^t ds / (1 - Ψ^{-1}(s))`.
//
// # Safety
// `rate` must be a live handle and `out` writable.
enum ZrpStatus zrp_phi(const struct ZrpRate *rate, double t, double *out);

// `γ = Φ(ρ)`.
//
// # Safety
// `rate` must be a live handle and `out` writable.
enum ZrpStatus zrp_gamma(const struct ZrpRate *rate, double rho, double *out);

// Solves the dissolution problem for profile `u[0..len]` at density `rho`.
//
// # Safety
// `rate` must be a live handle, `u` must point to `len` doubles and `out`
// must be writable.
enum ZrpStatus zrp_hydro_new(const struct ZrpRate *rate,
                             const double *u,
                             size_t len,
                             double rho,
                             struct ZrpHydro **out);

// # Safety
// `h` must come from `zrp_hydro_new` and not be used again.
void zrp_hydro_free(struct ZrpHydro *h);

// Dissolution function `f(t)`.
//
// # Safety
// `h` must be a live handle and `out` writable.
enum ZrpStatus zrp_hydro_f(const struct ZrpHydro *h, double t, double *out);

// Rescaled mixing time `f^{-1}(u_1)` (zero without a solid phase).
//
// # Safety
// `h` must be a live handle and `out` writable.
enum ZrpStatus zrp_hydro_prediction(const struct ZrpHydro *h, double *out);

// Breakpoints `t_1..t_L`. Writes at most `cap` values and stores `L` in
// `len_out`.
//
// # Safety
// `h` must be a live handle, `buf` must have room for `cap` doubles (may
// be null if `cap` is 0) and `len_out` must be writable.
enum ZrpStatus zrp_hydro_breakpoints(const struct ZrpHydro *h,
                                     double *buf,
                                     size_t cap,
                                     size_t *len_out);

// Builds the exact chain on `n` sites with `m` particles.
//
// # Safety
// `rate` must be a live handle and `out` writable.
enum ZrpStatus zrp_exact_new(const struct ZrpRate *rate,
                             size_t n,
                             uint64_t m,
                             struct ZrpExactChain **out);

// # Safety
// `c` must come from `zrp_exact_new` and not be used again.
void zrp_exact_free(struct ZrpExactChain *c);

// Number of states.
//
// # Safety
// `c` must be a live handle and `out` writable.
enum ZrpStatus zrp_exact_len(const struct ZrpExactChain *c, size_t *out);

// Total variation between the law at time `t` from `x[0..n]` and `π`.
//
// # Safety
// `c` must be a live handle, `x` must point to `n` values and `out` must be writable.
enum ZrpStatus zrp_exact_tv(const struct ZrpExactChain *c,
                            const uint32_t *x,
                            size_t n,
                            double t,
                            double *out);

// Mixing time from `x[0..n]` at level `eps`.
//
// # Safety
// `c` must be a live handle, `x` must point to `n` values and `out` must be writable.
enum ZrpStatus zrp_exact_tmix(const struct ZrpExactChain *c,
                              const uint32_t *x,
                              size_t n,
                              double eps,
                              double *out);

// Runs the process from `x[0..n]` for time `t` and writes the final
// configuration back into `x`.
//
// # Safety
// `rate` must be a live handle and `x` must point to `n` writable values.
enum ZrpStatus zrp_simulate(const struct ZrpRate *rate,
                            uint32_t *x,
                            size_t n,
                            double t,
                            uint64_t seed);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ZRP_H */
