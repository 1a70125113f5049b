#ifndef EDGEWORTH_H
#define EDGEWORTH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every call.
 */
typedef enum EwStatus {
  EW_STATUS_OK = 0,
  EW_STATUS_NULL_POINTER = 1,
  /*
   argument outside the mathematical domain
   */
  EW_STATUS_DOMAIN = 2,
  /*
   output buffer too small; the required size was written
   */
  EW_STATUS_BUFFER_TOO_SMALL = 3,
  /*
   internal panic, caught at the boundary
   */
  EW_STATUS_PANIC = 4,
} EwStatus;

/*
 Lattice correction variant.
 */
typedef enum EwVariant {
  EW_VARIANT_FULL = 0,
  EW_VARIANT_SIMPLIFIED = 1,
} EwVariant;

/*
 Opaque expansion model.
 */
typedef struct EwModel EwModel;

/*
 Opaque verification report for one `n`.
 */
typedef struct EwReport EwReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *ew_last_error(void);

/*
 `P(Bi(n, m/n) <= m)` (or `< m` when `strict`), rounded to double.

 # Safety
 `out` must be valid for writes.
 */
enum EwStatus ew_chvatal_q(uint64_t n, uint64_t m, bool strict, double *out);

/*
 Exact `P(Bi(n, m/n) <= m)` (or `< m`) as a NUL-terminated `num/den`.

 # Safety
 `buf` must be valid for `len` bytes; `needed` may be null.
 */
enum EwStatus ew_chvatal_q_exact(uint64_t n,
                                 uint64_t m,
                                 bool strict,
                                 char *buf,
                                 size_t len,
                                 size_t *needed);

/*
 `P(Po(rate_num / rate_den) <= t)` (or `< t`) with a certified bound:
 the true value lies within `error` of `value`, up to double rounding.

 # Safety
 `value` and `error` must be valid for writes.
 */
enum EwStatus ew_poisson_cdf(int64_t rate_num,
                             int64_t rate_den,
                             int64_t t,
                             bool strict,
                             uint32_t precision_bits,
                             double *value,
                             double *error);

/*
 Order-`k` expansion for sums of Bernoulli(`p_num / p_den`) variables.
 Free the handle with [`ew_model_free`].

 # Safety
 `out` must be valid for writes.
 */
enum EwStatus ew_model_bernoulli(int64_t p_num, int64_t p_den, uint32_t k, struct EwModel **out);

/*
 Order-`k` expansion for sums of Poisson(1) variables.

 # Safety
 `out` must be valid for writes.
 */
enum EwStatus ew_model_poisson1(uint32_t k, struct EwModel **out);

/*
 # Safety
 `model` must come from a model constructor and not be freed twice.
 */
void ew_model_free(struct EwModel *model);

/*
 Lattice-corrected approximation of `P(S_n <= n mu + x sigma sqrt(n))`
 (`<` when `strict`).

 # Safety
 `model` must be a live handle; `out` must be valid for writes.
 */
enum EwStatus ew_model_cdf(const struct EwModel *model,
                           uint64_t n,
                           double x,
                           enum EwVariant variant,
                           bool strict,
                           double *out);

/*
 Approximation of `P(S_n <= t)` (`< t` when `strict`) at an integer `t`.

 # Safety
 `model` must be a live handle; `out` must be valid for writes.
 */
enum EwStatus ew_model_cdf_at(const struct EwModel *model,
                              uint64_t n,
                              int64_t t,
                              enum EwVariant variant,
                              bool strict,
                              double *out);

/*
 Expansion of `P(S_n <= n mu)` (or `<`) when `n mu` is an integer.

 # Safety
 `model` must be a live handle; `out` must be valid for writes.
 */
enum EwStatus ew_model_integer_mean(const struct EwModel *model,
                                    uint64_t n,
                                    bool strict,
                                    double *out);

/*
 Coefficient of `n^{-j/2}` in the integer-mean expansion.

 # Safety
 `model` must be a live handle; `out` must be valid for writes.
 */
enum EwStatus ew_model_integer_mean_coefficient(const struct EwModel *model,
                                                uint32_t j,
                                                bool strict,
                                                double *out);

/*
 Whether `sigma sqrt(n) >= ln n`.

 # Safety
 `model` must be a live handle; `out` must be valid for writes.
 */
enum EwStatus ew_model_within_guarantee(const struct EwModel *model, uint64_t n, bool *out);

/*
 Exact location of the minimum of `P(Bi(n, m/n) <= m)` over `m`.
 Free the handle with [`ew_report_free`].

 # Safety
 `out` must be valid for writes.
 */
enum EwStatus ew_verify(uint64_t n, struct EwReport **out);

/*
 # Safety
 `report` must come from [`ew_verify`] and not be freed twice.
 */
void ew_report_free(struct EwReport *report);

/*
 # Safety
 `report` must be a live handle; the out-pointers must be valid.
 */
enum EwStatus ew_report_argmin(const struct EwReport *report, uint64_t *argmin, uint64_t *target);

/*
 # Safety
 `report` must be a live handle; the out-pointers must be valid.
 */
enum EwStatus ew_report_flags(const struct EwReport *report, bool *unimodal, bool *matches);

/*
 One-line JSON summary, owned by the report.

 # Safety
 `report` must be a live handle. The string lives as long as the report.
 */
const char *ew_report_json(const struct EwReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EDGEWORTH_H */
