#ifndef WVSNR_H
#define WVSNR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum WvsStatus {
  WVS_STATUS_OK = 0,
  WVS_STATUS_NULL_POINTER = 1,
  WVS_STATUS_INVALID_ARGUMENT = 2,
  WVS_STATUS_DEGENERATE_DARK_PORT = 3,
  WVS_STATUS_INTRACTABLE = 4,
  WVS_STATUS_CONFIG = 5,
  WVS_STATUS_IO = 6,
  WVS_STATUS_INTERNAL = 7,
} WvsStatus;

// Opaque configuration handle.
typedef struct WvsConfig WvsConfig;

// Dark-port mass, centroid (m) and variance (m²).
typedef struct WvsMoments {
  double mass;
  double mean;
  double variance;
} WvsMoments;

// Closed-form quantities for one configuration (SI units).
typedef struct WvsAnalytic {
  double n;
  double d;
  double amplification;
  double p_ps;
  double alpha;
  double alpha_f;
  double snr_sd;
  double snr_wva;
  double snr_focused;
} WvsAnalytic;

// Monte Carlo estimates for the standard and weak-value setups.
typedef struct WvsSimulation {
  double snr_sd;
  double snr_sd_se;
  double snr_wva;
  double snr_wva_se;
  double ratio;
  double alpha;
} WvsSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into this library on the same thread.
const char *wvs_last_error(void);

// Library version as a static NUL-terminated string.
const char *wvs_version(void);

// New configuration holding the default large-interferometer setup.
struct WvsConfig *wvs_config_new(void);

// Parses a config file into a new handle stored in `*out`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum WvsStatus wvs_config_from_file(const char *path, struct WvsConfig **out);

// Sets one key using the config-file syntax, e.g. `("sigma", "1.2mm")`.
//
// # Safety
// `cfg` must come from this library; `key` and `value` must be
// NUL-terminated strings.
enum WvsStatus wvs_config_set(struct WvsConfig *cfg, const char *key, const char *value);

// Releases a configuration handle. NULL is ignored.
//
// # Safety
// `cfg` must come from this library and not be used afterwards.
void wvs_config_free(struct WvsConfig *cfg);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void wvs_string_free(char *s);

// `sqrt(2/pi) sqrt(n) d / sigma`.
double wvs_snr_sd(double n, double d, double sigma);

// Exact dark-port moments for beam radius `sigma`, phase `phi` and
// transverse kick `kappa` (1/m).
//
// # Safety
// `out` must be a valid pointer.
enum WvsStatus wvs_dark_port_moments(double sigma,
                                     double phi,
                                     double kappa,
                                     struct WvsMoments *out);

// Closed-form quantities for `cfg`.
//
// # Safety
// `cfg` must come from this library and `out` must be a valid pointer.
enum WvsStatus wvs_analytic(const struct WvsConfig *cfg, struct WvsAnalytic *out);

// Human-readable analytic report in `*out` (free with `wvs_string_free`).
//
// # Safety
// `cfg` must come from this library and `out` must be a valid pointer.
enum WvsStatus wvs_analytic_report(const struct WvsConfig *cfg, char **out);

// Monte Carlo run of both setups with `trials` trials.
//
// # Safety
// `cfg` must come from this library and `out` must be a valid pointer.
enum WvsStatus wvs_simulate(const struct WvsConfig *cfg,
                            size_t trials,
                            uint64_t seed,
                            struct WvsSimulation *out);

// Sweep CSV in `*out` (free with `wvs_string_free`).
//
// `param` is one of `drive_mV`, `beam_radius`, `detector_distance`,
// `power`; `from`/`to` are SI values, NaN selects the default range.
// `engine` is `analytic`, `mc` or `both`.
//
// # Safety
// `cfg` must come from this library, `param` and `engine` must be
// NUL-terminated strings and `out` a valid pointer.
enum WvsStatus wvs_sweep_csv(const struct WvsConfig *cfg,
                             const char *param,
                             double from,
                             double to,
                             size_t steps,
                             const char *engine,
                             size_t trials,
                             uint64_t seed,
                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WVSNR_H */
