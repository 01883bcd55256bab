/* C interface to the isi-bounds library. Generated by cbindgen; do not edit. */

#ifndef ISI_BOUNDS_H
#define ISI_BOUNDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of an interface call.
typedef enum IsiStatus {
  // The call succeeded and any output struct is fully written.
  IsiStatus_Ok = 0,
  // A required pointer argument was null.
  IsiStatus_NullPointer = 1,
  // An argument was malformed (bad name, empty taps, zero energy, ...).
  IsiStatus_InvalidArgument = 2,
  // The bound pipeline rejected the request or failed numerically.
  IsiStatus_Pipeline = 3,
  // The trellis simulation rejected the request or failed.
  IsiStatus_Simulation = 4,
} IsiStatus;

// Opaque channel handle; create with `isi_channel_builtin` or
// `isi_channel_from_taps`, release with `isi_channel_free`.
typedef struct IsiChannel IsiChannel;

// One evaluated grid point. Mirrors the library's bound record; all
// entropy-like fields are in nats.
typedef struct IsiBoundPoint {
  double snr_db;
  // Cluster count that was asked for.
  size_t requested_m;
  // Cluster count actually used (clipped to the retained tap count).
  size_t m;
  // Signal-to-distortion ratio at the equalizer output.
  double r;
  // Gaussian fraction of the equalizer-output disturbance, in (0, 1].
  double phi;
  // Certified bound on the normalized interference magnitude sum.
  double rho_max;
  // Normalized interference standard deviation.
  double sigma_rho;
  // Certified magnitude-sum bound on the truncated tap tail.
  double tail_bound;
  // Number of equalizer taps retained by the truncation rule.
  size_t k_used;
  // Conjectured-baseline objective.
  double f_slc;
  // Lower bound on the mismatched objective.
  double f_l;
  // Chord upper bound on the mismatched objective.
  double f_u1;
  // Slope upper bound on the mismatched objective.
  double f_u2;
  // log|alphabet| minus `f_slc`.
  double c_slc;
  // Certified rate lower bound from `f_u1`.
  double c_l1;
  // Certified rate lower bound from `f_u2`.
  double c_l2;
  // log|alphabet|, the rate ceiling.
  double log_alphabet;
} IsiBoundPoint;

// Monte-Carlo information-rate estimate, in nats per channel use.
typedef struct IsiSirEstimate {
  double rate_nats;
  double stderr_nats;
  uint64_t n_symbols;
  uint64_t seed;
} IsiSirEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the error message recorded by the most recent failing call on
// this thread, or an empty string.
//
// The pointer stays valid until the next failing call on the same
// thread; copy the string if it must outlive that.
const char *isi_last_error(void);

// Library version as a static NUL-terminated string.
const char *isi_version(void);

// Converts nats to bits.
double isi_nats_to_bits(double nats);

// Looks up a built-in channel by name or alias (`dicode`, `ch1`, ...,
// as listed by the CLI `channels` verb). Returns null and records an
// error if the name is unknown.
//
// # Safety
// `name` must be a valid NUL-terminated C string, readable for its full
// length.
struct IsiChannel *isi_channel_builtin(const char *name);

// Builds a channel from tap arrays. `taps_im` may be null for a purely
// real response; `quaternary` selects the four-point complex input
// alphabet instead of the binary one. Returns null and records an error
// on invalid input (empty taps, all-zero taps, or complex taps with the
// binary alphabet).
//
// # Safety
// `taps_re` (and `taps_im` when non-null) must point to `n_taps`
// readable doubles.
struct IsiChannel *isi_channel_from_taps(const double *taps_re,
                                         const double *taps_im,
                                         size_t n_taps,
                                         bool quaternary);

// Releases a channel handle. Null is accepted and ignored.
//
// # Safety
// `ch` must be null or a pointer obtained from `isi_channel_builtin` or
// `isi_channel_from_taps` that has not been freed already.
void isi_channel_free(struct IsiChannel *ch);

// Evaluates the bound family for one channel at one SNR and cluster
// count. `adaptive` swaps the fixed Gauss-Hermite rule for adaptive
// integration (slower, used for cross-checks).
//
// # Safety
// `ch` must be a live channel handle and `out` a writable pointer to an
// `IsiBoundPoint`.
enum IsiStatus isi_bound_point(const struct IsiChannel *ch,
                               double snr_db,
                               size_t m,
                               bool adaptive,
                               struct IsiBoundPoint *out);

// Runs the seeded trellis simulation and writes the information-rate
// estimate. Results are deterministic in (channel, snr_db, n_symbols,
// seed).
//
// # Safety
// `ch` must be a live channel handle and `out` a writable pointer to an
// `IsiSirEstimate`.
enum IsiStatus isi_sir_estimate(const struct IsiChannel *ch,
                                double snr_db,
                                uint64_t n_symbols,
                                uint64_t seed,
                                struct IsiSirEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISI_BOUNDS_H */
