#ifndef IMPACT_SCREEN_H
#define IMPACT_SCREEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum ImpactStatus {
  IMPACT_STATUS_OK = 0,
  IMPACT_STATUS_NULL_ARGUMENT = 1,
  IMPACT_STATUS_INVALID_UTF8 = 2,
  IMPACT_STATUS_CATALOG_IO = 3,
  IMPACT_STATUS_CATALOG_INVALID = 4,
  IMPACT_STATUS_UNKNOWN_MODEL = 5,
  IMPACT_STATUS_AMBIGUOUS_MODEL = 6,
  IMPACT_STATUS_UNKNOWN_COUNTRY = 7,
  IMPACT_STATUS_INVALID_TOKENS = 8,
  IMPACT_STATUS_INVALID_VOLUME = 9,
  IMPACT_STATUS_PARSE_FAILED = 10,
  IMPACT_STATUS_BAD_REQUEST = 11,
  IMPACT_STATUS_INTERNAL = 12,
  IMPACT_STATUS_PANIC = 13,
} ImpactStatus;

// Opaque catalog handle.
typedef struct ImpactCatalog ImpactCatalog;

// Screening band: `low <= central <= high`, in the unit documented by the call.
typedef struct ImpactBand {
  double low;
  double central;
  double high;
} ImpactBand;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads and validates the catalog bundle in directory `dir`.
//
// # Safety
// `dir` is a NUL-terminated path; `out` is valid for one pointer write.
enum ImpactStatus impact_catalog_load(const char *dir, struct ImpactCatalog **out);

// Loads the bundle compiled into the library.
//
// # Safety
// `out` is valid for one pointer write.
enum ImpactStatus impact_catalog_load_default(struct ImpactCatalog **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `catalog` is null or a handle not yet freed.
void impact_catalog_free(struct ImpactCatalog *catalog);

// Number of models in the catalog; 0 for a null handle.
//
// # Safety
// `catalog` is null or a live handle.
size_t impact_catalog_model_count(const struct ImpactCatalog *catalog);

// Per-request inference bands: `energy_wh` in Wh/request, `carbon_g` in
// gCO2e/request. `country` may be null for the model's provider country.
//
// # Safety
// String arguments are NUL-terminated; band pointers are valid for writes.
enum ImpactStatus impact_estimate_inference(const struct ImpactCatalog *catalog,
                                            const char *model,
                                            uint64_t input_tokens,
                                            uint64_t output_tokens,
                                            const char *country,
                                            struct ImpactBand *energy_wh,
                                            struct ImpactBand *carbon_g);

// Training-energy band in GWh.
//
// # Safety
// `model` is NUL-terminated; `energy_gwh` is valid for a write.
enum ImpactStatus impact_estimate_training(const struct ImpactCatalog *catalog,
                                           const char *model,
                                           struct ImpactBand *energy_gwh);

// JSON in, JSON out, with the HTTP API's `/v1/estimate` request and
// response shapes. On an API error `*out_json` holds the error body too.
//
// # Safety
// `request_json` is NUL-terminated; `out_json` is valid for a write.
enum ImpactStatus impact_estimate_json(const struct ImpactCatalog *catalog,
                                       const char *request_json,
                                       char **out_json);

// Parses a description; JSON shaped like `/v1/parse`.
//
// # Safety
// `description` is NUL-terminated; `out_json` is valid for a write.
enum ImpactStatus impact_parse_json(const struct ImpactCatalog *catalog,
                                    const char *description,
                                    char **out_json);

// Observatory table as CSV, byte-identical to the CLI and HTTP exports.
//
// # Safety
// `out_csv` is valid for a write.
enum ImpactStatus impact_observatory_csv(const struct ImpactCatalog *catalog, char **out_csv);

// Methodology version string of the loaded bundle.
//
// # Safety
// `out` is valid for a write.
enum ImpactStatus impact_methodology_version(const struct ImpactCatalog *catalog, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` is null or a string from this library not yet freed.
void impact_string_free(char *s);

// Message of the last failed call on this thread, or null. Valid until the
// next call into this library on the same thread; do not free.
const char *impact_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMPACT_SCREEN_H */
