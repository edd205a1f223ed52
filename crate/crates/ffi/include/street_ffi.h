#ifndef STREET_FFI_H
#define STREET_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Built-in charsets.
 */
typedef enum StreetCharsetKind {
  /**
   * 134 classes for full-size models.
   */
  STREET_CHARSET_KIND_FULL = 0,
  /**
   * 16 classes for the mini preset.
   */
  STREET_CHARSET_KIND_MINI = 1,
} StreetCharsetKind;

/**
 * Result of every call.
 */
typedef enum StreetStatus {
  STREET_STATUS_OK = 0,
  STREET_STATUS_NULL_ARGUMENT = 1,
  STREET_STATUS_INVALID_UTF8 = 2,
  STREET_STATUS_IO = 3,
  STREET_STATUS_CORRUPT_DATA = 4,
  STREET_STATUS_INVALID_ARGUMENT = 5,
  STREET_STATUS_BUFFER_TOO_SMALL = 6,
  STREET_STATUS_END_OF_STREAM = 7,
  STREET_STATUS_PANIC = 8,
} StreetStatus;

typedef struct StreetCharset StreetCharset;

typedef struct StreetExample StreetExample;

typedef struct StreetModel StreetModel;

typedef struct StreetReader StreetReader;

/**
 * Corpus scores, as fractions.
 */
typedef struct StreetScores {
  double recall;
  double precision;
  double sequence_error;
  size_t examples;
} StreetScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call on the same thread.
 */
const char *street_last_error(void);

/**
 * Library version, static storage.
 */
const char *street_version(void);

/**
 * Map-style Title Case fold of `input`.
 *
 * # Safety
 * `input` must be a NUL-terminated string; `buf` must hold `len` bytes;
 * `needed` may be null.
 */
enum StreetStatus street_title_case_fold(const char *input, char *buf, size_t len, size_t *needed);

/**
 * Scores `count` parallel truth/output strings.
 *
 * # Safety
 * `truths` and `outputs` must each point to `count` NUL-terminated
 * strings; `out` must be writable.
 */
enum StreetStatus street_score(const char *const *truths,
                               const char *const *outputs,
                               size_t count,
                               struct StreetScores *out);

/**
 * Total weight count of a preset (`"full"` or `"mini"`).
 *
 * # Safety
 * `preset` must be a NUL-terminated string; `out` must be writable.
 */
enum StreetStatus street_params_total(const char *preset, size_t *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum StreetStatus street_charset_builtin(enum StreetCharsetKind kind, struct StreetCharset **out);

/**
 * Loads a `<id>\t<string>` charset file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum StreetStatus street_charset_load(const char *path, struct StreetCharset **out);

/**
 * # Safety
 * `charset` must be a live handle; `out` must be writable.
 */
enum StreetStatus street_charset_size(const struct StreetCharset *charset, size_t *out);

/**
 * # Safety
 * `charset` must be null or a handle not yet freed.
 */
void street_charset_free(struct StreetCharset *charset);

/**
 * Loads a checkpoint written by `street train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum StreetStatus street_model_load(const char *path, struct StreetModel **out);

/**
 * Input image size in pixels: `height` rows of `width` RGB pixels.
 *
 * # Safety
 * `model` must be a live handle; `height` and `width` must be writable.
 */
enum StreetStatus street_model_input_size(const struct StreetModel *model,
                                          size_t *height,
                                          size_t *width);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum StreetStatus street_model_classes(const struct StreetModel *model, size_t *out);

/**
 * Transcribes a row-major RGB image of the model's input size.
 *
 * # Safety
 * Handles must be live; `rgb` must hold `rgb_len` bytes; `buf` must hold
 * `len` bytes; `needed` may be null.
 */
enum StreetStatus street_model_predict(const struct StreetModel *model,
                                       const struct StreetCharset *charset,
                                       const uint8_t *rgb,
                                       size_t rgb_len,
                                       char *buf,
                                       size_t len,
                                       size_t *needed);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void street_model_free(struct StreetModel *model);

/**
 * Opens a record file for sequential reading.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum StreetStatus street_reader_open(const char *path, struct StreetReader **out);

/**
 * Reads the next example. Returns `EndOfStream` after the last one.
 *
 * # Safety
 * `reader` must be a live handle; `out` must be writable.
 */
enum StreetStatus street_reader_next(struct StreetReader *reader, struct StreetExample **out);

/**
 * # Safety
 * `reader` must be null or a handle not yet freed.
 */
void street_reader_free(struct StreetReader *reader);

/**
 * Truth text of an example.
 *
 * # Safety
 * `example` must be a live handle; `buf` must hold `len` bytes.
 */
enum StreetStatus street_example_text(const struct StreetExample *example,
                                      char *buf,
                                      size_t len,
                                      size_t *needed);

/**
 * Borrowed view of the example's RGB pixels, valid while the handle is.
 *
 * # Safety
 * `example` must be a live handle; outputs must be writable.
 */
enum StreetStatus street_example_image(const struct StreetExample *example,
                                       const uint8_t **rgb,
                                       size_t *rgb_len,
                                       size_t *height,
                                       size_t *width);

/**
 * # Safety
 * `example` must be null or a handle not yet freed.
 */
void street_example_free(struct StreetExample *example);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STREET_FFI_H */
