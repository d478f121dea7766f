// Copyright 2026 The nclosure Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the nclosure library. Objects are opaque handles created
 * and released through this API. Every fallible call returns an ncl_status;
 * on failure ncl_last_error() describes the problem for the calling thread.
 */

#ifndef NCLOSURE_NCLOSURE_H
#define NCLOSURE_NCLOSURE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NCL_API __declspec(dllexport)
#elif defined(__GNUC__)
#define NCL_API __attribute__((visibility("default")))
#else
#define NCL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ncl_status {
  NCL_OK = 0,
  NCL_ERR_INVALID_ARGUMENT = 1,
  NCL_ERR_OUT_OF_RANGE = 2,
  NCL_ERR_BLOW_UP = 3,
  NCL_ERR_CONFIG = 4,
  NCL_ERR_IO = 5,
  NCL_ERR_INTERNAL = 6
} ncl_status;

typedef struct ncl_config ncl_config;
typedef struct ncl_net ncl_net;

NCL_API const char* ncl_version(void);

/* Message for the most recent failure on this thread ("" if none). */
NCL_API const char* ncl_last_error(void);

/* Human-readable summary from the most recent successful driver call. */
NCL_API const char* ncl_last_summary(void);

NCL_API const char* ncl_status_name(ncl_status s);

/* Experiment configuration (JSON). */
NCL_API ncl_status ncl_config_load(const char* path, ncl_config** out);
NCL_API ncl_status ncl_config_parse(const char* json_text, ncl_config** out);
NCL_API void ncl_config_free(ncl_config* cfg);
NCL_API ncl_status ncl_config_set_seed(ncl_config* cfg, uint64_t seed);
NCL_API ncl_status ncl_config_set_out_dir(ncl_config* cfg, const char* dir);

/* Drivers. Output files go to the configured output directory. */
NCL_API ncl_status ncl_generate_data(const ncl_config* cfg);
NCL_API ncl_status ncl_train(const ncl_config* cfg);
/* window: "train", "val", "future" or "all"; weights_path may be NULL or
 * "none" to evaluate the base model alone. */
NCL_API ncl_status ncl_evaluate(const ncl_config* cfg, const char* weights_path,
                                const char* window);
/* max_rel_err may be NULL. */
NCL_API ncl_status ncl_gradcheck(const ncl_config* cfg, double* max_rel_err);

/* Networks. */
NCL_API ncl_status ncl_net_load(const char* path, ncl_net** out);
/* name: "shock_memory", "reduced_memory", "reduced_markovian",
 * "tracer_markovian" (default constants) or "interpretable_linear". */
NCL_API ncl_status ncl_net_preset(const char* name, ncl_net** out);
NCL_API void ncl_net_free(ncl_net* net);
NCL_API ncl_status ncl_net_shape(const ncl_net* net, size_t* n_in,
                                 size_t* n_out);
NCL_API ncl_status ncl_net_param_counts(const ncl_net* net, size_t* total,
                                        size_t* effective);
/* x: n_in x n_samples, y: n_out x n_samples, both column-major. */
NCL_API ncl_status ncl_net_forward(const ncl_net* net, const double* x,
                                   size_t n_samples, double* y);

/* Training-protocol arithmetic. */
NCL_API ncl_status ncl_iterations_per_epoch(int n_steps, int batch_size,
                                            int batch_time, int* out);
NCL_API double ncl_lr_at(long iter, double lr0, double decay_rate,
                         double decay_steps);

#ifdef __cplusplus
}
#endif

#endif /* NCLOSURE_NCLOSURE_H */
