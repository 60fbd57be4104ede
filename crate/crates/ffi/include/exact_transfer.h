#ifndef EXACT_TRANSFER_H
#define EXACT_TRANSFER_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EtStatus {
  ET_STATUS_OK = 0,
  ET_STATUS_NULL_POINTER = 1,
  ET_STATUS_INVALID_ARGUMENT = 2,
  ET_STATUS_NOT_UNITARY = 3,
  ET_STATUS_NO_CONVERGENCE = 4,
  ET_STATUS_CONFIG = 5,
  ET_STATUS_IO = 6,
  // The run finished but at least one gate failed.
  ET_STATUS_GATE_FAILED = 7,
  ET_STATUS_BUFFER_TOO_SMALL = 8,
  ET_STATUS_PANIC = 9,
} EtStatus;

typedef enum EtChainModel {
  // Equal couplings `J` on every bond.
  ET_CHAIN_MODEL_UNIFORM = 0,
  // `J_j = J sqrt(j (N - j)) / 2`.
  ET_CHAIN_MODEL_CHRISTANDL = 1,
} EtChainModel;

typedef enum EtParticleKind {
  ET_PARTICLE_KIND_HARDCORE = 0,
  ET_PARTICLE_KIND_FERMION = 1,
  ET_PARTICLE_KIND_BOSON = 2,
} EtParticleKind;

typedef enum EtExchangePolicy {
  ET_EXCHANGE_POLICY_IDENTITY_ON_MEDIUM = 0,
  ET_EXCHANGE_POLICY_FULL_MIRROR = 1,
} EtExchangePolicy;

// A chain Hamiltonian on one particle-number sector.
typedef struct EtChain EtChain;

// `G = P exp(-i H tau)` for a chain and a region partition.
typedef struct EtQuasiEvolution EtQuasiEvolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *et_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the next call.
const char *et_last_error(void);

// Builds a chain of `sites` sites holding exactly `particles` particles.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum EtStatus et_chain_new(enum EtChainModel model,
                           enum EtParticleKind kind,
                           size_t sites,
                           double j,
                           size_t particles,
                           struct EtChain **out);

// Dimension of the chain's sector.
//
// # Safety
// `chain` must be NULL or a live handle from [`et_chain_new`]; `dim` must be writable.
enum EtStatus et_chain_dim(const struct EtChain *chain, size_t *dim);

// # Safety
// `chain` must be NULL or a handle from [`et_chain_new`] that has not been freed.
void et_chain_free(struct EtChain *chain);

// Forms `G = P U(tau)` for 1-based site lists `a` and `b`.
//
// # Safety
// `chain` must be a live handle, `a` and `b` must point to `a_len` and
// `b_len` readable values, and `out` must be writable.
enum EtStatus et_quasi_evolution_new(const struct EtChain *chain,
                                     double tau,
                                     const size_t *a,
                                     size_t a_len,
                                     const size_t *b,
                                     size_t b_len,
                                     enum EtExchangePolicy policy,
                                     struct EtQuasiEvolution **out);

// # Safety
// `qe` must be a live handle and `dim` writable.
enum EtStatus et_quasi_evolution_dim(const struct EtQuasiEvolution *qe, size_t *dim);

// # Safety
// `qe` must be NULL or a handle that has not been freed.
void et_quasi_evolution_free(struct EtQuasiEvolution *qe);

// Writes the eigenphases of `G` and the transmission residual
// `||rho_A(Psi_k) - rho_B(U Psi_k)||` of each eigenvector. Both buffers
// need room for the dimension of `G`.
//
// # Safety
// `qe` must be a live handle; `phases` and `residuals` must each point to `capacity` writable values.
enum EtStatus et_transmission_set(const struct EtQuasiEvolution *qe,
                                  double cluster_tol,
                                  double *phases,
                                  double *residuals,
                                  size_t capacity);

// Transfer fidelity of one particle from the first site of `a` to the
// region `b` after time `tau`. `phase` receives the transfer phase, or NaN
// when the transfer is not perfect.
//
// # Safety
// `chain` must be a live handle, the site arrays readable for their lengths, and both outputs writable.
enum EtStatus et_pst_fidelity(const struct EtChain *chain,
                              double tau,
                              const size_t *a,
                              size_t a_len,
                              const size_t *b,
                              size_t b_len,
                              double *fidelity,
                              double *phase);

// Runs a TOML or JSON run configuration and returns the JSON report in
// `report`, to be released with [`et_string_free`]. Returns
// `ET_STATUS_GATE_FAILED` with the report still set when a gate fails.
//
// # Safety
// `config` must be a NUL-terminated string and `report` writable.
enum EtStatus et_run_config(const char *config, char **report);

// # Safety
// `s` must be NULL or a string returned by this library that has not been freed.
void et_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXACT_TRANSFER_H */
