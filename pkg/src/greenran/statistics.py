"""Ergodic expectations of the combined uplink signal under MMSE estimation + MR combining.

For every link the MMSE channel estimate has covariance
Phi = p_p * tau_p * R (p_p * tau_p * R + sigma^2 I)^{-1} R, and with the
normalized maximum-ratio combiner v = h_est / sqrt(E{||h_est||^2}):

    mu       = E{v^H h}          = sqrt(tr Phi)
    omega_kk = E{|v^H h_k|^2}    = tr Phi + tr(R_k Phi) / tr Phi
    omega_kk'= E{|v^H h_k'|^2}   = tr(R_k' Phi) / tr Phi      (k' != k, orthogonal pilots)
    E{||v||^2} = 1

The closed form is exact; `monte_carlo_statistics` re-estimates the same
quantities from sampled pilots/channels and is the validation oracle.
"""

from dataclasses import dataclass

import numpy as np

from .netmodel import ConfigError, CorrelationSet, FrameConfig

# Samples per accumulation chunk. Chunk seeds are derived per chunk index, so
# the merged estimate is independent of how chunks are distributed to workers.
_CHUNK = 16384


@dataclass(frozen=True)
class CoefficientTensor:
    mu: np.ndarray               # (M, K) >= 0
    omega: np.ndarray            # (M, K, K) >= 0; omega[m, k, k'] = E{|v_mk^H h_mk'|^2}
    noise_coeff: np.ndarray      # (M, K) E{||v||^2}; 1 under the normalized combiner
    mu_se: np.ndarray | None = None      # standard errors (Monte Carlo only)
    omega_se: np.ndarray | None = None


def mmse_statistics(corr: CorrelationSet, frame: FrameConfig) -> CoefficientTensor:
    """Closed-form coefficient tensor for all M x K links."""
    R = corr.R
    M, K, N, _ = R.shape
    pp_taup = frame.pilot_power_w * frame.tau_p
    sigma2 = frame.noise_power_w

    mu = np.zeros((M, K))
    omega = np.zeros((M, K, K))
    eye = np.eye(N)
    for m in range(M):
        for k in range(K):
            psi = pp_taup * R[m, k] + sigma2 * eye
            phi = pp_taup * R[m, k] @ np.linalg.solve(psi, R[m, k])
            t = float(np.trace(phi).real)
            if t <= 0.0:
                continue  # vanishing estimate (e.g. zero pilot power): mu = omega = 0
            mu[m, k] = np.sqrt(t)
            cross = np.einsum("kij,ji->k", R[m], phi).real / t
            omega[m, k, :] = cross
            omega[m, k, k] += t
    return CoefficientTensor(mu=mu, omega=omega, noise_coeff=np.ones((M, K)))


def monte_carlo_statistics(
    corr: CorrelationSet,
    frame: FrameConfig,
    samples: int,
    seed: int,
) -> CoefficientTensor:
    """Sample-average coefficient tensor with standard errors.

    Draws channel realizations, forms MMSE estimates from noisy pilot
    observations, and combines with the empirically normalized MR combiner.
    Deterministic for a fixed seed regardless of chunking.
    """
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    R = corr.R
    M, K, N, _ = R.shape
    pp = frame.pilot_power_w
    tau_p = frame.tau_p
    sigma2 = frame.noise_power_w

    # Per-link Cholesky factors of R and the estimator map
    # h_est = sqrt(pp) * R Psi^{-1} y_despread.
    chol = np.zeros((M, K, N, N), dtype=complex)
    est = np.zeros((M, K, N, N), dtype=complex)
    eye = np.eye(N)
    for m in range(M):
        for k in range(K):
            chol[m, k] = _psd_cholesky(R[m, k])
            psi = pp * tau_p * R[m, k] + sigma2 * eye
            est[m, k] = np.sqrt(pp) * R[m, k] @ np.linalg.inv(psi)

    n_chunks = (samples + _CHUNK - 1) // _CHUNK
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)

    sum_dot = np.zeros((M, K, K), dtype=complex)     # v-unnormalized c = h_est^H h_k'
    sum_re2 = np.zeros((M, K, K))                    # Re(c)^2, for SE of mu
    sum_abs2 = np.zeros((M, K, K))                   # |c|^2
    sum_abs4 = np.zeros((M, K, K))                   # |c|^4, for SE of omega
    sum_nrm = np.zeros((M, K))                       # ||h_est||^2
    sum_nrm2 = np.zeros((M, K))                      # ||h_est||^4, for the normalizer SE

    done = 0
    for c in range(n_chunks):
        n = min(_CHUNK, samples - done)
        done += n
        rng = np.random.default_rng(seeds[c])
        for m in range(M):
            z = _crandn(rng, (n, K, N))
            h = np.einsum("kij,skj->ski", chol[m], z)
            noise = np.sqrt(sigma2 * tau_p) * _crandn(rng, (n, K, N))
            y = np.sqrt(pp) * tau_p * h + noise
            for k in range(K):
                h_est = y[:, k, :] @ est[m, k].T
                dots = np.einsum("si,ski->sk", h_est.conj(), h)
                a2 = np.abs(dots) ** 2
                nrm2 = np.sum(np.abs(h_est) ** 2, axis=1)
                sum_dot[m, k] += dots.sum(axis=0)
                sum_re2[m, k] += (dots.real**2).sum(axis=0)
                sum_abs2[m, k] += a2.sum(axis=0)
                sum_abs4[m, k] += (a2**2).sum(axis=0)
                sum_nrm[m, k] += float(nrm2.sum())
                sum_nrm2[m, k] += float((nrm2**2).sum())

    nrm = sum_nrm / samples                           # empirical E{||h_est||^2}
    nrm_safe = np.where(nrm > 0, nrm, 1.0)
    var_nrm = np.maximum(sum_nrm2 / samples - nrm**2, 0.0)
    rel_nrm2 = var_nrm / samples / nrm_safe**2        # squared relative SE of the normalizer

    mean_re = sum_dot.real / samples
    var_re = np.maximum(sum_re2 / samples - mean_re**2, 0.0)
    omega = sum_abs2 / samples / nrm_safe[:, :, None]
    mean_abs2 = sum_abs2 / samples
    var_abs2 = np.maximum(sum_abs4 / samples - mean_abs2**2, 0.0)
    # Delta method: the estimates divide by the (noisy) empirical normalizer,
    # which adds omega^2 * relSE(nrm)^2 (resp. a quarter of that for mu) to the
    # variance, neglecting the covariance between numerator and normalizer.
    omega_se = np.sqrt(var_abs2 / samples / nrm_safe[:, :, None] ** 2
                       + omega**2 * rel_nrm2[:, :, None])
    mu = np.zeros((M, K))
    mu_se = np.zeros((M, K))
    for m in range(M):
        for k in range(K):
            root = np.sqrt(nrm_safe[m, k])
            mu[m, k] = mean_re[m, k, k] / root
            mu_se[m, k] = np.sqrt(var_re[m, k, k] / samples / nrm_safe[m, k]
                                  + 0.25 * mu[m, k] ** 2 * rel_nrm2[m, k])
    noise_coeff = np.where(nrm > 0, 1.0, 0.0)         # ||v||^2 == 1 by the empirical normalizer
    return CoefficientTensor(mu=mu, omega=omega, noise_coeff=noise_coeff,
                             mu_se=mu_se, omega_se=omega_se)


def _psd_cholesky(mat: np.ndarray) -> np.ndarray:
    """Cholesky factor with an eigenvalue fallback for semidefinite inputs."""
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(mat)
        w = np.maximum(w.real, 0.0)
        return v * np.sqrt(w)[None, :]


def _crandn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
