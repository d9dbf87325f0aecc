"""Monte Carlo engine for the random-features ridge model.

Samples teacher/student instances, solves the ridge problem exactly via
symmetric positive-definite factorizations, and aggregates train error,
test error, and the two-training-set bias/variance decomposition into
deterministic estimates.  Also measures empirical eigenvalue spectra of
the student Gram matrix for comparison with the analytic density.

Randomness is counter-based: every trial index owns eight independent
Philox streams (one per noise component), so trials can be evaluated in
any order — or split across processes — and still reproduce bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg

from .errors import DimensionOverflow, EigenFailure, SolveFailure
from .model import ModelConfig, sigma_y2
from .theory import classify_regime

__all__ = [
    "MEMORY_BUDGET_BYTES",
    "DEFAULT_TRIALS",
    "BOUNDARY_TRIALS",
    "Dataset",
    "Instance",
    "TrialResult",
    "Stat",
    "SimEstimate",
    "EmpiricalSpectrum",
    "default_trials",
    "default_matrix_count",
    "sample_instance",
    "ridge_solve",
    "run_trial",
    "estimate",
    "merge_estimates",
    "empirical_spectrum",
]

MEMORY_BUDGET_BYTES = 2 * 1024**3
DEFAULT_TRIALS = 1000
BOUNDARY_TRIALS = 150_000

_F64 = np.dtype(np.float64)
_MASK64 = (1 << 64) - 1

# Component ids of the per-trial sub-streams.  The stream for component k of
# trial seed s is Philox keyed by (s mod 2^64, k); distinct keys give
# independent streams, so the split is stable under any execution order.
_STREAM_BETA = 0
_STREAM_W = 1
_STREAM_X1 = 2
_STREAM_EPS1 = 3
_STREAM_X2 = 4
_STREAM_EPS2 = 5
_STREAM_XTEST = 6
_STREAM_EPSTEST = 7


def _stream(seed, component):
    """Independent Philox stream for one noise component of one trial."""
    key = np.array([seed & _MASK64, component], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# Instance sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """One draw of observations with labels.

    ``y = y_star + eps`` holds exactly; ``y_star`` are the noiseless teacher
    labels, kept so the bias estimator can reference them directly.  ``beta``
    is the ground-truth vector shared with the sibling datasets.
    """

    x: np.ndarray
    y: np.ndarray
    eps: np.ndarray
    beta: np.ndarray
    y_star: np.ndarray


@dataclass(frozen=True)
class Instance:
    """Two training sets plus a test set sharing one teacher and projection.

    ``train1`` and ``train2`` share ``beta``, ``w_mat`` and the test set but
    have independent observations and noise, which is what the crossed bias
    estimator requires.
    """

    w_mat: np.ndarray
    beta: np.ndarray
    train1: Dataset
    train2: Dataset
    test: Dataset


def _working_set_bytes(m, n_f, n_p):
    # Arrays held at once in a trial: X1, X2, X' (m x n_f each), W (n_f x n_p),
    # up to two feature matrices Z (m x n_p), and the larger of the Gram /
    # kernel intermediates.
    gram = max(min(m, n_p) ** 2, n_f * n_f if n_f < m else 0)
    elems = 3 * m * n_f + n_f * n_p + 2 * m * n_p + gram
    return 8 * elems


def default_trials(cfg):
    """Default trial count: heavy averaging on phase boundaries."""
    regime = classify_regime(cfg.alpha_f, cfg.alpha_p)
    return BOUNDARY_TRIALS if regime.is_boundary else DEFAULT_TRIALS


def default_matrix_count(cfg):
    """Matrices to pool so the nonzero-eigenvalue count is about 10 * m.

    The rank of one student Gram matrix is min(m, n_f, n_p) almost surely,
    so pooling ceil(10 m / rank) matrices keeps histogram statistics
    comparable across aspect ratios.
    """
    rank_limit = min(cfg.m, cfg.n_f, cfg.n_p)
    return math.ceil(10 * cfg.m / rank_limit)


def _teacher_labels(cfg, x, beta):
    """Noiseless labels: scaled activation of the normalized linear field."""
    act = cfg.activation()
    if act.is_linear:
        return x @ beta
    scale = math.sqrt(cfg.sigma_beta2 * cfg.sigma_x2)
    if scale == 0.0:
        return np.zeros(x.shape[0])
    moments = cfg.moments()
    return (scale / moments.mean_fprime) * act.fn((x @ beta) / scale)


def _draw_dataset(cfg, beta, n_rows, x_rng, eps_rng):
    x = x_rng.standard_normal((n_rows, cfg.n_f)) * math.sqrt(
        cfg.sigma_x2 / cfg.n_f
    )
    eps = eps_rng.standard_normal(n_rows) * math.sqrt(cfg.sigma_eps2)
    y_star = _teacher_labels(cfg, x, beta)
    return Dataset(x=x, y=y_star + eps, eps=eps, beta=beta, y_star=y_star)


def sample_instance(cfg, seed, *, budget_bytes=MEMORY_BUDGET_BYTES):
    """Draw a full problem instance for one trial.

    Deterministic given (cfg, seed): each noise component (beta, W, the two
    training sets' X and eps, test X and eps) is drawn from its own Philox
    stream keyed by (seed, component id), so the draw order of the components
    is irrelevant.

    Raises DimensionOverflow when the trial's working set would exceed
    ``budget_bytes`` (default 2 GiB).
    """
    m, n_f, n_p = cfg.m, cfg.n_f, cfg.n_p
    need = _working_set_bytes(m, n_f, n_p)
    if need > budget_bytes:
        raise DimensionOverflow(
            f"trial at m={m}, n_f={n_f}, n_p={n_p} needs about "
            f"{need / 2**30:.2f} GiB, over the {budget_bytes / 2**30:.2f} "
            "GiB budget"
        )
    beta = _stream(seed, _STREAM_BETA).standard_normal(n_f) * math.sqrt(
        cfg.sigma_beta2
    )
    w_mat = _stream(seed, _STREAM_W).standard_normal((n_f, n_p)) * math.sqrt(
        cfg.sigma_w2 / n_p
    )
    train1 = _draw_dataset(
        cfg, beta, m, _stream(seed, _STREAM_X1), _stream(seed, _STREAM_EPS1)
    )
    train2 = _draw_dataset(
        cfg, beta, m, _stream(seed, _STREAM_X2), _stream(seed, _STREAM_EPS2)
    )
    test = _draw_dataset(
        cfg,
        beta,
        m,
        _stream(seed, _STREAM_XTEST),
        _stream(seed, _STREAM_EPSTEST),
    )
    return Instance(
        w_mat=w_mat, beta=beta, train1=train1, train2=train2, test=test
    )


# ---------------------------------------------------------------------------
# Ridge solves
# ---------------------------------------------------------------------------


def _spd_solve(gram, rhs, lam):
    """Solve (lam*I + gram) x = rhs by Cholesky; gram is modified in place."""
    n = gram.shape[0]
    gram.flat[:: n + 1] += lam
    try:
        factor = scipy.linalg.cho_factor(
            gram, lower=True, overwrite_a=True, check_finite=True
        )
        return scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolveFailure(
            f"SPD ridge solve failed at size {n} with lam={lam!r}: {exc}"
        ) from exc


def ridge_solve(z, y, lam):
    """Exact ridge fit parameters for features ``z`` and labels ``y``.

    Solves the primal normal equations (lam*I + Z^T Z) w = Z^T y when the
    parameter count is below the observation count, otherwise the dual
    (lam*I + Z Z^T) a = y with w = Z^T a.  Both give the same minimizer for
    lam > 0.
    """
    if lam <= 0:
        raise ValueError(f"ridge_solve requires lam > 0, got {lam!r}")
    m, n_p = z.shape
    if n_p < m:
        return _spd_solve(z.T @ z, z.T @ y, lam)
    return z.T @ _spd_solve(z @ z.T, y, lam)


def _kernel_path_cheaper(m, n_f, n_p):
    # Leading flop counts for fitting two datasets that share W.
    # Feature path: build Z = X W per dataset, then the smaller Gram of Z.
    # Kernel path: build K = W W^T once, then S = X K X^T per dataset.
    gram_z = 2 * m * min(m, n_p) * n_p
    cost_z = 2 * (2 * m * n_f * n_p + gram_z)
    cost_k = 2 * n_f * n_f * n_p + 2 * (2 * m * n_f * n_f + 2 * m * m * n_f)
    return cost_k < cost_z


def _gram_rank(gram, dims):
    """Numerical rank of a PSD Gram matrix (matrix_rank tolerance rule)."""
    evals = np.linalg.eigvalsh(gram)
    tol = float(evals[-1]) * max(dims) * np.finfo(_F64).eps
    return int(np.count_nonzero(evals > tol))


# ---------------------------------------------------------------------------
# Trials and estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    """Errors of one trial; ``bias_cross`` may be negative on its own."""

    train_error: float
    test_error: float
    bias_cross: float
    rank_deficit: float | None = None


def run_trial(cfg, seed, *, compute_rank=False, budget_bytes=MEMORY_BUDGET_BYTES):
    """Fit both training sets of one instance and measure its errors.

    Train error comes from the first model on its own training set; test
    error from the first model on the noisy test labels; ``bias_cross`` is
    the test-set average of (yhat1 - y*')(yhat2 - y*') against the noiseless
    labels, whose mean over trials estimates the squared bias.

    The fit is computed through whichever algebraic route is cheaper at the
    realized dimensions: forming the features Z = X W explicitly, or forming
    the projection kernel K = W W^T once and solving the dual system with
    X K X^T.  Both routes produce the same effective regression vector
    beta_hat = W w_hat up to roundoff; predictions always use beta_hat.
    """
    inst = sample_instance(cfg, seed, budget_bytes=budget_bytes)
    m, n_f, n_p = cfg.m, cfg.n_f, cfg.n_p
    lam = cfg.lam
    rank_deficit = None
    if _kernel_path_cheaper(m, n_f, n_p):
        kernel = inst.w_mat @ inst.w_mat.T
        beta_hats = []
        for train in (inst.train1, inst.train2):
            xk = train.x @ kernel
            s = xk @ train.x.T
            if compute_rank and train is inst.train1:
                rank = _gram_rank(s.copy(), (m, n_p))
                rank_deficit = 1.0 - rank / n_p
            dual = _spd_solve(s, train.y, lam)
            beta_hats.append(kernel @ (train.x.T @ dual))
    else:
        beta_hats = []
        for train in (inst.train1, inst.train2):
            z = train.x @ inst.w_mat
            if compute_rank and train is inst.train1:
                gram = z @ z.T if m <= n_p else z.T @ z
                rank = _gram_rank(gram, (m, n_p))
                rank_deficit = 1.0 - rank / n_p
            beta_hats.append(inst.w_mat @ ridge_solve(z, train.y, lam))
    yhat1_train = inst.train1.x @ beta_hats[0]
    train_error = float(np.mean((inst.train1.y - yhat1_train) ** 2))
    yhat1 = inst.test.x @ beta_hats[0]
    yhat2 = inst.test.x @ beta_hats[1]
    test_error = float(np.mean((inst.test.y - yhat1) ** 2))
    bias_cross = float(
        np.mean((yhat1 - inst.test.y_star) * (yhat2 - inst.test.y_star))
    )
    return TrialResult(
        train_error=train_error,
        test_error=test_error,
        bias_cross=bias_cross,
        rank_deficit=rank_deficit,
    )


@dataclass(frozen=True)
class Stat:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    count: int


def _stat(samples):
    n = samples.size
    se = float(np.std(samples, ddof=1)) / math.sqrt(n)
    return Stat(mean=float(np.mean(samples)), stderr=se, count=n)


@dataclass(frozen=True)
class SimEstimate:
    """Monte Carlo estimates of the error decomposition.

    ``variance`` is derived per trial as test - bias_cross - sigma_eps2, so
    the identity  test mean = bias2 mean + variance mean + sigma_eps2  holds
    exactly by construction.  ``samples`` keeps the per-trial values (keyed
    by quantity) so estimates merge exactly.  ``scale`` is 1.0 for raw
    second-moment units; ``scaled()`` divides everything by the label
    variance sigma_y2.
    """

    train: Stat
    test: Stat
    bias2: Stat
    variance: Stat
    n_trials: int
    sigma_y2: float
    scale: float = 1.0
    samples: dict = field(repr=False, compare=False, default=None)

    def stat(self, quantity):
        return getattr(self, quantity)

    def scaled(self):
        """The same estimate in units of the label variance."""
        if self.scale != 1.0:
            return self
        s = self.sigma_y2
        scaled_samples = None
        if self.samples is not None:
            scaled_samples = {k: v / s for k, v in self.samples.items()}
        return replace(
            self,
            train=_scale_stat(self.train, s),
            test=_scale_stat(self.test, s),
            bias2=_scale_stat(self.bias2, s),
            variance=_scale_stat(self.variance, s),
            scale=s,
            samples=scaled_samples,
        )


def _scale_stat(stat, s):
    return Stat(mean=stat.mean / s, stderr=stat.stderr / s, count=stat.count)


def _estimate_from_samples(samples, label_var, scale=1.0):
    return SimEstimate(
        train=_stat(samples["train"]),
        test=_stat(samples["test"]),
        bias2=_stat(samples["bias2"]),
        variance=_stat(samples["variance"]),
        n_trials=samples["train"].size,
        sigma_y2=label_var,
        scale=scale,
        samples=samples,
    )


def estimate(cfg, n_trials=None, seed0=0, *, budget_bytes=MEMORY_BUDGET_BYTES):
    """Average ``n_trials`` independent trials with seeds seed0, seed0+1, ...

    ``n_trials`` defaults to 1000, or 150000 on a phase boundary where
    fluctuations are heavy.  The result is deterministic in (cfg, n_trials,
    seed0): each trial depends only on its own seed.
    """
    if n_trials is None:
        n_trials = default_trials(cfg)
    if n_trials < 2:
        raise ValueError(f"need at least 2 trials, got {n_trials}")
    train = np.empty(n_trials)
    test = np.empty(n_trials)
    bias2 = np.empty(n_trials)
    for i in range(n_trials):
        result = run_trial(cfg, seed0 + i, budget_bytes=budget_bytes)
        train[i] = result.train_error
        test[i] = result.test_error
        bias2[i] = result.bias_cross
    samples = {
        "train": train,
        "test": test,
        "bias2": bias2,
        "variance": test - bias2 - cfg.sigma_eps2,
    }
    return _estimate_from_samples(samples, sigma_y2(cfg))


def merge_estimates(first, second):
    """Combine two estimates over disjoint trial batches into one.

    Concatenates the retained per-trial samples, so merging two halves of a
    seed range reproduces the full-range estimate exactly.
    """
    if first.samples is None or second.samples is None:
        raise ValueError("estimates without retained samples cannot merge")
    if first.scale != second.scale or first.sigma_y2 != second.sigma_y2:
        raise ValueError("cannot merge estimates with different scaling")
    samples = {
        key: np.concatenate([first.samples[key], second.samples[key]])
        for key in first.samples
    }
    return _estimate_from_samples(samples, first.sigma_y2, scale=first.scale)


# ---------------------------------------------------------------------------
# Empirical spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Eigenvalue sample of the student Gram matrix over several draws.

    ``eigenvalues`` holds the nonzero part in units of sigma_w2*sigma_x2
    (matching the analytic density's axis), pooled over matrices and sorted.
    ``zero_fraction`` is the measured fraction of zero modes out of the n_p
    eigenvalues per matrix, structural padding included.  ``density`` is the
    averaged histogram over ``bin_edges``, normalized so that its integral
    plus ``zero_fraction`` is 1.
    """

    eigenvalues: np.ndarray
    zero_fraction: float
    bin_edges: np.ndarray
    density: np.ndarray
    n_matrices: int
    n_per_matrix: int


def _spectrum_working_set_bytes(m, n_f, n_p, block_rows):
    small = min(m, n_p)
    elems = n_f * n_p + m * n_p + block_rows * n_f + 3 * small * small
    return 8 * elems


def empirical_spectrum(
    cfg,
    n_matrices=None,
    seed0=0,
    n_bins=64,
    *,
    budget_bytes=MEMORY_BUDGET_BYTES,
):
    """Pooled eigenvalues of lam-free student Gram matrices Z^T Z.

    Diagonalizes the smaller of Z^T Z and Z Z^T and pads with the n_p - m
    structural zeros when observations are the scarcer dimension; the two
    matrices share their nonzero spectrum.  ``n_matrices`` defaults to
    ceil(10 * m / rank), which keeps the pooled nonzero-eigenvalue count at
    about 10 * m across aspect ratios.  Matrix j uses the same component
    streams as trial seed0 + j, so spectra are deterministic and can be
    split across workers.
    """
    m, n_f, n_p = cfg.m, cfg.n_f, cfg.n_p
    if n_matrices is None:
        n_matrices = default_matrix_count(cfg)
    block_rows = max(1, (8 << 20) // (8 * n_f))
    need = _spectrum_working_set_bytes(m, n_f, n_p, block_rows)
    if need > budget_bytes:
        raise DimensionOverflow(
            f"spectrum at m={m}, n_f={n_f}, n_p={n_p} needs about "
            f"{need / 2**30:.2f} GiB, over the {budget_bytes / 2**30:.2f} "
            "GiB budget"
        )
    scale = cfg.sigma_w2 * cfg.sigma_x2
    nonzero = []
    zero_count = 0
    for j in range(n_matrices):
        seed = seed0 + j
        w_mat = _stream(seed, _STREAM_W).standard_normal(
            (n_f, n_p)
        ) * math.sqrt(cfg.sigma_w2 / n_p)
        x_rng = _stream(seed, _STREAM_X1)
        x_scale = math.sqrt(cfg.sigma_x2 / n_f)
        z = np.empty((m, n_p))
        for start in range(0, m, block_rows):
            stop = min(start + block_rows, m)
            block = x_rng.standard_normal((stop - start, n_f)) * x_scale
            z[start:stop] = block @ w_mat
        del w_mat
        gram = z @ z.T if m < n_p else z.T @ z
        del z
        if not np.all(np.isfinite(gram)):
            raise EigenFailure("Gram matrix contains non-finite entries")
        try:
            evals = np.linalg.eigvalsh(gram)
        except np.linalg.LinAlgError as exc:
            raise EigenFailure(
                f"symmetric eigensolver failed on a {gram.shape[0]} x "
                f"{gram.shape[0]} Gram matrix: {exc}"
            ) from exc
        tol = float(evals[-1]) * max(m, n_p) * np.finfo(_F64).eps
        kept = evals[evals > tol]
        zero_count += n_p - kept.size  # structural padding included
        nonzero.append(kept / scale)
    eigenvalues = np.sort(np.concatenate(nonzero))
    total = n_matrices * n_p
    zero_fraction = zero_count / total
    lo = 0.0
    hi = float(eigenvalues[-1]) * 1.02 if eigenvalues.size else 1.0
    bin_edges = np.linspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(eigenvalues, bins=bin_edges)
    widths = np.diff(bin_edges)
    density = counts / (total * widths)
    return EmpiricalSpectrum(
        eigenvalues=eigenvalues,
        zero_fraction=zero_fraction,
        bin_edges=bin_edges,
        density=density,
        n_matrices=n_matrices,
        n_per_matrix=n_p,
    )
