"""Kernel SVM for pairwise transmission prediction.

The soft-margin dual

    min_a  0.5 * a' Q a - sum(a)   s.t.  0 <= a_i <= C_i,  sum(a_i y_i) = 0,

with Q_ij = y_i y_j K(x_i, x_j), is solved by sequential minimal
optimization using maximal-KKT-violation pair selection.  The negative
class uses penalty C and the (minority) positive class C * weight, so
errors on positives cost more.  Kernel rows are memoized in a bounded LRU
cache and training stops early if the kernel-evaluation budget runs out,
returning the best iterate with ``converged=False``.

Input vectors are expected standardized; ``fit_pair_classifier`` wraps the
encode -> standardize -> train chain for record pairs and attaches the
fitted Standardizer so the model can score raw records.
"""

from __future__ import annotations

import json
import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from .population import FeatureSchema, Standardizer, encode

logger = logging.getLogger(__name__)

LINEAR = "linear"
RBF = "rbf"

KKT_TOL = 1e-3
MAX_KERNEL_EVALS = 10_000_000
SUPPORT_EPS = 1e-8


class ClassifierError(ValueError):
    pass


class DimensionMismatchError(ClassifierError):
    pass


class SingleClassError(ClassifierError):
    pass


class SchemaMismatchError(ClassifierError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    kind: str
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in (LINEAR, RBF):
            raise ClassifierError(f"unknown kernel {self.kind!r}")
        if self.kind == RBF:
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise ClassifierError("rbf kernel needs finite sigma > 0")


def kernel_eval(spec: KernelSpec, x, z) -> float:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise DimensionMismatchError(f"shapes {x.shape} and {z.shape} differ")
    if spec.kind == LINEAR:
        return float(np.dot(x, z))
    d2 = float(np.sum((x - z) ** 2))
    return float(np.exp(-d2 / (2.0 * spec.sigma**2)))


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """K[i, j] = kernel(A[i], B[j]), vectorized over both arguments."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(f"dimensions {A.shape[1]} and {B.shape[1]} differ")
    if spec.kind == LINEAR:
        return A @ B.T
    sq = (
        np.sum(A**2, axis=1)[:, None]
        + np.sum(B**2, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.clip(sq, 0.0, None, out=sq)
    return np.exp(-sq / (2.0 * spec.sigma**2))


@dataclass(frozen=True)
class SvmParams:
    C: float
    weight: float
    kernel: KernelSpec

    def __post_init__(self):
        if self.C <= 0:
            raise ClassifierError("C must be positive")
        if self.weight <= 0:
            raise ClassifierError("positive-class weight must be positive")

    def sort_key(self):
        # deterministic tie-breaking: smaller C, then sigma, then weight
        return (self.C, self.kernel.sigma or 0.0, self.weight)


class _RowCache:
    """LRU cache of kernel rows against the training matrix."""

    def __init__(self, spec: KernelSpec, X: np.ndarray, capacity: int):
        self.spec = spec
        self.X = X
        self.capacity = max(2, capacity)
        self.rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.evals = 0

    def row(self, i: int) -> np.ndarray:
        cached = self.rows.get(i)
        if cached is not None:
            self.rows.move_to_end(i)
            return cached
        row = kernel_matrix(self.spec, self.X[i : i + 1], self.X)[0]
        self.evals += self.X.shape[0]
        self.rows[i] = row
        if len(self.rows) > self.capacity:
            self.rows.popitem(last=False)
        return row


@dataclass
class SvmModel:
    """Trained decision function f(x) = sum_i coef_i K(sv_i, x) + bias.

    support_vectors live in the standardized training space; coef_i is
    alpha_i * y_i.  When a Standardizer (and schema) is attached, raw
    encoded pair vectors and record pairs can be scored directly.
    """

    kernel: KernelSpec
    support_vectors: np.ndarray
    coefs: np.ndarray
    bias: float
    standardizer: Standardizer | None = None
    schema: FeatureSchema | None = None
    alphas: np.ndarray | None = None
    support_labels: np.ndarray | None = None
    converged: bool = True
    kkt_violation: float = 0.0
    params: SvmParams | None = None
    training_size: int | None = None

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        """Decision values for encoded pair rows (standardized if attached)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.standardizer is not None:
            X = self.standardizer.transform(X)
        if self.support_vectors.shape[0] == 0:
            return np.full(X.shape[0], self.bias)
        K = kernel_matrix(self.kernel, X, self.support_vectors)
        return K @ self.coefs + self.bias

    def predict_labels(self, X: np.ndarray) -> np.ndarray:
        """+1 where the decision value is strictly positive, else -1."""
        values = self.decision_values(X)
        return np.where(values > 0.0, 1, -1)

    def _pair_row(self, sender: dict, receiver: dict) -> np.ndarray:
        if self.schema is None:
            raise SchemaMismatchError("model has no attached schema for records")
        return np.concatenate([encode(sender, self.schema), encode(receiver, self.schema)])

    def predict_pair(self, sender: dict, receiver: dict) -> tuple[int, float]:
        value = float(self.decision_values(self._pair_row(sender, receiver)[None, :])[0])
        return (1 if value > 0.0 else -1), value

    def predict_pairs(self, table, senders, receivers) -> np.ndarray:
        """Vectorized labels for index pairs into a vertex table."""
        if self.schema is not None and table.schema.field_ids != self.schema.field_ids:
            raise SchemaMismatchError("vertex table schema differs from model schema")
        enc = table.encoded()
        X = np.hstack([enc[np.asarray(senders)], enc[np.asarray(receivers)]])
        return self.predict_labels(X)

    def save(self, path) -> None:
        doc = {
            "kernel": self.kernel.kind,
            "bias": self.bias,
            "support": [
                {"coef": float(c), "vector": v.tolist()}
                for c, v in zip(self.coefs, self.support_vectors)
            ],
            "standardizer": self.standardizer.to_dict() if self.standardizer else None,
        }
        if self.kernel.kind == RBF:
            doc["sigma"] = self.kernel.sigma
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path, schema: FeatureSchema | None = None) -> "SvmModel":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        kernel = KernelSpec(doc["kernel"], doc.get("sigma"))
        support = doc["support"]
        vectors = np.array([s["vector"] for s in support], dtype=float)
        coefs = np.array([s["coef"] for s in support], dtype=float)
        if vectors.size == 0:
            vectors = vectors.reshape(0, 0)
        std = doc.get("standardizer")
        return cls(
            kernel=kernel,
            support_vectors=vectors,
            coefs=coefs,
            bias=float(doc["bias"]),
            standardizer=Standardizer.from_dict(std) if std else None,
            schema=schema,
        )


class ConstantModel:
    """Stub predictor returning one fixed label; used for oracle testing."""

    def __init__(self, label: int):
        if label not in (1, -1):
            raise ClassifierError("constant label must be +1 or -1")
        self.label = label

    def predict_labels(self, X) -> np.ndarray:
        return np.full(np.atleast_2d(X).shape[0], self.label, dtype=int)

    def predict_pair(self, sender, receiver):
        return self.label, float(self.label)

    def predict_pairs(self, table, senders, receivers) -> np.ndarray:
        return np.full(len(np.asarray(senders)), self.label, dtype=int)


def train_svm(
    X: np.ndarray,
    y: np.ndarray,
    params: SvmParams,
    tol: float = KKT_TOL,
    max_kernel_evals: int = MAX_KERNEL_EVALS,
    cache_rows: int | None = None,
    max_iter: int | None = None,
) -> SvmModel:
    """Solve the weighted soft-margin dual on standardized vectors via SMO.

    Each step selects the maximal violating pair (i from the "up" set with
    the largest -y grad, j from the "down" set with the smallest) and
    solves the two-variable subproblem analytically.  Convergence is
    m(alpha) - M(alpha) <= tol.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if X.shape[0] != n:
        raise DimensionMismatchError("X and y lengths differ")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassError("training data must contain both classes")

    C = np.where(y > 0, params.C * params.weight, params.C)
    if cache_rows is None:
        # keep the cache near 256 MB worth of rows, at least 64 rows
        cache_rows = max(64, min(n, int(256e6 / (8 * max(n, 1)))))
    cache = _RowCache(params.kernel, X, cache_rows)

    if max_iter is None:
        max_iter = max(100_000, 30 * n)

    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective at alpha = 0
    violation = np.inf
    converged = False
    iterations = 0

    while True:
        vals = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        down = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        up_idx = np.nonzero(up)[0]
        down_idx = np.nonzero(down)[0]
        if len(up_idx) == 0 or len(down_idx) == 0:
            converged = True
            violation = 0.0
            break
        i = int(up_idx[np.argmax(vals[up_idx])])
        j = int(down_idx[np.argmin(vals[down_idx])])
        violation = float(vals[i] - vals[j])
        if violation <= tol:
            converged = True
            break
        if cache.evals >= max_kernel_evals:
            logger.warning(
                "SMO stopped at kernel-eval budget %d with violation %.3g",
                max_kernel_evals, violation,
            )
            break
        if iterations >= max_iter:
            logger.warning(
                "SMO stopped at iteration cap %d with violation %.3g",
                max_iter, violation,
            )
            break
        iterations += 1

        Ki = cache.row(i)
        Kj = cache.row(j)
        eta = Ki[i] + Kj[j] - 2.0 * Ki[j]
        if eta < 1e-12:
            eta = 1e-12
        # F_k = y_k * grad_k is the decision residual without bias
        Fi = y[i] * grad[i]
        Fj = y[j] * grad[j]
        a_i, a_j = alpha[i], alpha[j]
        new_j = a_j + y[j] * (Fi - Fj) / eta
        if y[i] != y[j]:
            low = max(0.0, a_j - a_i)
            high = min(C[j], C[i] + a_j - a_i)
        else:
            low = max(0.0, a_i + a_j - C[i])
            high = min(C[j], a_i + a_j)
        new_j = min(high, max(low, new_j))
        delta_j = new_j - a_j
        if abs(delta_j) < 1e-14:
            # numerically stuck pair; treat as converged at this violation
            logger.debug("SMO made no progress at violation %.3g", violation)
            break
        # snap near-bound values to the bound exactly so up/down set
        # membership is not decided by float dust
        def _snap(value: float, limit: float) -> float:
            eps = 1e-10 * (1.0 + limit)
            if value < eps:
                return 0.0
            if value > limit - eps:
                return limit
            return value

        new_i = _snap(a_i - y[i] * y[j] * delta_j, C[i])
        new_j = _snap(new_j, C[j])
        delta_i = new_i - a_i
        delta_j = new_j - a_j
        alpha[i] = new_i
        alpha[j] = new_j
        grad += (y * Ki) * (y[i] * delta_i) + (y * Kj) * (y[j] * delta_j)

    # bias from free support vectors, else midpoint of the violating bounds
    F = y * grad
    free = (alpha > SUPPORT_EPS) & (alpha < C - SUPPORT_EPS)
    if np.any(free):
        bias = float(-F[free].mean())
    else:
        vals = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        down = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
        candidates = []
        if np.any(up):
            candidates.append(float(np.max(vals[up])))
        if np.any(down):
            candidates.append(float(np.min(vals[down])))
        bias = sum(candidates) / len(candidates) if candidates else 0.0

    keep = alpha > SUPPORT_EPS
    model = SvmModel(
        kernel=params.kernel,
        support_vectors=X[keep],
        coefs=(alpha * y)[keep],
        bias=bias,
        alphas=alpha[keep],
        support_labels=y[keep].astype(int),
        converged=converged,
        kkt_violation=violation,
        params=params,
    )
    if not converged:
        logger.warning("SMO returned a non-converged model (violation %.3g)", violation)
    return model


def dual_objective(
    X: np.ndarray, y: np.ndarray, alpha: np.ndarray, spec: KernelSpec
) -> float:
    """0.5 a'Qa - sum(a) for a full alpha vector (small problems only)."""
    K = kernel_matrix(spec, X, X)
    Q = (y[:, None] * y[None, :]) * K
    return float(0.5 * alpha @ Q @ alpha - alpha.sum())


def balanced_error(predictions, labels) -> float:
    """Mean of the per-class error rates."""
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    if predictions.shape != labels.shape:
        raise DimensionMismatchError("predictions and labels differ in length")
    pos = labels > 0
    neg = labels < 0
    if not (np.any(pos) and np.any(neg)):
        raise SingleClassError("labels must contain both classes")
    pos_err = float(np.mean(predictions[pos] != labels[pos]))
    neg_err = float(np.mean(predictions[neg] != labels[neg]))
    return (pos_err + neg_err) / 2.0


def per_class_errors(predictions, labels) -> tuple[float, float]:
    predictions = np.asarray(predictions)
    labels = np.asarray(labels)
    pos = labels > 0
    neg = labels < 0
    if not (np.any(pos) and np.any(neg)):
        raise SingleClassError("labels must contain both classes")
    return (
        float(np.mean(predictions[pos] != labels[pos])),
        float(np.mean(predictions[neg] != labels[neg])),
    )


def stratified_folds(y: np.ndarray, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Split indices into k folds preserving the class ratio, shuffled."""
    if k < 2:
        raise ClassifierError("need k >= 2 folds")
    y = np.asarray(y)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0  # rotate the fold taking the remainder so sizes stay within 1
    for cls in (1, -1):
        idx = np.nonzero(y == cls)[0]
        if len(idx) < k:
            raise SingleClassError(
                f"class {cls} has {len(idx)} members, fewer than {k} folds"
            )
        idx = idx[rng.permutation(len(idx))]
        for pos, index in enumerate(idx):
            folds[(pos + offset) % k].append(int(index))
        offset = (offset + len(idx)) % k
    return [np.array(sorted(f), dtype=int) for f in folds]


@dataclass(frozen=True)
class CvEntry:
    params: SvmParams
    balanced_error: float
    positive_error: float
    negative_error: float


@dataclass(frozen=True)
class CvReport:
    entries: tuple[CvEntry, ...]
    best: SvmParams

    def entry(self, params: SvmParams) -> CvEntry:
        for e in self.entries:
            if e.params == params:
                return e
        raise KeyError(params)


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    grid,
    k: int,
    rng: np.random.Generator,
    tol: float = KKT_TOL,
    max_kernel_evals: int = MAX_KERNEL_EVALS,
) -> CvReport:
    """Mean balanced error of each parameter set over k stratified folds.

    Standardization is fitted on each training split only.  The winner is
    the entry with the lowest mean balanced error; ties break toward
    smaller C, then sigma, then class weight.
    """
    grid = list(grid)
    if not grid:
        raise ClassifierError("parameter grid is empty")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    folds = stratified_folds(y, k, rng)
    all_idx = np.arange(len(y))
    entries = []
    for params in grid:
        bal, pos, neg = [], [], []
        for fold in folds:
            test_mask = np.zeros(len(y), dtype=bool)
            test_mask[fold] = True
            train_idx = all_idx[~test_mask]
            std = Standardizer.fit(X[train_idx])
            model = train_svm(
                std.transform(X[train_idx]),
                y[train_idx],
                params,
                tol=tol,
                max_kernel_evals=max_kernel_evals,
            )
            preds = model.predict_labels(std.transform(X[fold]))
            bal.append(balanced_error(preds, y[fold]))
            p, q = per_class_errors(preds, y[fold])
            pos.append(p)
            neg.append(q)
        entries.append(
            CvEntry(
                params=params,
                balanced_error=float(np.mean(bal)),
                positive_error=float(np.mean(pos)),
                negative_error=float(np.mean(neg)),
            )
        )
    best = min(entries, key=lambda e: (e.balanced_error,) + e.params.sort_key())
    return CvReport(entries=tuple(entries), best=best.params)


def fit_pair_classifier(
    X_raw: np.ndarray,
    y: np.ndarray,
    params: SvmParams,
    schema: FeatureSchema | None = None,
    tol: float = KKT_TOL,
    max_kernel_evals: int = MAX_KERNEL_EVALS,
) -> SvmModel:
    """Standardize raw encoded pair rows, train, and attach the pieces."""
    std = Standardizer.fit(X_raw)
    model = train_svm(
        std.transform(X_raw), y, params, tol=tol, max_kernel_evals=max_kernel_evals
    )
    model.standardizer = std
    model.schema = schema
    return model
