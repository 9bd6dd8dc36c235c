"""Online soft-margin SVM for the re-detection module.

Training samples arrive one at a time. A new sample whose margin
m = y*f(x) - 1 is already positive enters the reserve set untouched;
otherwise the dual is re-optimized to KKT optimality by a working-set
solver warm-started from the previous coefficients, so after every
insertion the exact batch solution over all retained samples holds.
Samples are partitioned into S1 (on-margin support vectors,
0 < alpha < C), S2 (inside-margin, alpha = C) and R (reserve, alpha = 0).

Kernel: gaussian K(u, v) = exp(-||u - v||^2 / sigma^2) over L2-normalized
feature vectors. The Gram matrix is cached and grown incrementally.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import InputError, NoModelError

_ALPHA_EPS = 1e-8
_TAU = 1e-12


def _unit(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    norms = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / np.maximum(norms, 1e-12)


class IncrementalSVM:
    def __init__(self, C: float = 2.0, kernel_sigma: float = 0.5,
                 tol: float = 1e-6):
        self.C = float(C)
        self.kernel_sigma = float(kernel_sigma)
        self.tol = float(tol)
        self.X = np.zeros((0, 0))       # unit-normalized samples, (n, d)
        self.y = np.zeros(0)            # labels, +-1
        self.alpha = np.zeros(0)        # dual coefficients in [0, C]
        self.b = 0.0
        self._K = np.zeros((0, 0))      # cached Gram matrix

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    # -- kernel ------------------------------------------------------------

    def _kernel_rows(self, u: np.ndarray) -> np.ndarray:
        """K(u_i, X_j) for unit rows u, shape (len(u), n)."""
        d2 = np.maximum(2.0 - 2.0 * (u @ self.X.T), 0.0)
        return np.exp(-d2 / (self.kernel_sigma ** 2))

    # -- scoring -----------------------------------------------------------

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        """f(x) = sum_i alpha_i y_i K(x_i, x) + b for a batch of rows."""
        if self.n_samples == 0:
            raise NoModelError("SVM has no training samples")
        u = _unit(np.atleast_2d(features))
        return self._kernel_rows(u) @ (self.alpha * self.y) + self.b

    def score(self, features: np.ndarray) -> float:
        return float(self.decision_values(features)[0])

    def margins(self) -> np.ndarray:
        """m_i = y_i f(x_i) - 1 over the retained samples."""
        return self.y * (self._K @ (self.alpha * self.y) + self.b) - 1.0

    def margin_sets(self) -> dict[str, np.ndarray]:
        """Index partition into S1 (on margin), S2 (inside) and R (reserve)."""
        on_upper = self.alpha >= self.C - _ALPHA_EPS
        at_zero = self.alpha <= _ALPHA_EPS
        return {
            "S1": np.flatnonzero(~on_upper & ~at_zero),
            "S2": np.flatnonzero(on_upper),
            "R": np.flatnonzero(at_zero),
        }

    # -- training ----------------------------------------------------------

    def add_sample(self, features: np.ndarray, label: int) -> "IncrementalSVM":
        """Absorb one labeled sample, restoring KKT optimality."""
        features = np.asarray(features, dtype=np.float64).ravel()
        if not np.all(np.isfinite(features)):
            raise InputError("sample features must be finite")
        if label not in (-1, 1):
            raise InputError(f"label must be +1 or -1, got {label}")
        u = _unit(features)
        if self.n_samples == 0:
            self.X = u[None, :]
            self.y = np.array([float(label)])
            self.alpha = np.zeros(1)
            self._K = np.ones((1, 1))
        else:
            if features.size != self.X.shape[1]:
                raise InputError(
                    f"feature length {features.size} != model {self.X.shape[1]}")
            row = self._kernel_rows(u[None, :])[0]
            margin = label * (row @ (self.alpha * self.y) + self.b) - 1.0
            n = self.n_samples
            grown = np.empty((n + 1, n + 1))
            grown[:n, :n] = self._K
            grown[n, :n] = row
            grown[:n, n] = row
            grown[n, n] = 1.0
            self._K = grown
            self.X = np.vstack([self.X, u[None, :]])
            self.y = np.append(self.y, float(label))
            self.alpha = np.append(self.alpha, 0.0)
            if margin > 0:
                return self  # correct side of the margin: reserve vector
        self._solve()
        return self

    def enforce_budget(self, max_sv: int) -> "IncrementalSVM":
        """Keep the ``max_sv`` samples with the smallest |margin|, then
        re-optimize the survivors."""
        if self.n_samples <= max_sv:
            return self
        order = np.argsort(np.abs(self.margins()), kind="stable")
        keep = np.sort(order[:max_sv])
        self.X = self.X[keep]
        self.y = self.y[keep]
        self.alpha = self.alpha[keep]
        self._K = self._K[np.ix_(keep, keep)]
        self._restore_equality()
        self._solve()
        return self

    # -- solver ------------------------------------------------------------

    def _restore_equality(self):
        """Lower coefficients of the over-represented class until
        sum_i alpha_i y_i = 0 again (used after dropping support vectors)."""
        excess = float(self.alpha @ self.y)
        if excess == 0.0:
            return
        sign = 1.0 if excess > 0 else -1.0
        for i in np.argsort(-self.alpha, kind="stable"):
            if self.y[i] != sign or self.alpha[i] <= 0:
                continue
            cut = min(self.alpha[i], abs(excess))
            self.alpha[i] -= cut
            excess -= sign * cut
            if abs(excess) <= 0.0:
                break

    def _solve(self):
        """Working-set SMO on the dual (second-order pair selection),
        warm-started from the current coefficients; recomputes the bias."""
        n = self.n_samples
        y, alpha, c = self.y, self.alpha, self.C
        k = self._K
        q = k * np.outer(y, y)
        grad = q @ alpha - 1.0
        diag = np.ascontiguousarray(np.diag(k))
        neg_inf = -np.inf
        max_iter = max(20000, 500 * n)
        converged = False
        for _ in range(max_iter):
            crit = -y * grad
            up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
            low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
            crit_up = np.where(up, crit, neg_inf)
            i = int(np.argmax(crit_up))
            m_up = crit_up[i]
            crit_low = np.where(low, crit, np.inf)
            m_low = crit_low.min()
            if m_up - m_low <= self.tol or not np.isfinite(m_up) \
                    or not np.isfinite(m_low):
                converged = True
                break
            # second-order choice of j: maximal decrease along the (i, j) pair
            b_vec = m_up - crit
            quad = np.maximum(diag[i] + diag - 2.0 * y[i] * y * k[i], _TAU)
            gains = np.where(low & (b_vec > 0), (b_vec * b_vec) / quad, neg_inf)
            j = int(np.argmax(gains))
            old_i, old_j = alpha[i], alpha[j]
            if y[i] != y[j]:
                denom = max(diag[i] + diag[j] + 2.0 * k[i, j], _TAU)
                delta = (-grad[i] - grad[j]) / denom
                diff = alpha[i] - alpha[j]
                alpha[i] += delta
                alpha[j] += delta
                if diff > 0:
                    if alpha[j] < 0:
                        alpha[j] = 0.0
                        alpha[i] = diff
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0.0
                        alpha[j] = -diff
                if diff > 0:
                    if alpha[i] > c:
                        alpha[i] = c
                        alpha[j] = c - diff
                else:
                    if alpha[j] > c:
                        alpha[j] = c
                        alpha[i] = c + diff
            else:
                denom = max(diag[i] + diag[j] - 2.0 * k[i, j], _TAU)
                delta = (grad[i] - grad[j]) / denom
                total = alpha[i] + alpha[j]
                alpha[i] -= delta
                alpha[j] += delta
                if total > c:
                    if alpha[i] > c:
                        alpha[i] = c
                        alpha[j] = total - c
                else:
                    if alpha[j] < 0:
                        alpha[j] = 0.0
                        alpha[i] = total
                if total > c:
                    if alpha[j] > c:
                        alpha[j] = c
                        alpha[i] = total - c
                else:
                    if alpha[i] < 0:
                        alpha[i] = 0.0
                        alpha[j] = total
            grad += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)
        if not converged:
            warnings.warn("SMO hit its iteration cap before reaching the "
                          "requested tolerance", RuntimeWarning)
        self.b = _bias_from_solution(k, y, alpha, c)


def _bias_from_solution(k: np.ndarray, y: np.ndarray, alpha: np.ndarray,
                        c: float) -> float:
    """Bias from free support vectors, or the KKT interval midpoint when
    every coefficient sits on a bound."""
    f0 = k @ (alpha * y)
    free = (alpha > _ALPHA_EPS) & (alpha < c - _ALPHA_EPS)
    if free.any():
        return float(np.mean(y[free] - f0[free]))
    lo, hi = -np.inf, np.inf
    for i in range(len(y)):
        bound = y[i] - f0[i]
        # alpha = 0 requires y f >= 1, alpha = C requires y f <= 1
        if alpha[i] <= _ALPHA_EPS:
            if y[i] > 0:
                lo = max(lo, bound)
            else:
                hi = min(hi, bound)
        else:  # alpha at C
            if y[i] > 0:
                hi = min(hi, bound)
            else:
                lo = max(lo, bound)
    if not np.isfinite(lo) and not np.isfinite(hi):
        return 0.0
    if not np.isfinite(lo):
        return float(hi)
    if not np.isfinite(hi):
        return float(lo)
    return float(0.5 * (lo + hi))
