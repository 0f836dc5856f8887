"""Parametric uncertainty likelihoods and the spline inverse sensor model.

Two per-ray likelihood families are supported: Gaussian (uncertainty is
a standard deviation) and Laplace (uncertainty is a scale parameter).
The inverse sensor model converts an estimated obstacle distance and
its uncertainty into per-cell occupancy: the Laplace density is
approximated by a quadratic B-spline Q with finite support [-4, 4] and
unit integral, whose closed-form CDF yields the occupancy curve

    H(t) = Q_cdf(t) - 0.5 * Q_cdf(t - 4),

with t the signed distance from the estimated surface in units of the
per-ray uncertainty. The finite support keeps precise measurements from
smearing occupancy behind the surface, and H saturates at the 0.5 prior
far behind it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

SPLINE_SCHEMA = 1

# Floor applied to every uncertainty value before it divides anything.
U_MIN = 1e-3

SUPPORT = 4.0  # Q(t) = 0 for |t| >= SUPPORT


def _validate_loglik_args(y_hat, y_true, u_hat):
    y_hat = np.asarray(y_hat, dtype=float)
    y_true = np.asarray(y_true, dtype=float)
    u_hat = np.asarray(u_hat, dtype=float)
    if not (y_hat.shape == y_true.shape == u_hat.shape):
        raise ValueError(
            f"length mismatch: y_hat {y_hat.shape}, y_true {y_true.shape}, u_hat {u_hat.shape}")
    if y_hat.size == 0:
        raise ValueError("empty input")
    if not np.all(u_hat > 0.0):
        raise ValueError("uncertainty values must be positive")
    return y_hat, y_true, u_hat


def gaussian_loglik(y_hat, y_true, u_hat, average: bool = False) -> float:
    """Gaussian log-likelihood of estimates centered on the true distances.

    Per ray: -0.5 * (ln(2*pi*u^2) + (y_hat - y)^2 / u^2), summed over
    rays, or divided by the ray count when ``average`` is set.
    """
    y_hat, y_true, u_hat = _validate_loglik_args(y_hat, y_true, u_hat)
    r = y_hat - y_true
    terms = -0.5 * (np.log(2.0 * np.pi * u_hat**2) + (r / u_hat) ** 2)
    return float(np.mean(terms)) if average else float(np.sum(terms))


def laplace_loglik(y_hat, y_true, u_hat, average: bool = False) -> float:
    """Laplace log-likelihood; per ray -(ln(2u) + |y_hat - y| / u)."""
    y_hat, y_true, u_hat = _validate_loglik_args(y_hat, y_true, u_hat)
    terms = -(np.log(2.0 * u_hat) + np.abs(y_hat - y_true) / u_hat)
    return float(np.mean(terms)) if average else float(np.sum(terms))


def loglik(kind: str, y_hat, y_true, u_hat, average: bool = False) -> float:
    if kind == "gaussian":
        return gaussian_loglik(y_hat, y_true, u_hat, average)
    if kind == "laplace":
        return laplace_loglik(y_hat, y_true, u_hat, average)
    raise ValueError(f"unknown likelihood kind {kind!r}")


def fit_constant_scale(residuals, kind: str) -> float:
    """Maximum-likelihood constant scale for a residual sample.

    Laplace: mean absolute residual. Gaussian: root mean square.
    Floored at U_MIN so the result is always usable as an uncertainty.
    """
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise ValueError("empty residual sample")
    if kind == "laplace":
        s = float(np.mean(np.abs(r)))
    elif kind == "gaussian":
        s = float(np.sqrt(np.mean(r**2)))
    else:
        raise ValueError(f"unknown likelihood kind {kind!r}")
    return max(s, U_MIN)


@dataclass(frozen=True)
class UncertaintyVector:
    """Positive per-ray uncertainty with its likelihood family.

    Values are floored at U_MIN on construction.
    """

    values: np.ndarray
    kind: str = "laplace"

    def __post_init__(self):
        if self.kind not in ("gaussian", "laplace"):
            raise ValueError(f"unknown likelihood kind {self.kind!r}")
        v = np.maximum(np.asarray(self.values, dtype=float), U_MIN)
        if not np.all(np.isfinite(v)):
            raise ValueError("uncertainty values must be finite")
        object.__setattr__(self, "values", v)


# -- quadratic B-spline density approximation ---------------------------------

def _basis_matrix(knots: np.ndarray, degree: int, x: np.ndarray) -> np.ndarray:
    """Cox-de Boor basis values, shape (len(x), n_basis).

    Handles repeated (clamped) knots with the 0/0 -> 0 convention and
    closes the right end of the domain so x == knots[-1] evaluates on
    the last non-degenerate interval.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = len(knots) - 1
    B = np.zeros((m, x.size))
    last = None
    for i in range(m):
        if knots[i] < knots[i + 1]:
            B[i] = (x >= knots[i]) & (x < knots[i + 1])
            last = i
    if last is not None:
        B[last, x == knots[-1]] = 1.0
    for d in range(1, degree + 1):
        nb = m - d
        nxt = np.zeros((nb, x.size))
        for i in range(nb):
            den1 = knots[i + d] - knots[i]
            den2 = knots[i + d + 1] - knots[i + 1]
            acc = 0.0
            if den1 > 0:
                acc = (x - knots[i]) / den1 * B[i]
            if den2 > 0:
                acc = acc + (knots[i + d + 1] - x) / den2 * B[i + 1]
            nxt[i] = acc
        B = nxt
    return B.T


@dataclass(frozen=True)
class SplineModel:
    """Fitted density spline in piecewise-polynomial form.

    ``pdf_coeffs[j]`` holds (a0, a1, a2) of the quadratic on segment j
    in the local coordinate u = t - breaks[j]; ``cdf_coeffs[j]`` holds
    (c0, c1, c2, c3) of its exact cubic antiderivative. Outside the
    support the pdf is exactly 0 and the cdf saturates at 0 / 1.
    """

    n_segments: int
    fit_samples: int
    breaks: np.ndarray          # (S+1,)
    pdf_coeffs: np.ndarray      # (S, 3)
    cdf_coeffs: np.ndarray      # (S, 4)
    knots: np.ndarray           # clamped knot vector used for the fit
    coefficients: np.ndarray    # nonnegative B-spline coefficients

    def _locate(self, t_in: np.ndarray) -> np.ndarray:
        j = np.searchsorted(self.breaks, t_in, side="right") - 1
        return np.clip(j, 0, self.n_segments - 1)

    def pdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        out = np.zeros_like(t_arr)
        inside = (t_arr > -SUPPORT) & (t_arr < SUPPORT)
        if np.any(inside):
            ti = t_arr[inside]
            j = self._locate(ti)
            u = ti - self.breaks[j]
            a = self.pdf_coeffs[j]
            out[inside] = a[:, 0] + u * (a[:, 1] + u * a[:, 2])
        return float(out[0]) if scalar else out

    def cdf(self, t):
        t_arr = np.asarray(t, dtype=float)
        scalar = t_arr.ndim == 0
        t_arr = np.atleast_1d(t_arr)
        out = np.where(t_arr >= SUPPORT, 1.0, 0.0)
        inside = (t_arr > -SUPPORT) & (t_arr < SUPPORT)
        if np.any(inside):
            ti = t_arr[inside]
            j = self._locate(ti)
            u = ti - self.breaks[j]
            c = self.cdf_coeffs[j]
            out[inside] = c[:, 0] + u * (c[:, 1] + u * (c[:, 2] + u * c[:, 3]))
        return float(out[0]) if scalar else out

    def to_json(self) -> dict:
        return {
            "schema": SPLINE_SCHEMA,
            "n_segments": self.n_segments,
            "fit_samples": self.fit_samples,
            "breaks": self.breaks.tolist(),
            "pdf_coeffs": self.pdf_coeffs.tolist(),
            "cdf_coeffs": self.cdf_coeffs.tolist(),
            "knots": self.knots.tolist(),
            "coefficients": self.coefficients.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SplineModel":
        if data.get("schema") != SPLINE_SCHEMA:
            raise ConfigError(f"unsupported spline schema {data.get('schema')!r}")
        return cls(
            n_segments=int(data["n_segments"]),
            fit_samples=int(data["fit_samples"]),
            breaks=np.asarray(data["breaks"], dtype=float),
            pdf_coeffs=np.asarray(data["pdf_coeffs"], dtype=float),
            cdf_coeffs=np.asarray(data["cdf_coeffs"], dtype=float),
            knots=np.asarray(data["knots"], dtype=float),
            coefficients=np.asarray(data["coefficients"], dtype=float),
        )


def save_spline(model: SplineModel, path):
    with open(path, "w") as f:
        json.dump(model.to_json(), f, indent=2, sort_keys=True)
        f.write("\n")


def load_spline(path) -> SplineModel:
    with open(path) as f:
        return SplineModel.from_json(json.load(f))


def derive_spline(n_segments: int = 16, fit_samples: int = 512) -> SplineModel:
    """Fit the unit-integral quadratic spline approximating Laplace(0, 1).

    Constrained linear least squares on uniform knots over the support:
    endpoint coefficients are pinned to zero, symmetry is enforced by
    mirroring coefficients, negatives are clamped, and a final exact
    rescale restores the unit integral. Deterministic.
    """
    if n_segments < 8 or n_segments % 2 != 0:
        raise ValueError(f"n_segments must be even and >= 8, got {n_segments}")
    if fit_samples < 10 * n_segments:
        raise ValueError(f"fit_samples must be >= 10 * n_segments, got {fit_samples}")

    S = n_segments
    degree = 2
    breaks = np.linspace(-SUPPORT, SUPPORT, S + 1)
    knots = np.concatenate(([breaks[0]] * degree, breaks, [breaks[-1]] * degree))
    n_basis = S + degree  # == S + 2

    xs = np.linspace(-SUPPORT, SUPPORT, fit_samples)
    target = 0.5 * np.exp(-np.abs(xs))
    B = _basis_matrix(knots, degree, xs)

    # symmetry: one free parameter per mirrored pair, endpoints pinned to 0
    pairs = [(k, n_basis - 1 - k) for k in range(1, n_basis // 2)]
    A = np.column_stack([B[:, k] + B[:, mk] for k, mk in pairs])
    sol, *_ = np.linalg.lstsq(A, target, rcond=None)

    coeffs = np.zeros(n_basis)
    for (k, mk), v in zip(pairs, sol):
        coeffs[k] = coeffs[mk] = v
    coeffs = np.maximum(coeffs, 0.0)

    # exact integral of a degree-2 basis function is (knot span)/3
    spans = (knots[degree + 1:] - knots[:-(degree + 1)]) / (degree + 1)
    total = float(coeffs @ spans)
    if not (total > 0.0):
        raise ValueError("degenerate spline fit: zero total mass")
    coeffs /= total

    # convert to per-segment quadratics by exact 3-point interpolation
    h = breaks[1] - breaks[0]
    q0 = _basis_matrix(knots, degree, breaks[:-1]) @ coeffs
    qm = _basis_matrix(knots, degree, breaks[:-1] + 0.5 * h) @ coeffs
    q1 = _basis_matrix(knots, degree, breaks[1:]) @ coeffs
    a0 = q0
    a1 = (-3.0 * q0 + 4.0 * qm - q1) / h
    a2 = (2.0 * q0 - 4.0 * qm + 2.0 * q1) / h**2
    pdf_coeffs = np.column_stack((a0, a1, a2))

    seg_int = a0 * h + a1 * h**2 / 2.0 + a2 * h**3 / 3.0
    cum = np.concatenate(([0.0], np.cumsum(seg_int)))
    # pin mass exactly so the cdf reaches 1 at the right edge
    mass = cum[-1]
    pdf_coeffs /= mass
    cum /= mass
    cdf_coeffs = np.column_stack((cum[:-1], pdf_coeffs[:, 0],
                                  pdf_coeffs[:, 1] / 2.0, pdf_coeffs[:, 2] / 3.0))

    return SplineModel(
        n_segments=S,
        fit_samples=fit_samples,
        breaks=breaks,
        pdf_coeffs=pdf_coeffs,
        cdf_coeffs=cdf_coeffs,
        knots=knots,
        coefficients=coeffs,
    )


def spline_pdf(model: SplineModel, t):
    return model.pdf(t)


def spline_cdf(model: SplineModel, t):
    return model.cdf(t)


def occupancy_h(model: SplineModel, t):
    """Per-ray cell occupancy at normalized signed distance t.

    Negative t is in front of the estimated surface (occupancy falls to
    0), small positive t is the occupied band behind it, and far behind
    the curve settles at the 0.5 prior.
    """
    return model.cdf(t) - 0.5 * model.cdf(np.asarray(t, dtype=float) - SUPPORT)


def laplace_pdf(t):
    """Reference Laplace(0, 1) density (the spline's fitting target)."""
    return 0.5 * np.exp(-np.abs(np.asarray(t, dtype=float)))


_TWO_PI_E = 2.0 * math.pi * math.e


def analytic_avg_loglik(kind: str, scale: float) -> float:
    """Expected per-ray log-likelihood of a perfectly calibrated model.

    This is the negative differential entropy of the residual family:
    -(ln(2b) + 1) for Laplace(b), -0.5*ln(2*pi*e*sigma^2) for a Gaussian.
    """
    if kind == "laplace":
        return -(math.log(2.0 * scale) + 1.0)
    if kind == "gaussian":
        return -0.5 * math.log(_TWO_PI_E * scale**2)
    raise ValueError(f"unknown likelihood kind {kind!r}")
