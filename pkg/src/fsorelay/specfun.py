"""
Special-function kernel: log-gamma, Pochhammer symbols, Bessel K, the
generalized hypergeometric series and Meijer's G-function.

The Meijer-G convention is the usual Mellin-Barnes one::

    G^{m,n}_{p,q}(z | a; b) = 1/(2 pi i) * Int  prod_{j<m} Gamma(b_j - s)
                               * prod_{j<n} Gamma(1 - a_j + s)
                               / prod_{j>=m} Gamma(1 - b_j + s)
                               / prod_{j>=n} Gamma(a_j - s) * z**s  ds

Evaluation is by residues at the poles of the ``Gamma(b_j - s)`` factors
(Slater's theorem).  Parameters whose poles coincide are split by a small
symmetric perturbation followed by Richardson extrapolation.  When the
residue sums cancel too heavily to deliver the requested precision the
integral is evaluated directly along a vertical contour instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy import special as sc

__all__ = [
    "SpecialFunctionError",
    "PoleError",
    "NonConvergenceError",
    "PoleCollisionError",
    "SeriesAccuracy",
    "DEFAULT_ACCURACY",
    "MeijerGSpec",
    "GResult",
    "ln_gamma",
    "gamma_sign",
    "pochhammer",
    "bessel_k",
    "hyp_pfq",
    "meijer_g",
    "meijer_g_info",
    "meijerg",
    "bivariate_meijer_g",
    "perturb_and_extrapolate",
]

_EPS = np.finfo(float).eps

# Half-width of the symmetric parameter split used for coincident poles, and
# the number of Richardson levels (step doubles each level).
PERTURBATION = 1e-3
RICHARDSON_LEVELS = 3
# The double residue sum squares the 1/h amplification when both kernels
# have coincident poles, so it uses a wider split.
BIVARIATE_PERTURBATION = 1e-2

# Parameters closer than this to an integer spacing are treated as colliding.
_COLLISION_TOL = 1e-6
# Parameters closer than this are cancelled between numerator and denominator.
_CANCEL_TOL = 1e-13


class SpecialFunctionError(ArithmeticError):
    """Base class for special-function evaluation failures."""


class PoleError(SpecialFunctionError, ValueError):
    """Raised when a function is evaluated at one of its poles."""


class NonConvergenceError(SpecialFunctionError):
    """Raised when a series or integral fails to reach its tolerance."""


class PoleCollisionError(SpecialFunctionError):
    """Raised when left and right pole sequences of a G-function overlap."""


@dataclass(frozen=True)
class SeriesAccuracy:
    """Truncation control for series evaluations.

    Attributes
    ----------
    rel_tol : float
        A series stops once its next term is below ``rel_tol`` times the
        running sum.
    max_terms : int
        Hard cap on the number of terms.
    """

    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_ACCURACY = SeriesAccuracy()


@dataclass(frozen=True)
class MeijerGSpec:
    """Order, parameters and argument of ``G^{m,n}_{p,q}(z | a; b)``."""

    m: int
    n: int
    p: int
    q: int
    a: tuple = field(default=())
    b: tuple = field(default=())
    z: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", tuple(float(x) for x in self.a))
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        if min(self.m, self.n, self.p, self.q) < 0:
            raise ValueError("orders must be non-negative")
        if not (self.m <= self.q and self.n <= self.p):
            raise ValueError("need 0 <= m <= q and 0 <= n <= p")
        if len(self.a) != self.p or len(self.b) != self.q:
            raise ValueError(
                f"expected {self.p} upper and {self.q} lower parameters, "
                f"got {len(self.a)} and {len(self.b)}")
        if not (self.z > 0 and math.isfinite(self.z)):
            raise ValueError("argument z must be positive and finite")

    @classmethod
    def from_groups(cls, an: Sequence[float], ap: Sequence[float],
                    bm: Sequence[float], bq: Sequence[float],
                    z: float = 1.0) -> "MeijerGSpec":
        """Build a spec from the four parameter groups (mpmath ordering)."""
        an, ap, bm, bq = list(an), list(ap), list(bm), list(bq)
        return cls(len(bm), len(an), len(an) + len(ap), len(bm) + len(bq),
                   tuple(an + ap), tuple(bm + bq), z)

    @property
    def groups(self) -> tuple[tuple, tuple, tuple, tuple]:
        return (self.a[:self.n], self.a[self.n:], self.b[:self.m], self.b[self.m:])

    def with_z(self, z: float) -> "MeijerGSpec":
        return MeijerGSpec(self.m, self.n, self.p, self.q, self.a, self.b, z)

    def inverted(self) -> "MeijerGSpec":
        """Equivalent spec at ``1/z`` (parameter roles swapped)."""
        an, ap, bm, bq = self.groups
        return MeijerGSpec.from_groups(
            [1.0 - x for x in bm], [1.0 - x for x in bq],
            [1.0 - x for x in an], [1.0 - x for x in ap], 1.0 / self.z)


class GResult(NamedTuple):
    """Value of a G-function evaluation together with its diagnostics."""

    value: float
    error: float
    method: str
    perturbed: bool


# ---------------------------------------------------------------------------
# Elementary pieces
# ---------------------------------------------------------------------------

def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and x == math.floor(x)


def gamma_sign(x: float) -> int:
    """Sign of Gamma(x); 0 at the poles."""
    if x > 0:
        return 1
    if _is_nonpositive_int(x):
        return 0
    return -1 if math.floor(x) % 2 else 1


def ln_gamma(x: float) -> tuple[float, int]:
    """Return ``(log|Gamma(x)|, sign Gamma(x))``.

    Raises
    ------
    PoleError
        If `x` is zero or a negative integer.
    """
    if _is_nonpositive_int(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return math.lgamma(x), gamma_sign(x)


def pochhammer(x: float, n: int) -> float:
    """Rising factorial ``x (x+1) ... (x+n-1)``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = 1.0
    for k in range(n):
        out *= x + k
    return out


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function of the second kind, ``K_nu(x)``."""
    if not x > 0:
        raise ValueError("bessel_k requires x > 0")
    return float(sc.kv(nu, x))


def hyp_pfq(a: Sequence[float], b: Sequence[float], z: float,
            acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Generalized hypergeometric series ``pFq(a; b; z)``.

    The sum is accumulated exactly (``math.fsum``) and stops once the
    terms have started to shrink and the next one is below
    ``acc.rel_tol`` times the partial sum.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    for x in b:
        if _is_nonpositive_int(x):
            raise PoleError(f"lower parameter {x} is a non-positive integer")
    terminating = any(_is_nonpositive_int(x) for x in a)
    if len(a) > len(b) + 1 and not terminating and z != 0:
        raise NonConvergenceError("pFq with p > q + 1 diverges for z != 0")
    if len(a) == len(b) + 1 and not terminating and abs(z) >= 1:
        raise NonConvergenceError("pFq with p = q + 1 needs |z| < 1")

    terms = [1.0]
    term = 1.0
    partial = 1.0
    for k in range(acc.max_terms):
        ratio = z / (k + 1)
        for x in a:
            ratio *= x + k
        for x in b:
            ratio /= x + k
        term *= ratio
        if term == 0.0:
            return math.fsum(terms)
        terms.append(term)
        partial += term
        if abs(ratio) < 1 and abs(term) <= acc.rel_tol * abs(partial):
            return math.fsum(terms)
    raise NonConvergenceError(
        f"pFq did not converge within {acc.max_terms} terms")


# ---------------------------------------------------------------------------
# Meijer G: residue (Slater) expansion
# ---------------------------------------------------------------------------

def _reduce(an, ap, bm, bq):
    """Cancel parameter pairs whose Gamma factors divide out exactly."""
    an, ap, bm, bq = list(an), list(ap), list(bm), list(bq)

    def cancel(xs, ys):
        changed = True
        while changed:
            changed = False
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    if abs(x - y) <= _CANCEL_TOL * max(1.0, abs(x)):
                        del xs[i], ys[j]
                        changed = True
                        break
                if changed:
                    break

    cancel(ap, bm)
    cancel(an, bq)
    return an, ap, bm, bq


def _cluster_offsets(params: Sequence[float]) -> list[int]:
    """Integer offsets that split parameters with integer-spaced poles."""
    offsets = [0] * len(params)
    for i in range(len(params)):
        for j in range(i):
            d = params[i] - params[j]
            if abs(d - round(d)) < _COLLISION_TOL:
                offsets[i] = max(offsets[i], offsets[j] + 1)
    return offsets


def _residue_log_terms(an, ap, bm, bq, log_z, acc):
    """Log-magnitudes and signs of all residue terms, one list per pole family.

    Returns a list with one ``(bh, logs, signs)`` tuple per lower parameter of
    the first group; ``logs[k]`` is the log-magnitude of the k-th residue term
    at ``s = bh + k`` including the factor ``z**(bh + k)``.
    """
    families = []
    for h, bh in enumerate(bm):
        log_t = bh * log_z
        sign = 1
        zero = False
        for j, bj in enumerate(bm):
            if j == h:
                continue
            x = bj - bh
            if _is_nonpositive_int(x):
                raise PoleCollisionError("coincident poles in the residue sum")
            log_t += math.lgamma(x)
            sign *= gamma_sign(x)
        for aj in an:
            x = 1.0 - aj + bh
            if _is_nonpositive_int(x):
                raise PoleCollisionError(
                    "left and right pole sequences overlap (a_j - b_h is a positive integer)")
            log_t += math.lgamma(x)
            sign *= gamma_sign(x)
        # Reciprocal gammas may vanish for the first few terms; start where
        # they are all non-zero.
        start = 0
        for bj in bq:
            x = 1.0 - bj + bh
            if _is_nonpositive_int(x):
                start = max(start, int(-x) + 1)
        for aj in ap:
            x = aj - bh
            if _is_nonpositive_int(x):
                zero = True
        if zero:
            continue
        if start:
            # Step the numerator factors forward to k = start directly.
            log_t = bh * log_z
            sign = 1
            k = start
            log_t += k * log_z - math.lgamma(k + 1.0)
            sign *= -1 if k % 2 else 1
            for j, bj in enumerate(bm):
                if j != h:
                    x = bj - bh - k
                    log_t += math.lgamma(x)
                    sign *= gamma_sign(x)
            for aj in an:
                x = 1.0 - aj + bh + k
                log_t += math.lgamma(x)
                sign *= gamma_sign(x)
        k = start
        for bj in bq:
            x = 1.0 - bj + bh + k
            log_t -= math.lgamma(x)
            sign *= gamma_sign(x)
        for aj in ap:
            x = aj - bh - k
            if _is_nonpositive_int(x):
                zero = True
                break
            log_t -= math.lgamma(x)
            sign *= gamma_sign(x)
        if zero:
            continue

        # Term ratios are only monotone once k has passed every parameter
        # offset; before that a family can dip and grow again.
        offsets = [bj - bh for bj in bm] + [aj - bh for aj in ap] + \
                  [bj - bh for bj in bq] + [aj - bh for aj in an]
        k_min = max([0.0] + [abs(x) for x in offsets]) + 1.0
        logs = [log_t]
        signs = [sign]
        peak = log_t
        log_tol = math.log(acc.rel_tol) - 2.0
        while True:
            ratio = -1.0 / (k + 1)
            for j, bj in enumerate(bm):
                if j != h:
                    ratio /= bj - bh - k - 1
            for aj in an:
                ratio *= 1.0 - aj + bh + k
            for bj in bq:
                ratio /= 1.0 - bj + bh + k
            for aj in ap:
                ratio *= aj - bh - k - 1
            if ratio == 0.0:
                break
            log_r = math.log(abs(ratio)) + log_z
            log_t += log_r
            sign = sign if ratio > 0 else -sign
            k += 1
            logs.append(log_t)
            signs.append(sign)
            peak = max(peak, log_t)
            if k > k_min and log_r < -0.7 and log_t < peak + log_tol:
                break
            if len(logs) > acc.max_terms:
                raise NonConvergenceError(
                    f"residue series did not converge within {acc.max_terms} terms")
        families.append((bh, logs, signs))
    return families


def _slater(an, ap, bm, bq, z, acc):
    """Residue sum; returns ``(value, magnitude_scale)``."""
    families = _residue_log_terms(an, ap, bm, bq, math.log(z), acc)
    if not families:
        return 0.0, 0.0
    # Rounding in the accumulated log-ratios grows with the family length.
    growth = 8.0 + 2.0 * max(len(f[1]) for f in families)
    logs = np.concatenate([np.asarray(f[1]) for f in families])
    signs = np.concatenate([np.asarray(f[2], dtype=float) for f in families])
    top = float(logs.max())
    scaled = signs * np.exp(logs - top)
    total = math.fsum(scaled.tolist())
    if top > 700:
        if total == 0.0:
            return 0.0, math.inf
        return math.copysign(math.exp(top + math.log(abs(total))), total), math.inf
    scale = math.exp(top)
    return total * scale, growth * scale


def _richardson(values: list[float]) -> tuple[float, float]:
    """Extrapolate ``g(h), g(2h), g(4h), ...`` (even in h) to ``h -> 0``."""
    table = list(values)
    previous = table[0]
    estimate = table[0]
    for j in range(1, len(values)):
        f = 4.0 ** j
        table = [(f * table[i] - table[i + 1]) / (f - 1.0) for i in range(len(table) - 1)]
        previous, estimate = estimate, table[0]
    return estimate, abs(estimate - previous)


def perturb_and_extrapolate(fn, params: Sequence[float],
                            step: float = PERTURBATION) -> tuple[float, bool]:
    """Evaluate ``fn(params)`` with integer-spaced parameters split apart.

    If no two entries of `params` differ by an integer, returns
    ``(fn(params), False)``.  Otherwise the colliding entries are shifted by
    ``+-h * offset`` for ``h = step * 2**i``, the symmetric averages
    are Richardson-extrapolated to ``h -> 0`` and ``(value, True)`` is
    returned.
    """
    params = list(params)
    offsets = _cluster_offsets(params)
    if not any(offsets):
        return fn(params), False
    levels = []
    for level in range(RICHARDSON_LEVELS):
        h = step * 2 ** level
        vals = [fn([x + s * h * o for x, o in zip(params, offsets)]) for s in (1.0, -1.0)]
        levels.append(0.5 * (vals[0] + vals[1]))
    return _richardson(levels)[0], True


def _slater_perturbed(an, ap, bm, bq, z, acc):
    """Residue sum with coincident poles split; returns (value, error, perturbed)."""
    offsets = _cluster_offsets(bm)
    if not any(offsets):
        value, scale = _slater(an, ap, bm, bq, z, acc)
        return value, _EPS * scale, False

    levels = []
    scale = 0.0
    for level in range(RICHARDSON_LEVELS):
        h = PERTURBATION * 2 ** level
        acc_sum = 0.0
        for sgn in (1.0, -1.0):
            shifted = [x + sgn * h * o for x, o in zip(bm, offsets)]
            v, s = _slater(an, ap, shifted, bq, z, acc)
            acc_sum += v
            scale = max(scale, s)
        levels.append(0.5 * acc_sum)
    value, trunc = _richardson(levels)
    return value, trunc + 4 * _EPS * scale, True


# ---------------------------------------------------------------------------
# Meijer G: direct contour integration
# ---------------------------------------------------------------------------

def _contour_applicable(an, ap, bm, bq) -> bool:
    m, n = len(bm), len(an)
    p, q = n + len(ap), m + len(bq)
    if m + n - 0.5 * (p + q) <= 0:
        return False
    lo = max(an) - 1.0 if an else -math.inf
    hi = min(bm) if bm else math.inf
    return lo < hi


def _contour(an, ap, bm, bq, z, rel_tol):
    """Integrate the Mellin-Barnes representation along ``Re s = c``.

    ``c`` is placed at the minimum of the integrand on the real axis (a
    saddle point), which keeps the oscillatory cancellation small.
    """
    an_, ap_, bm_, bq_ = (np.asarray(v, dtype=float) for v in (an, ap, bm, bq))
    log_z = math.log(z)

    def log_kernel(s):
        return (sc.loggamma(bm_ - s).sum() + sc.loggamma(1.0 - an_ + s).sum()
                - sc.loggamma(1.0 - bq_ + s).sum() - sc.loggamma(ap_ - s).sum()
                + s * log_z)

    lo = float(an_.max()) - 1.0 if an_.size else None
    hi = float(bm_.min()) if bm_.size else None
    if lo is None and hi is None:
        raise NonConvergenceError("contour needs at least one gamma factor")
    if lo is None:
        lo = hi - 60.0
    if hi is None:
        hi = lo + 60.0
    width = hi - lo
    res = optimize.minimize_scalar(
        lambda c: log_kernel(complex(c, 0.0)).real,
        bounds=(lo + 0.02 * width, hi - 0.02 * width), method="bounded")
    c = float(res.x)
    base = log_kernel(complex(c, 0.0)).real

    def integrand(t):
        w = log_kernel(complex(c, t))
        return math.exp(w.real - base) * math.cos(w.imag)

    cutoff = math.log(rel_tol) - 8.0
    top = 1.0
    while log_kernel(complex(c, top)).real - base > cutoff:
        top *= 1.5
        if top > 1e4:
            raise NonConvergenceError("contour integrand does not decay")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, top, limit=500,
                                  epsabs=0.0, epsrel=max(rel_tol, 1e-14))
    scale = math.exp(base) / math.pi
    return val * scale, (err + 1e-14 * abs(val)) * scale


# ---------------------------------------------------------------------------
# Meijer G: public entry points
# ---------------------------------------------------------------------------

def _evaluate(an, ap, bm, bq, z, acc) -> GResult:
    an, ap, bm, bq = _reduce(an, ap, bm, bq)
    p, q = len(an) + len(ap), len(bm) + len(bq)
    target = max(100.0 * acc.rel_tol, 1e-14)

    if p > q or (p == q and z > 1.0):
        return _evaluate([1.0 - x for x in bm], [1.0 - x for x in bq],
                         [1.0 - x for x in an], [1.0 - x for x in ap], 1.0 / z, acc)
    if p == q and z == 1.0:
        direct = _evaluate_direct(an, ap, bm, bq, 1.0, acc, target)
        inv = _evaluate_direct([1.0 - x for x in bm], [1.0 - x for x in bq],
                               [1.0 - x for x in an], [1.0 - x for x in ap], 1.0, acc, target)
        if abs(direct.value - inv.value) > 1e-6 * max(abs(direct.value), abs(inv.value), 1e-300):
            raise NonConvergenceError("direct and inverted expansions disagree at |z| = 1")
        return GResult(0.5 * (direct.value + inv.value), max(direct.error, inv.error),
                       "average", direct.perturbed or inv.perturbed)
    return _evaluate_direct(an, ap, bm, bq, z, acc, target)


def _evaluate_direct(an, ap, bm, bq, z, acc, target) -> GResult:
    contour_ok = _contour_applicable(an, ap, bm, bq)
    try:
        value, err, perturbed = _slater_perturbed(an, ap, bm, bq, z, acc)
    except NonConvergenceError:
        if not contour_ok:
            raise
        value, err, perturbed = math.nan, math.inf, False
    if err <= target * abs(value) or not contour_ok:
        return GResult(value, err, "residues", perturbed)
    cval, cerr = _contour(an, ap, bm, bq, z, min(acc.rel_tol, 1e-12))
    if cerr < err:
        return GResult(cval, cerr, "contour", False)
    return GResult(value, err, "residues", perturbed)


def meijer_g_info(spec: MeijerGSpec, acc: SeriesAccuracy = DEFAULT_ACCURACY) -> GResult:
    """Evaluate a G-function and report error estimate and method used."""
    an, ap, bm, bq = spec.groups
    return _evaluate(list(an), list(ap), list(bm), list(bq), spec.z, acc)


def meijer_g(spec: MeijerGSpec, acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Real value of ``G^{m,n}_{p,q}(z | a; b)`` for ``z > 0``."""
    return meijer_g_info(spec, acc).value


def meijerg(an: Sequence[float], ap: Sequence[float], bm: Sequence[float],
            bq: Sequence[float], z: float,
            acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Shorthand for :func:`meijer_g` taking the four parameter groups."""
    return meijer_g(MeijerGSpec.from_groups(an, ap, bm, bq, z), acc)


# ---------------------------------------------------------------------------
# Bivariate G
# ---------------------------------------------------------------------------

def _fixed_length_terms(an, ap, bm, bq, h, log_z, n_terms):
    bh = bm[h]
    logs = np.full(n_terms, -np.inf)
    signs = np.zeros(n_terms)
    for aj in ap:
        if _is_nonpositive_int(aj - bh):
            return None
    for k in range(n_terms):
        log_t = (bh + k) * log_z - math.lgamma(k + 1.0)
        sign = -1 if k % 2 else 1
        zero = False
        for j, bj in enumerate(bm):
            if j == h:
                continue
            x = bj - bh - k
            if _is_nonpositive_int(x):
                raise PoleCollisionError("coincident poles in the residue sum")
            log_t += math.lgamma(x)
            sign *= gamma_sign(x)
        for aj in an:
            x = 1.0 - aj + bh + k
            if _is_nonpositive_int(x):
                raise PoleCollisionError("left and right pole sequences overlap")
            log_t += math.lgamma(x)
            sign *= gamma_sign(x)
        for bj in bq:
            x = 1.0 - bj + bh + k
            if _is_nonpositive_int(x):
                zero = True
                break
            log_t -= math.lgamma(x)
            sign *= gamma_sign(x)
        for aj in ap:
            x = aj - bh - k
            if _is_nonpositive_int(x):
                zero = True
                break
            log_t -= math.lgamma(x)
            sign *= gamma_sign(x)
        if not zero:
            logs[k] = log_t
            signs[k] = sign
    return bh + np.arange(n_terms), logs, signs


def _bivariate_sum(outer, g1, g2, z1, z2, n_terms):
    lz1, lz2 = math.log(z1), math.log(z2)
    f1 = [f for f in (_fixed_length_terms(*g1, h, lz1, n_terms) for h in range(len(g1[2])))
          if f is not None]
    f2 = [f for f in (_fixed_length_terms(*g2, h, lz2, n_terms) for h in range(len(g2[2])))
          if f is not None]
    blocks_log = []
    blocks_sign = []
    edge = -np.inf
    for e1, l1, s1 in f1:
        for e2, l2, s2 in f2:
            L = l1[:, None] + l2[None, :]
            S = s1[:, None] * s2[None, :]
            arg = e1[:, None] + e2[None, :]
            for a0 in outer:
                x = 1.0 - a0 + arg
                if np.any((x <= 0) & (x == np.floor(x))):
                    raise PoleCollisionError("outer gamma factor hits a pole")
                L = L + sc.gammaln(x)
                S = S * sc.gammasgn(x)
            blocks_log.append(L)
            blocks_sign.append(S)
            edge = max(edge, float(np.max(L[-1, :])), float(np.max(L[:, -1])))
    logs = np.concatenate([b.ravel() for b in blocks_log])
    signs = np.concatenate([b.ravel() for b in blocks_sign])
    finite = np.isfinite(logs) & (signs != 0)
    logs, signs = logs[finite], signs[finite]
    if logs.size == 0:
        return 0.0, 0.0, -np.inf
    top = float(logs.max())
    total = math.fsum((signs * np.exp(logs - top)).tolist())
    return total * math.exp(top), math.exp(top), edge - top


def bivariate_meijer_g(upper_outer: Sequence[float], inner1: MeijerGSpec,
                       inner2: MeijerGSpec, z1: float, z2: float,
                       acc: SeriesAccuracy = DEFAULT_ACCURACY) -> float:
    """Bivariate G-function coupling two Meijer kernels through Gamma(1 - a + s + t).

    Defined by the double Mellin-Barnes integral ::

        1/(2 pi i)^2 Int Int prod_j Gamma(1 - c_j + s + t)
                             * K1(s) K2(t) z1**s z2**t  ds dt

    where ``c_j`` are the entries of `upper_outer` and ``K1``, ``K2`` are
    the Meijer kernels of `inner1` and `inner2` (their own ``z`` fields are
    ignored).  With one outer parameter ``c`` this equals ::

        Int_0^inf x**(-c) exp(-x) G1(z1 x) G2(z2 x) dx

    Evaluated as a double residue sum over the right-hand poles of both
    kernels; coincident poles are split as in :func:`meijer_g`.

    Raises
    ------
    NonConvergenceError
        If the double series has not settled within ``acc.max_terms``
        terms per direction, or cancellation leaves less precision than
        ``acc.rel_tol`` asks for.  Callers are expected to fall back to
        direct quadrature.
    """
    if not (z1 > 0 and z2 > 0):
        raise ValueError("bivariate_meijer_g needs positive arguments")
    outer = [float(c) for c in upper_outer]
    g1 = [list(g) for g in _reduce(*inner1.groups)]
    g2 = [list(g) for g in _reduce(*inner2.groups)]
    for g in (g1, g2):
        if len(g[0]) + len(g[1]) >= len(g[2]) + len(g[3]):
            raise NonConvergenceError("inner kernels must have p < q")
    off1 = _cluster_offsets(g1[2])
    off2 = _cluster_offsets(g2[2])
    perturbed = any(off1) or any(off2)

    def evaluate(h, n_terms):
        a1 = [g1[0], g1[1], [x + h * o for x, o in zip(g1[2], off1)], g1[3]]
        a2 = [g2[0], g2[1], [x + h * o for x, o in zip(g2[2], off2)], g2[3]]
        return _bivariate_sum(outer, a1, a2, z1, z2, n_terms)

    # Perturbed terms carry factors z**(h*offset), so the expansion in h is
    # really one in h*|log z|; keep that product near 1e-2.
    spread = max(1.0, abs(math.log(z1)), abs(math.log(z2)))
    step = min(BIVARIATE_PERTURBATION, max(1e-4, BIVARIATE_PERTURBATION / spread))
    log_tol = math.log(acc.rel_tol)
    n_terms = 24
    while True:
        if perturbed:
            levels = []
            scale = 0.0
            edge = -np.inf
            for level in range(RICHARDSON_LEVELS):
                h = step * 2 ** level
                vp, sp, ep = evaluate(h, n_terms)
                vm, sm, em = evaluate(-h, n_terms)
                levels.append(0.5 * (vp + vm))
                scale = max(scale, sp, sm)
                edge = max(edge, ep, em)
            value, trunc = _richardson(levels)
            err = trunc + 64 * _EPS * scale
        else:
            value, scale, edge = evaluate(0.0, n_terms)
            err = 16 * _EPS * scale
        if edge < log_tol - 2.0:
            break
        if n_terms >= acc.max_terms:
            raise NonConvergenceError("bivariate series did not settle")
        n_terms = min(2 * n_terms, acc.max_terms)
    if err > max(1e3 * acc.rel_tol, 1e-12) * abs(value):
        raise NonConvergenceError(
            f"bivariate series lost precision (estimated relative error {err / abs(value):.1e})")
    return value
