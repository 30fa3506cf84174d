"""Square wells in one dimension and the two-particle state built from them.

Units default to hbar = m = 1.  Finite wells put V = 0 inside and V = depth
outside, so bound-state energies lie in (0, depth).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError

INFINITE = math.inf
ROOT_TOL = 1e-12
QUAD_ATOL = 1e-10
QUAD_RTOL = 1e-10
TAIL_CUTOFF = 1e-16  # tails are dropped where |psi| < TAIL_CUTOFF * peak


@dataclass(frozen=True)
class WellSpec:
    center: float
    half_width: float
    depth: float = INFINITE
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not self.half_width > 0:
            raise DomainError(f"half_width must be > 0, got {self.half_width}")
        if not self.depth > 0:
            raise DomainError(f"depth must be > 0 or infinite, got {self.depth}")
        if not (self.mass > 0 and self.hbar > 0):
            raise DomainError("mass and hbar must be positive")

    @property
    def infinite(self) -> bool:
        return math.isinf(self.depth)

    @property
    def edges(self) -> tuple[float, float]:
        return (self.center - self.half_width, self.center + self.half_width)


def non_overlapping(w1: WellSpec, w2: WellSpec) -> bool:
    left, right = sorted((w1, w2), key=lambda w: w.center)
    return left.center + left.half_width < right.center - right.half_width


@dataclass(frozen=True)
class Eigenstate:
    """A normalized real stationary state of a single well.

    ``support`` is exact for infinite wells and the tail-truncation window for
    finite ones; ``breakpoints`` are where the piecewise form changes.
    """

    quantum_number: int
    energy: float
    well: WellSpec
    support: tuple[float, float]
    breakpoints: tuple[float, ...]
    _psi: Callable = None
    _dpsi: Callable = None

    def __call__(self, x):
        return self._psi(np.asarray(x, dtype=float))

    def derivative(self, x):
        return self._dpsi(np.asarray(x, dtype=float))

    @property
    def wavefunction(self) -> Callable:
        return self.__call__


def infinite_well_eigenstate(w: WellSpec, n: int) -> Eigenstate:
    if not w.infinite:
        raise DomainError("infinite_well_eigenstate needs an infinite well")
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise DomainError(f"quantum number must be a positive integer, got {n!r}")
    lo, hi = w.edges
    L = 2 * w.half_width
    k = n * math.pi / L
    amp = math.sqrt(1 / w.half_width)

    def psi(x):
        inside = (x >= lo) & (x <= hi)
        return np.where(inside, amp * np.sin(k * (x - lo)), 0.0)

    def dpsi(x):
        inside = (x >= lo) & (x <= hi)
        return np.where(inside, amp * k * np.cos(k * (x - lo)), 0.0)

    energy = n**2 * math.pi**2 * w.hbar**2 / (2 * w.mass * L**2)
    return Eigenstate(n, energy, w, (lo, hi), (lo, hi), psi, dpsi)


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float = ROOT_TOL) -> float:
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _finite_roots(z0: float) -> list[tuple[float, bool]]:
    """Roots of the even/odd matching conditions, as (z, is_even), ascending."""
    roots = []
    j = 0
    while j * math.pi / 2 < z0:
        lo = j * math.pi / 2
        hi = min((j + 1) * math.pi / 2, z0)
        even = j % 2 == 0
        if even:
            g = lambda z: z * math.sin(z) - math.sqrt(max(z0 * z0 - z * z, 0.0)) * math.cos(z)
        else:
            g = lambda z: z * math.cos(z) + math.sqrt(max(z0 * z0 - z * z, 0.0)) * math.sin(z)
        z = bisect(g, lo, hi)
        if 0 < z < z0:
            roots.append((z, even))
        j += 1
    return roots


def finite_well_bound_states(w: WellSpec) -> list[Eigenstate]:
    """All bound states of a finite square well, ground state first."""
    if w.infinite:
        raise DomainError("finite_well_bound_states needs a finite depth")
    a, c = w.half_width, w.center
    z0 = a * math.sqrt(2 * w.mass * w.depth) / w.hbar
    states = []
    for n, (z, even) in enumerate(_finite_roots(z0), start=1):
        k = z / a
        kappa = math.sqrt(z0 * z0 - z * z) / a
        if even:
            amp = 1 / math.sqrt(a + math.sin(2 * z) / (2 * k) + math.cos(z) ** 2 / kappa)
            edge = amp * math.cos(z)
        else:
            amp = 1 / math.sqrt(a - math.sin(2 * z) / (2 * k) + math.sin(z) ** 2 / kappa)
            edge = amp * math.sin(z)
        psi, dpsi = _finite_piecewise(c, a, k, kappa, amp, edge, even)
        reach = max(math.log(abs(edge) / (TAIL_CUTOFF * amp)), 0.0) / kappa
        energy = (w.hbar * k) ** 2 / (2 * w.mass)
        states.append(Eigenstate(n, energy, w, (c - a - reach, c + a + reach), (c - a, c + a), psi, dpsi))
    return states


def _finite_piecewise(c, a, k, kappa, amp, edge, even):
    def psi(x):
        u = x - c
        au = np.abs(u)
        tail = edge * np.exp(-kappa * np.maximum(au - a, 0.0))
        if even:
            return np.where(au <= a, amp * np.cos(k * u), tail)
        return np.where(au <= a, amp * np.sin(k * u), np.sign(u) * tail)

    def dpsi(x):
        u = x - c
        au = np.abs(u)
        tail = edge * kappa * np.exp(-kappa * np.maximum(au - a, 0.0))
        if even:
            return np.where(au <= a, -amp * k * np.sin(k * u), -np.sign(u) * tail)
        return np.where(au <= a, amp * k * np.cos(k * u), -tail)

    return psi, dpsi


def simpson(func, a: float, b: float, atol=QUAD_ATOL, rtol=QUAD_RTOL, min_panels=16, max_panels=2**21):
    """Composite Simpson's rule, doubling the panel count until it settles.

    Stops when successive estimates differ by less than ``rtol`` of the value
    or, for integrands that cancel, by less than 1e-13 of the integral of
    ``|func|``; the result is then accurate to within ``atol``.
    """
    if b <= a:
        return 0.0
    n = min_panels + min_panels % 2
    prev = None
    while True:
        x = np.linspace(a, b, n + 1)
        y = func(x)
        if not np.all(np.isfinite(y)):
            raise NumericError(f"integrand is not finite on [{a}, {b}]")
        wts = np.ones(n + 1)
        wts[1:-1:2], wts[2:-1:2] = 4, 2
        h = (b - a) / n
        cur = h / 3 * float(wts @ y)
        scale = h / 3 * float(wts @ np.abs(y))
        if prev is not None:
            err = abs(cur - prev) / 15
            if err <= min(atol, max(rtol * abs(cur), 1e-13 * scale)):
                return cur
        if n >= max_panels:
            if prev is not None and abs(cur - prev) / 15 <= atol:
                return cur
            raise NumericError(f"quadrature did not converge on [{a}, {b}] with {n} panels")
        prev = cur
        n *= 2


def _integrate(func, lo, hi, breakpoints, density=1, **kw) -> float:
    cuts = sorted({lo, hi, *(p for p in breakpoints if lo < p < hi)})
    return math.fsum(simpson(func, x0, x1, min_panels=16 * density, **kw) for x0, x1 in zip(cuts, cuts[1:]))


def overlap(f: Eigenstate, g: Eigenstate, density: int = 1) -> float:
    """Integral of f(x) g(x); exactly 0 when the supports do not meet."""
    lo, hi = max(f.support[0], g.support[0]), min(f.support[1], g.support[1])
    if lo >= hi:
        return 0.0
    return _integrate(lambda x: f(x) * g(x), lo, hi, f.breakpoints + g.breakpoints, density)


def norm_squared(f: Eigenstate, density: int = 1) -> float:
    return _integrate(lambda x: f(x) ** 2, *f.support, f.breakpoints, density)


def interference_term(psi1: Eigenstate, psi2: Eigenstate) -> float:
    """<psi1|psi2> * <psi2|psi1>: the exchange factor of the two-particle density."""
    s12 = overlap(psi1, psi2)
    if s12 == 0.0:
        return 0.0
    return s12 * overlap(psi2, psi1)


class Symmetry(enum.Enum):
    ANTISYMMETRIC = -1
    SYMMETRIC = 1


@dataclass(frozen=True)
class TwoParticleState:
    left: Eigenstate
    right: Eigenstate
    symmetry: Symmetry = Symmetry.ANTISYMMETRIC

    def evaluate(self, a, b):
        direct = self.left(a) * self.right(b)
        exchanged = self.left(b) * self.right(a)
        if self.symmetry is Symmetry.ANTISYMMETRIC:
            return (direct - exchanged) / math.sqrt(2)
        return (direct + exchanged) / math.sqrt(2)

    def density(self, a, b):
        direct = self.left(a) * self.right(b)
        exchanged = self.left(b) * self.right(a)
        return 0.5 * (direct + self.symmetry.value * exchanged) ** 2


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int = 200

    def axis(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.points)


def default_grid(s: TwoParticleState, points: int = 200) -> GridSpec:
    lo = min(s.left.support[0], s.right.support[0])
    hi = max(s.left.support[1], s.right.support[1])
    return GridSpec(lo, hi, points)


def probability_decomposition_residual(s: TwoParticleState, grid: GridSpec | None = None) -> float:
    """Largest pointwise gap between |psi12|^2 and the interference-free split.

    Zero exactly when psi1(x) psi2(x) vanishes everywhere on the grid.
    """
    if s.symmetry is not Symmetry.ANTISYMMETRIC:
        raise DomainError("the decomposition residual is defined for antisymmetric states")
    grid = grid or default_grid(s)
    x = grid.axis()
    A, B = np.meshgrid(x, x, indexing="ij")
    direct = s.left(A) * s.right(B)
    exchanged = s.left(B) * s.right(A)
    split = 0.5 * direct**2 + 0.5 * exchanged**2
    return float(np.max(np.abs(0.5 * (direct - exchanged) ** 2 - split)))


def uncertainty_product(e: Eigenstate, density: int = 1) -> float:
    """Delta x * Delta p in units of hbar, using <p> = 0 for real bound states."""
    lo, hi = e.support
    bp = e.breakpoints
    mean_x = _integrate(lambda x: x * e(x) ** 2, lo, hi, bp, density)
    mean_x2 = _integrate(lambda x: x * x * e(x) ** 2, lo, hi, bp, density)
    mean_p2 = _integrate(lambda x: e.derivative(x) ** 2, lo, hi, bp, density)  # in units of hbar^2
    var_x = mean_x2 - mean_x**2
    if not (var_x > 0 and mean_p2 > 0):
        raise NumericError(f"degenerate spread: var_x={var_x}, <p^2>={mean_p2}")
    return math.sqrt(var_x * mean_p2)


def debroglie_wavelength(p: float, hbar: float = 1.0) -> float:
    if p == 0:
        raise DomainError("momentum must be non-zero")
    return 2 * math.pi * hbar / abs(p)


def eigenstate(w: WellSpec, n: int = 1) -> Eigenstate:
    """The n-th state of either kind of well."""
    if w.infinite:
        return infinite_well_eigenstate(w, n)
    states = finite_well_bound_states(w)
    if not 1 <= n <= len(states):
        raise DomainError(f"well binds {len(states)} states; n={n} requested")
    return states[n - 1]


@dataclass(frozen=True)
class SweepRow:
    separation: float
    depth: float
    interference: float
    residual: float


def separation_sweep(
    base: tuple[WellSpec, WellSpec],
    separations: Sequence[float],
    depths: Sequence[float],
    n: int = 1,
    grid_points: int = 200,
) -> list[SweepRow]:
    """Interference and residual for each (separation, depth), separation-major.

    Wells keep their half-widths and the midpoint of ``base``; separation is
    the centre-to-centre distance.
    """
    seps = list(separations)
    if not seps or any(not d > 0 for d in seps):
        raise DomainError("separations must be positive")
    if any(b <= a for a, b in zip(seps, seps[1:])):
        raise DomainError("separations must be strictly increasing (no duplicates)")
    w1, w2 = sorted(base, key=lambda w: w.center)
    mid = 0.5 * (w1.center + w2.center)
    rows = []
    for d in seps:
        for depth in depths:
            left = WellSpec(mid - d / 2, w1.half_width, depth, w1.mass, w1.hbar)
            right = WellSpec(mid + d / 2, w2.half_width, depth, w2.mass, w2.hbar)
            s = TwoParticleState(eigenstate(left, n), eigenstate(right, n))
            rows.append(
                SweepRow(
                    d,
                    depth,
                    interference_term(s.left, s.right),
                    probability_decomposition_residual(s, default_grid(s, grid_points)),
                )
            )
    return rows


def sweep_monotonicity_violations(rows: Sequence[SweepRow]) -> list[str]:
    """Places where interference grows with separation or with depth."""
    bad = []
    by_depth: dict[float, list[SweepRow]] = {}
    by_sep: dict[float, list[SweepRow]] = {}
    for r in rows:
        by_depth.setdefault(r.depth, []).append(r)
        by_sep.setdefault(r.separation, []).append(r)
    for depth, rs in by_depth.items():
        rs = sorted(rs, key=lambda r: r.separation)
        for r0, r1 in zip(rs, rs[1:]):
            if r1.interference > r0.interference:
                bad.append(f"depth {depth}: interference rises from separation {r0.separation} to {r1.separation}")
    for sep, rs in by_sep.items():
        rs = sorted(rs, key=lambda r: r.depth)
        for r0, r1 in zip(rs, rs[1:]):
            if r1.interference > r0.interference:
                bad.append(f"separation {sep}: interference rises from depth {r0.depth} to {r1.depth}")
    return bad
