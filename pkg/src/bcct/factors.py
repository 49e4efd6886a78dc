"""Outer functions, singular inner functions and Blaschke products.

Outer functions are built from a positive log-integrable weight on a closed
carrier set: the boundary modulus is the weight on the set and 1 off it, the
boundary phase is the harmonic conjugate of the log-modulus, and interior
values come from the discrete Herglotz integral

    W(z) = exp( (1/size) * sum_m log(w_m) * (zeta_m + z)/(zeta_m - z) ).

Singular inner functions use the same kernel with negative atomic masses,
    S_nu(z) = exp( - sum_a mass_a * (zeta_a + z)/(zeta_a - z) ),
and Blaschke products multiply in the usual normalized factors.  All three
factors expose closed-form z-derivatives of their logarithms, which powers
the derivative-growth certificates near the carrier.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._expderiv import exp_t_derivatives
from .boundary_calculus import (
    AnalyticSeries,
    analytic_coefficients,
    conjugate_function,
    grid_angles,
    indicator_mask,
)
from .circle_sets import (
    TWO_PI,
    BeurlingCarlesonSet,
    dist_to_set,
    distances_to_set,
)
from .errors import ResolutionError, WeightNotLogIntegrable

LOG_FLOOR = -1.0e3


# ---------------------------------------------------------------------------
# boundary weights and outer functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryWeight:
    """Positive bounded weight supported on a closed carrier set.

    ``values`` holds full-grid samples; only entries under ``mask`` (the
    carrier) are meaningful.  ``log_integral`` is the grid quadrature of
    log(w) over the carrier, certified above the floor.
    """

    support: BeurlingCarlesonSet
    grid_log2: int
    values: np.ndarray
    mask: np.ndarray
    log_integral: float

    @property
    def w_max(self) -> float:
        return float(np.max(self.values[self.mask]))


def boundary_weight(
    E: BeurlingCarlesonSet,
    values,
    grid_log2: int,
    floor: float = LOG_FLOOR,
) -> BoundaryWeight:
    """Build a :class:`BoundaryWeight` from samples or a callable of the angle."""
    n = 1 << grid_log2
    mask = indicator_mask(E, grid_log2)
    if callable(values):
        vals = np.asarray(values(grid_angles(grid_log2)), dtype=float)
    elif np.isscalar(values):
        vals = np.full(n, float(values))
    else:
        vals = np.asarray(values, dtype=float)
        if vals.shape != (n,):
            raise ValueError("weight samples must cover the full grid")
    on = vals[mask]
    if on.size and (np.any(~np.isfinite(on)) or np.any(on <= 0.0)):
        raise WeightNotLogIntegrable("weight must be finite and positive on the carrier")
    with np.errstate(divide="ignore"):
        logw = np.where(mask, np.log(np.maximum(vals, 1e-320)), 0.0)
    log_integral = float(np.sum(logw[mask]) / n)
    if not np.isfinite(log_integral) or log_integral <= floor:
        raise WeightNotLogIntegrable(
            f"quadrature of log w is {log_integral}, below the floor {floor}"
        )
    return BoundaryWeight(E, grid_log2, vals, mask, log_integral)


@dataclass(frozen=True)
class OuterFunction:
    """Outer function with modulus w on the carrier and 1 elsewhere."""

    weight: BoundaryWeight
    boundary: np.ndarray        # samples of W on the grid
    log_modulus: np.ndarray     # u = log|W| samples (real, 0 off the carrier)
    series: AnalyticSeries      # analytic projection of the boundary samples

    @property
    def grid_log2(self) -> int:
        return self.weight.grid_log2

    def eval(self, z) -> complex | np.ndarray:
        """Interior values through the discrete Herglotz integral (exact
        quadrature identity at z = 0)."""
        return herglotz_exp(self.log_modulus, z)

    def log_z_derivs(self, z: np.ndarray, m_max: int) -> list[np.ndarray]:
        return herglotz_log_derivs(self.log_modulus, z, m_max)


def outer_from_weight(w: BoundaryWeight, band: int | None = None) -> OuterFunction:
    """Boundary samples exp(u + i*conj(u)) with u = log(w) on the carrier."""
    n = 1 << w.grid_log2
    with np.errstate(divide="ignore"):
        u = np.where(w.mask, np.log(np.maximum(w.values, 1e-320)), 0.0)
    boundary = np.exp(u + 1j * conjugate_function(u))
    if band is None:
        band = n // 2 - 1
    series = analytic_coefficients(boundary, band)
    return OuterFunction(weight=w, boundary=boundary, log_modulus=u, series=series)


def herglotz_exp(log_modulus: np.ndarray, z) -> complex | np.ndarray:
    """exp of the discrete Herglotz integral of a real grid function."""
    n = len(log_modulus)
    zeta = np.exp(1j * TWO_PI * np.arange(n) / n)
    nz = np.nonzero(log_modulus)[0]
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    out = np.empty_like(flat)
    step = max(1, 2_000_000 // max(1, len(nz)))
    for i in range(0, len(flat), step):
        blk = flat[i : i + step, None]
        kern = (zeta[nz] + blk) / (zeta[nz] - blk)
        out[i : i + step] = np.exp(kern @ log_modulus[nz] / n)
    out = out.reshape(z.shape)
    return out if out.shape else complex(out)


def herglotz_log_derivs(log_modulus: np.ndarray, z: np.ndarray, m_max: int):
    """d^k/dz^k of the discrete Herglotz integral, k = 1..m_max."""
    n = len(log_modulus)
    zeta = np.exp(1j * TWO_PI * np.arange(n) / n)
    nz = np.nonzero(log_modulus)[0]
    z = np.asarray(z, dtype=complex)
    diff = zeta[nz] - z[..., None]
    out = []
    fact = 1.0
    power = diff * diff
    for k in range(1, m_max + 1):
        fact *= k
        out.append((2.0 * fact) * np.sum(zeta[nz] * log_modulus[nz] / power, axis=-1) / n)
        power = power * diff
    return out


# ---------------------------------------------------------------------------
# singular measures and inner functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    angle: float
    mass: float
    part: str = "C"  # declared tag: "C" or "K"

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("atom mass must be positive")
        if self.part not in ("C", "K"):
            raise ValueError("atom part tag must be 'C' or 'K'")

    @property
    def point(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))


@dataclass(frozen=True)
class SingularMeasure:
    """Atomic singular measure with a declared C/K split.

    The split is metadata: the C part is the portion carried by measure-zero
    Beurling-Carleson sets (``carrier_C`` when supplied) and the K part the
    portion vanishing on all of them.  Nothing is computed from raw measure
    data; callers declare the tags.
    """

    atoms: tuple[Atom, ...]
    carrier_C: BeurlingCarlesonSet | None = None

    def __post_init__(self):
        if self.carrier_C is not None:
            for a in self.atoms:
                if a.part == "C" and dist_to_set(a.angle, self.carrier_C) > 1e-12:
                    raise ValueError("a C-tagged atom lies outside carrier_C")

    @property
    def total_mass(self) -> float:
        return sum(a.mass for a in self.atoms)

    def part_mass(self, tag: str) -> float:
        return sum(a.mass for a in self.atoms if a.part == tag)

    def restricted(self, tag: str) -> "SingularMeasure":
        return SingularMeasure(
            tuple(a for a in self.atoms if a.part == tag),
            self.carrier_C if tag == "C" else None,
        )


def inner_singular_eval(nu: SingularMeasure, z) -> complex | np.ndarray:
    """S_nu(z) = exp(-sum_a mass_a (zeta_a + z)/(zeta_a - z)); radial limit 0
    at the atoms themselves."""
    z = np.asarray(z, dtype=complex)
    acc = np.zeros(z.shape, dtype=complex)
    hit = np.zeros(z.shape, dtype=bool)
    for a in nu.atoms:
        diff = a.point - z
        near = np.abs(diff) < 1e-15
        hit |= near
        safe = np.where(near, 1.0, diff)
        acc += a.mass * (a.point + z) / safe
    out = np.exp(-acc)
    out = np.where(hit, 0.0, out)
    return out if out.shape else complex(out)


def _atomic_inner_coefficients(mass: float, band: int) -> np.ndarray:
    """Taylor coefficients of exp(-mass*(1+z)/(1-z)) via the Laguerre recurrence.

    With x = 2*mass the generating identity exp(-x z/(1-z)) = (1-z) *
    sum_n L_n(x) z^n gives coefficient e^{-mass} (L_n(x) - L_{n-1}(x)).
    """
    x = 2.0 * mass
    Ls = np.empty(band + 1)
    Ls[0] = 1.0
    if band >= 1:
        Ls[1] = 1.0 - x
    for n in range(1, band):
        Ls[n + 1] = ((2 * n + 1 - x) * Ls[n] - n * Ls[n - 1]) / (n + 1)
    out = np.empty(band + 1)
    out[0] = 1.0
    out[1:] = Ls[1:] - Ls[:-1]
    return math.exp(-mass) * out


def _blaschke_factor_coefficients(a: complex, band: int) -> np.ndarray:
    """Taylor coefficients of (|a|/a)(a - z)/(1 - conj(a) z); [0, 1] for a = 0."""
    out = np.zeros(band + 1, dtype=complex)
    if a == 0:
        out[1] = 1.0
        return out
    ac = np.conj(a)
    out[0] = abs(a)
    n = np.arange(1, band + 1)
    out[1:] = (abs(a) / a) * (abs(a) ** 2 - 1.0) * ac ** (n - 1)
    return out


def _poly_mul(a: np.ndarray, b: np.ndarray, band: int) -> np.ndarray:
    """First band+1 coefficients of the product of two truncated series."""
    n = 1
    while n < len(a) + len(b):
        n <<= 1
    fa = np.fft.fft(a, n)
    fb = np.fft.fft(b, n)
    return np.fft.ifft(fa * fb)[: band + 1]


@dataclass(frozen=True)
class InnerFunction:
    """Blaschke part plus atomic singular part; |theta| <= 1 on the disk and
    |theta| = 1 on the circle away from atoms."""

    blaschke_zeros: tuple[complex, ...] = ()
    singular: SingularMeasure = SingularMeasure(())

    def __post_init__(self):
        for a in self.blaschke_zeros:
            if abs(a) >= 1.0:
                raise ValueError("Blaschke zeros must lie inside the open disk")

    @property
    def is_trivial(self) -> bool:
        return not self.blaschke_zeros and not self.singular.atoms

    def eval(self, z) -> complex | np.ndarray:
        z = np.asarray(z, dtype=complex)
        out = np.asarray(inner_singular_eval(self.singular, z), dtype=complex)
        for a in self.blaschke_zeros:
            if a == 0:
                out = out * z
            else:
                out = out * (abs(a) / a) * (a - z) / (1.0 - np.conj(a) * z)
        return out if out.shape else complex(out)

    def boundary_samples(self, grid_log2: int) -> np.ndarray:
        """Samples on the grid; atoms are evaluated through the boundary
        phase formula exp(-i sum mass cot((t - t_a)/2)), which keeps the
        modulus exactly 1 away from the atoms (0 at exact atom hits)."""
        t = grid_angles(grid_log2)
        z = np.exp(1j * t)
        out = np.ones(len(t), dtype=complex)
        hit = np.zeros(len(t), dtype=bool)
        for atom in self.singular.atoms:
            half = 0.5 * (t - atom.angle)
            near = np.abs(np.sin(half)) < 1e-15
            hit |= near
            phase = atom.mass / np.tan(np.where(near, 1.0, half))
            out = out * np.exp(-1j * phase)
        for a in self.blaschke_zeros:
            if a == 0:
                out = out * z
            else:
                out = out * (abs(a) / a) * (a - z) / (1.0 - np.conj(a) * z)
        return np.where(hit, 0.0, out)

    def coefficients(self, band: int) -> np.ndarray:
        """Taylor coefficients 0..band, computed factor by factor (exact up
        to rounding; no grid sampling is involved)."""
        coeffs = np.zeros(band + 1, dtype=complex)
        coeffs[0] = 1.0
        for atom in self.singular.atoms:
            fac = _atomic_inner_coefficients(atom.mass, band).astype(complex)
            rot = np.exp(-1j * atom.angle * np.arange(band + 1))
            coeffs = _poly_mul(coeffs, fac * rot, band)
        for a in self.blaschke_zeros:
            coeffs = _poly_mul(coeffs, _blaschke_factor_coefficients(a, band), band)
        return coeffs

    def log_z_derivs(self, z: np.ndarray, m_max: int) -> list[np.ndarray]:
        """d^k/dz^k log(theta) for k = 1..m_max (pole sums, closed form)."""
        z = np.asarray(z, dtype=complex)
        out = [np.zeros(z.shape, dtype=complex) for _ in range(m_max)]
        fact = 1.0
        for k in range(1, m_max + 1):
            fact *= k
            acc = out[k - 1]
            for atom in self.singular.atoms:
                acc -= atom.mass * 2.0 * atom.point * fact / (atom.point - z) ** (k + 1)
            for a in self.blaschke_zeros:
                acc += (fact / k) * (-1.0) ** (k - 1) / (z - a) ** k
                if a != 0:
                    acc += (fact / k) * np.conj(a) ** k / (1.0 - np.conj(a) * z) ** k
        return out


# ---------------------------------------------------------------------------
# derivative-growth certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeBoundReport:
    """Fitted constants C_m(level) = max |d^m/dt^m F| * dist^{2m} per level."""

    orders: tuple[int, ...]
    levels: tuple[float, ...]
    constants: dict
    stability_factor: float

    def stable(self, m: int, factor: float | None = None) -> bool:
        f = self.stability_factor if factor is None else factor
        cs = [c for c in self.constants[m] if c > 0.0]
        if len(cs) <= 1:
            return True
        ratios = [max(a, b) / min(a, b) for a, b in zip(cs, cs[1:])]
        return max(ratios) <= f

    def to_json(self) -> dict:
        return {
            "levels": list(self.levels),
            "constants": {str(m): [float(c) for c in self.constants[m]] for m in self.orders},
            "stability_factor": self.stability_factor,
            "stable": {str(m): self.stable(m) for m in self.orders},
        }


def _dyadic_level_points(carrier: BeurlingCarlesonSet, grid_log2: int, levels: int):
    """Grid angles grouped in dyadic distance windows off the carrier."""
    l_max = grid_log2 - 3
    l_min = l_max - levels + 1
    if l_min < 1:
        raise ResolutionError("grid too coarse for the requested levels")
    t = grid_angles(grid_log2)
    dist = distances_to_set(t, carrier)
    out = []
    for l in range(l_min, l_max + 1):
        d = 2.0 ** (-l)
        sel = (dist >= d) & (dist < 2.0 * d)
        if np.count_nonzero(sel) < 8:
            raise ResolutionError(f"level 2^-{l} holds fewer than 8 grid points")
        out.append((d, t[sel], dist[sel]))
    return out


def _certify_exp_factor(value_fn, log_derivs_fn, carrier, orders_m, grid_log2, levels, factor):
    orders_m = sorted(set(int(m) for m in orders_m))
    m_top = max(orders_m) if orders_m else 0
    windows = _dyadic_level_points(carrier, grid_log2, levels)
    constants = {m: [] for m in orders_m}
    for _, tw, dw in windows:
        z = np.exp(1j * tw)
        value = value_fn(z)
        derivs = log_derivs_fn(z, m_top) if m_top else []
        gm = exp_t_derivatives(z, value, derivs, m_top)
        for m in orders_m:
            constants[m].append(float(np.max(np.abs(gm[m]) * dw ** (2 * m))))
    return DerivativeBoundReport(
        orders=tuple(orders_m),
        levels=tuple(w[0] for w in windows),
        constants=constants,
        stability_factor=factor,
    )


def certify_W_derivatives(
    W: OuterFunction,
    E: BeurlingCarlesonSet,
    orders_m=(0, 1),
    levels: int = 4,
    stability_factor: float = 4.0,
) -> DerivativeBoundReport:
    """Check |d^m W(e^{it})/dt^m| <= C_m dist(e^{it}, E)^{-2m} off the carrier.

    C_m is fitted per dyadic level as the max of |d^m W| * dist^{2m}; the
    report flags whether consecutive-level ratios stay within the factor.
    """
    return _certify_exp_factor(
        lambda z: herglotz_exp(W.log_modulus, z),
        W.log_z_derivs,
        E,
        orders_m,
        W.grid_log2,
        levels,
        stability_factor,
    )


def certify_theta_derivatives(
    theta: InnerFunction,
    carrier: BeurlingCarlesonSet,
    orders_m=(0, 1),
    grid_log2: int = 14,
    levels: int = 4,
    stability_factor: float = 4.0,
) -> DerivativeBoundReport:
    """Same protocol as :func:`certify_W_derivatives`, with the singular
    support inside the carrier set."""
    for atom in theta.singular.atoms:
        if dist_to_set(atom.angle, carrier) > 1e-12:
            raise ValueError("singular support must lie inside the carrier")
    return _certify_exp_factor(
        theta.eval,
        theta.log_z_derivs,
        carrier,
        orders_m,
        grid_log2,
        levels,
        stability_factor,
    )


# ---------------------------------------------------------------------------
# external interfaces
# ---------------------------------------------------------------------------

def measure_from_json(source) -> SingularMeasure:
    """Read ``{"atoms": [{"angle":.., "mass":.., "part":"C"|"K"}, ...]}``."""
    obj = _load_json(source)
    atoms = tuple(
        Atom(float(a["angle"]), float(a["mass"]), str(a.get("part", "C")))
        for a in obj["atoms"]
    )
    return SingularMeasure(atoms)


def blaschke_from_json(source) -> tuple[complex, ...]:
    """Read ``[{"re":.., "im":..}, ...]``."""
    obj = _load_json(source)
    return tuple(complex(float(z["re"]), float(z["im"])) for z in obj)


def factors_from_json(source, grid_log2: int):
    """Read the combined factor description

        {"weight": {"gaps_ref": <path or inline gaps>, "values": <const>},
         "measure": {"atoms": [...]}, "blaschke": [{"re":..,"im":..}, ...]}

    and return (BoundaryWeight, InnerFunction).
    """
    from .circle_sets import gaps_from_json, validate_set

    obj = _load_json(source)
    wdesc = obj["weight"]
    E = validate_set(gaps_from_json(wdesc["gaps_ref"]))
    weight = boundary_weight(E, wdesc.get("values", 1.0), grid_log2)
    nu = measure_from_json(obj["measure"]) if "measure" in obj else SingularMeasure(())
    zeros = blaschke_from_json(obj.get("blaschke", []))
    return weight, InnerFunction(zeros, nu)


def _load_json(source):
    if isinstance(source, (str, Path)) and Path(str(source)).exists():
        return json.loads(Path(source).read_text())
    if isinstance(source, str):
        return json.loads(source)
    return source
