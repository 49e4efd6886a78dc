"""The analytic cut-off function attached to a Beurling-Carleson set.

Given the Whitney system {B_j} of the complement, with midpoints b_j, radii
r_j = 1 + |B_j| and multipliers lambda_j, the function

    h(z) = - sum_j lambda_j b_j |B_j| log(1/|B_j|) / (r_j b_j - z)

has strictly negative real part on the closed disk (every pole r_j b_j lies
just outside the circle), so g = exp(h) maps the disk to itself.  The
boundary function G(t) = g(e^{it}) is smooth off the set and decays faster
than every power of the distance to the set; :func:`certify_decay` checks a
finite proxy of that decay (monotone dyadic ratios).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._expderiv import exp_t_derivatives
from .circle_sets import (
    ANGLE_SLACK,
    TWO_PI,
    BeurlingCarlesonSet,
    WhitneyArc,
    _tail_lambda,
    distances_to_set,
    whitney_decompose,
)
from .errors import ResolutionError

# Ranks appended beyond k_max when computing tail data; the per-rank mass
# decays geometrically so 60 extra ranks exhaust double precision.
_EXTENSION_RANKS = 60


@dataclass(frozen=True)
class CutoffFunction:
    """Truncated cut-off function together with its truncation certificate.

    ``tail_bound`` dominates the modulus change of h caused by all omitted
    Whitney ranks, uniformly on ``|z| <= tail_radius``.  (No finite bound
    exists on the closed disk itself: near the set the omitted terms pile
    up, which is exactly how g vanishes there.)
    """

    whitney: tuple[WhitneyArc, ...]
    poles: np.ndarray        # r_j * b_j
    weights: np.ndarray      # lambda_j * b_j * |B_j| * log(1/|B_j|)
    boundary_angles: tuple[float, ...]
    tail_bound: float
    tail_radius: float
    rule: str


def build_cutoff(
    E: BeurlingCarlesonSet,
    k_max: int = 16,
    rule: str = "tail-sum",
    tail_radius: float = 0.99,
) -> CutoffFunction:
    """Construct the truncated cut-off data for the set E.

    The multipliers use the tail-sum rule computed over the Whitney system
    extended well beyond ``k_max``, so enlarging ``k_max`` only appends terms
    and never changes the lambda of an arc already present.  The certified
    ``tail_bound`` is the mass of the omitted ranks divided by the distance
    from their poles to the disk of radius ``tail_radius``.
    """
    if not (0.0 < tail_radius < 1.0):
        raise ValueError("tail_radius must lie in (0, 1)")
    base = whitney_decompose(E, k_max)
    lengths = [w.length for w in base]
    # Hypothetical continuation beyond k_max: only lengths are needed for the
    # lambda rule and the tail mass, so no arc geometry is constructed.
    ext_lengths = []
    for gap in E.gaps:
        for k in range(k_max + 1, k_max + _EXTENSION_RANKS + 1):
            ext_lengths.extend([gap.length / (3.0 * 2.0**k)] * 2)
    all_lengths = np.array(lengths + ext_lengths)
    c = all_lengths * np.log(1.0 / all_lengths)
    if rule == "constant":
        lam = np.ones_like(c)
    elif rule == "tail-sum":
        order = np.argsort(-c, kind="stable")
        lam_sorted = _tail_lambda(c[order])
        lam = np.empty_like(lam_sorted)
        lam[order] = lam_sorted
    else:
        raise ValueError(f"unknown lambda rule {rule!r}")

    kept = [
        WhitneyArc(w.parent, w.rank, w.arc, w.length, w.midpoint, w.radius, float(l))
        for w, l in zip(base, lam[: len(base)])
    ]
    poles = np.array([w.pole for w in kept])
    weights = np.array([w.lam * w.midpoint * w.length * math.log(1.0 / w.length) for w in kept])

    lam_ext, c_ext = lam[len(base) :], c[len(base) :]
    radius_gap = all_lengths[len(base) :] + (1.0 - tail_radius)
    tail = float(np.sum(lam_ext * c_ext / radius_gap))

    return CutoffFunction(
        whitney=tuple(kept),
        poles=poles,
        weights=weights,
        boundary_angles=E.boundary_angles,
        tail_bound=tail,
        tail_radius=tail_radius,
        rule=rule,
    )


def eval_h(c: CutoffFunction, z) -> complex | np.ndarray:
    """The pole series h at points of the closed disk (vectorized)."""
    z = np.asarray(z, dtype=complex)
    flat = z.reshape(-1)
    out = np.zeros_like(flat)
    # Chunk the broadcast so big grids stay cache friendly.
    step = max(1, 2_000_000 // max(1, len(c.poles)))
    for i in range(0, len(flat), step):
        blk = flat[i : i + step]
        out[i : i + step] = -np.sum(c.weights / (c.poles - blk[:, None]), axis=1)
    out = out.reshape(z.shape)
    return out if out.shape else complex(out)


def eval_g(c: CutoffFunction, z) -> complex | np.ndarray:
    """g = exp(h); at the gap endpoints (where the full series diverges to
    -infinity) the continuous extension 0 is returned."""
    z = np.asarray(z, dtype=complex)
    vals = np.exp(eval_h(c, z))
    flat = np.atleast_1d(vals)
    zf = np.atleast_1d(z)
    on_circle = np.abs(np.abs(zf) - 1.0) < 1e-12
    if np.any(on_circle):
        ang = np.angle(zf)
        hit = np.zeros(zf.shape, dtype=bool)
        for b in c.boundary_angles:
            hit |= on_circle & (
                np.minimum(np.mod(ang - b, TWO_PI), TWO_PI - np.mod(ang - b, TWO_PI))
                <= ANGLE_SLACK
            )
        flat[hit] = 0.0
    flat = flat.reshape(vals.shape)
    return flat if flat.shape else complex(flat)


def boundary_samples(c: CutoffFunction, log2_size: int) -> np.ndarray:
    """g sampled on the uniform grid e^{i t_m}."""
    t = TWO_PI * np.arange(1 << log2_size) / (1 << log2_size)
    return eval_g(c, np.exp(1j * t))


def h_z_derivatives(c: CutoffFunction, z: np.ndarray, m_max: int) -> list[np.ndarray]:
    """h^(k)(z) = -sum_j w_j k! / (p_j - z)^(k+1) for k = 1..m_max."""
    z = np.asarray(z, dtype=complex)
    diff = c.poles - z[..., None]
    out = []
    fact = 1.0
    power = diff * diff
    for k in range(1, m_max + 1):
        fact *= k
        out.append(-fact * np.sum(c.weights / power, axis=-1))
        power = power * diff
    return out


def g_t_derivatives(c: CutoffFunction, angles: np.ndarray, m_max: int) -> list[np.ndarray]:
    """[G, G', ..., G^(m_max)] at boundary angles, via the Bell recurrence."""
    z = np.exp(1j * np.asarray(angles, dtype=float))
    value = np.exp(eval_h(c, z))
    derivs = h_z_derivatives(c, z, m_max) if m_max else []
    return exp_t_derivatives(z, value, derivs, m_max)


@dataclass(frozen=True)
class DecayReport:
    """Dyadic decay ratios rho(d) = max |G^(m)| / dist^N per level."""

    levels: tuple[float, ...]
    entries: dict
    grid_log2: int
    points_per_level: tuple[int, ...]

    def monotone(self, N: int, m: int) -> bool:
        return bool(self.entries[(N, m)]["monotone"])

    def rho(self, N: int, m: int) -> tuple[float, ...]:
        return tuple(self.entries[(N, m)]["rho"])

    def all_monotone(self) -> bool:
        return all(v["monotone"] for v in self.entries.values())

    def to_json(self) -> dict:
        return {
            "grid_log2": self.grid_log2,
            "levels": list(self.levels),
            "points_per_level": list(self.points_per_level),
            "checks": [
                {
                    "N": N,
                    "m": m,
                    "rho": [float(r) for r in v["rho"]],
                    "monotone": bool(v["monotone"]),
                }
                for (N, m), v in sorted(self.entries.items())
            ],
        }


def certify_decay(
    c: CutoffFunction,
    E: BeurlingCarlesonSet,
    orders_N,
    orders_m,
    grid_log2: int = 16,
    levels: int = 6,
) -> DecayReport:
    """Evaluate the dyadic decay ratios of G and its t-derivatives.

    Level l collects the grid points at distance in [2^-l, 2^(1-l)) from the
    set; rho is the maximum of |G^(m)| / dist^N over the level.  The deepest
    level is grid_log2 - 3 so each level window is at least 8 cells wide,
    and the certificate is the monotone decrease of rho over the reported
    levels.  Derivatives come from the closed-form pole sums, so the values
    are exact up to rounding even where g is extremely small.
    """
    orders_N = sorted(set(int(N) for N in orders_N))
    orders_m = sorted(set(int(m) for m in orders_m))
    if min(orders_N, default=0) < 0 or min(orders_m, default=0) < 0:
        raise ValueError("orders must be nonnegative")
    l_max = grid_log2 - 3
    l_min = l_max - levels + 1
    if l_min < 1:
        raise ResolutionError("grid too coarse for the requested number of levels")

    n = 1 << grid_log2
    t = TWO_PI * np.arange(n) / n
    dist = distances_to_set(t, E)

    m_top = max(orders_m)
    level_vals: list[tuple[float, np.ndarray, np.ndarray]] = []
    counts = []
    for l in range(l_min, l_max + 1):
        d = 2.0 ** (-l)
        sel = (dist >= d) & (dist < 2.0 * d)
        if np.count_nonzero(sel) < 8:
            raise ResolutionError(
                f"level 2^-{l}: fewer than 8 grid points at that distance"
            )
        derivs = g_t_derivatives(c, t[sel], m_top)
        level_vals.append((d, dist[sel], [np.abs(gm) for gm in derivs]))
        counts.append(int(np.count_nonzero(sel)))

    entries = {}
    for N in orders_N:
        for m in orders_m:
            rho = []
            for d, dsel, mags in level_vals:
                rho.append(float(np.max(mags[m] / dsel**N)))
            mono = all(rho[i + 1] <= rho[i] * (1.0 + 1e-12) for i in range(len(rho) - 1))
            entries[(N, m)] = {"rho": rho, "monotone": mono}

    return DecayReport(
        levels=tuple(2.0 ** (-l) for l in range(l_min, l_max + 1)),
        entries=entries,
        grid_log2=grid_log2,
        points_per_level=tuple(counts),
    )
