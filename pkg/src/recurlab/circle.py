"""Certified geometry of unimodular orbits ``lambda^n = e^{2 pi i n theta}``.

For exact rational angles everything reduces to residue arithmetic: the
distance ``|lambda^n - 1|`` is the chord ``2 |sin(pi n theta)|``, it
depends only on the fractional part of ``n theta``, and it is monotone in
the distance of that fractional part to the nearest integer.  Sups and
infs over finite index sets are therefore *selected* by exact Fraction
comparison and only the extremal residue is evaluated in interval
arithmetic.  Approximate angles (a rational enclosure window) are carried
through with outward-rounded windows instead.

Three separation questions recur downstream and get their own reports:

* how far apart two orbits can drift over a finite horizon
  (:func:`d_metric_finite`; with ``n_0 = 1`` in the sequence this
  finite-horizon quantity is a genuine metric restriction);
* whether some ``lambda != 1`` stays ``epsilon``-close to 1 along the
  whole horizon (:func:`jamison_separation_test`);
* whether some ``lambda`` stays *far* from 1 along the whole horizon
  (:func:`witness_nested_intervals` / :func:`verify_witness`).

Divisibility sequences admit an exact tail: perturbing an angle by
``1/n_m`` moves ``lambda^{n_k}`` not at all for ``k >= m``, so the sup of
the move over *all* k is attained on ``k < m`` and the certificate is
exact rather than finite-horizon (:func:`perturb_divisibility`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .certificates import Certificate, frac_str
from .precision import (Bound, bound_max, chord, pi_bound, residue_distance)
from .ratintervals import IntervalSet, remove_ball_mod1
from .seqcore import IntegerSequence


class AngleTurns:
    """Angle in turns: exact Fraction in [0, 1) or a rational window."""

    __slots__ = ("exact", "window")

    def __init__(self, exact: Fraction | None = None, window: Bound | None = None):
        if (exact is None) == (window is None):
            raise ValueError("give exactly one of exact, window")
        self.exact = Fraction(exact) % 1 if exact is not None else None
        self.window = window

    @staticmethod
    def of(x) -> "AngleTurns":
        if isinstance(x, AngleTurns):
            return x
        return AngleTurns(exact=Fraction(x))

    @staticmethod
    def approx(value, radius) -> "AngleTurns":
        v, r = Fraction(value), Fraction(radius)
        if r < 0:
            raise ValueError("negative radius")
        return AngleTurns(window=Bound(v - r, v + r))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def minus(self, other: "AngleTurns") -> "AngleTurns":
        other = AngleTurns.of(other)
        if self.is_exact and other.is_exact:
            return AngleTurns(exact=self.exact - other.exact)
        a = Bound.exact(self.exact) if self.is_exact else self.window
        b = Bound.exact(other.exact) if other.is_exact else other.window
        return AngleTurns(window=a - b)

    def plus_fraction(self, fr: Fraction) -> "AngleTurns":
        if self.is_exact:
            return AngleTurns(exact=self.exact + fr)
        return AngleTurns(window=self.window + Bound.exact(fr))

    def __repr__(self) -> str:
        if self.is_exact:
            return f"AngleTurns({self.exact})"
        return f"AngleTurns(~{self.window})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, AngleTurns):
            return NotImplemented
        return self.exact == other.exact and self.window == other.window


def _residue(theta: Fraction, n: int) -> Fraction:
    p, q = theta.numerator, theta.denominator
    return Fraction((n * p) % q, q)


def _dist_range_of_window(win: Bound, n: int) -> tuple[Fraction, Fraction]:
    """Range of distance-to-Z of n*t over the window, as [min, max]."""
    half = Fraction(1, 2)
    scaled = win.scale(n)
    if scaled.width >= 1:
        return Fraction(0), half
    base = scaled.lo.__floor__()
    a, b = scaled.lo - base, scaled.hi - base     # 0 <= a <= b < 2
    hits_int = (a == 0) or (a <= 1 <= b)
    dmin = Fraction(0) if hits_int else min(residue_distance(a), residue_distance(b))
    hits_half = (a <= half <= b) or (a <= half + 1 <= b)
    dmax = half if hits_half else max(residue_distance(a), residue_distance(b))
    return dmin, dmax


def unimod_dist(theta, n: int) -> Bound:
    """Certified ``|e^{2 pi i n theta} - 1|``."""
    theta = AngleTurns.of(theta)
    if n < 0:
        n = -n   # conjugation does not change the chord
    if theta.is_exact:
        return chord(_residue(theta.exact, n))
    dmin, dmax = _dist_range_of_window(theta.window, n)
    return Bound(chord(dmin).lo, chord(dmax).hi)


def _sup_chord_exact(theta: Fraction, terms: list[int]) -> tuple[Bound, Fraction]:
    """Sup of chords over exact residues: selected exactly, evaluated once."""
    dmax = max(residue_distance(_residue(theta, n)) for n in terms)
    return chord(dmax), dmax


def _min_chord_exact(theta: Fraction, terms: list[int]) -> tuple[Bound, Fraction]:
    dmin = min(residue_distance(_residue(theta, n)) for n in terms)
    return chord(dmin), dmin


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class DistanceCertificate:
    """Certified sup_k |lambda^{n_k} - mu^{n_k}| over a horizon."""

    seq_label: str
    horizon: int
    bound: Bound
    tail_exact: bool
    theta1: AngleTurns
    theta2: AngleTurns

    def to_certificate(self) -> Certificate:
        return Certificate(
            kind="orbit-distance",
            claim=(f"sup of |lambda^n - mu^n| over {self.seq_label}"
                   f"{' (exact tail)' if self.tail_exact else f', k <= {self.horizon}'}"),
            passed=True, exact=self.bound.is_exact,
            method="exact residue selection + certified chord",
            horizon=self.horizon,
            params={"theta1": repr(self.theta1), "theta2": repr(self.theta2)},
            bounds={"sup": self.bound},
            values={"tail_exact": self.tail_exact},
        )


def d_metric_finite(theta1, theta2, seq: IntegerSequence, K: int) -> DistanceCertificate:
    """Finite-horizon orbit distance; equals chord of the angle difference.

    ``|lambda^n - mu^n| = |e^{2 pi i n (t1 - t2)} - 1|`` since both points
    are unimodular, so only the difference angle matters.
    """
    t1, t2 = AngleTurns.of(theta1), AngleTurns.of(theta2)
    diff = t1.minus(t2)
    terms = seq.prefix(K + 1)
    if diff.is_exact:
        bound, _ = _sup_chord_exact(diff.exact, terms)
    else:
        bound = bound_max(unimod_dist(diff, n) for n in terms)
    return DistanceCertificate(seq_label=seq.label, horizon=K, bound=bound,
                               tail_exact=False, theta1=t1, theta2=t2)


@dataclass
class PerturbResult:
    theta: AngleTurns
    certificate: DistanceCertificate


def perturb_divisibility(theta, seq: IntegerSequence, m: int) -> PerturbResult:
    """Perturb an angle by ``1/n_m`` with an exact-tail move certificate.

    For a chained-divisibility sequence, ``n_k / n_m`` is an integer for
    every ``k >= m``, so the perturbation moves no orbit point beyond
    index ``m - 1`` and the sup over *all* k is exact.
    """
    if not seq.divisibility:
        raise ValueError("perturbation tail is exact only for divisibility sequences")
    if m < 1:
        raise ValueError("m must be >= 1")
    t = AngleTurns.of(theta)
    n_m = seq.term(m)
    moved = t.plus_fraction(Fraction(1, n_m))
    # sup_k |mu^{n_k} - lambda^{n_k}| = max_{k<m} chord(n_k / n_m), tail = 0
    bound, _ = _sup_chord_exact(Fraction(1, n_m), seq.prefix(m))
    cert = DistanceCertificate(seq_label=seq.label, horizon=m - 1, bound=bound,
                               tail_exact=True, theta1=moved, theta2=t)
    return PerturbResult(theta=moved, certificate=cert)


@dataclass
class WitnessCertificate:
    """Certified min_k |lambda^{n_k} - 1| >= delta over a horizon."""

    theta: AngleTurns
    seq_label: str
    horizon: int
    delta: Bound
    residues: list[Fraction] | None
    target: Fraction | None
    meets_target: bool | None

    def to_certificate(self) -> Certificate:
        values = {"residues": sorted({frac_str(r) for r in self.residues})
                  if self.residues is not None else None,
                  "meets_target": self.meets_target}
        return Certificate(
            kind="rotation-witness",
            claim=f"min of |lambda^{{n_k}} - 1| over {self.seq_label}, k <= {self.horizon}",
            passed=bool(self.meets_target) if self.target is not None else True,
            exact=self.delta.is_exact,
            method="exact residue selection + certified chord",
            horizon=self.horizon,
            params={"theta": repr(self.theta),
                    "target": frac_str(self.target) if self.target is not None else None},
            bounds={"delta": self.delta},
            values=values,
        )


def verify_witness(theta, seq: IntegerSequence, K: int,
                   target: Fraction | None = None) -> WitnessCertificate:
    """Term-by-term certification of a separation witness."""
    t = AngleTurns.of(theta)
    terms = seq.prefix(K + 1)
    if t.is_exact:
        delta, _ = _min_chord_exact(t.exact, terms)
        residues = [_residue(t.exact, n) for n in terms]
    else:
        delta = None
        residues = None
        for n in terms:
            b = unimod_dist(t, n)
            delta = b if delta is None else delta.min_with(b)
    meets = delta.certainly_ge(target) if target is not None else None
    return WitnessCertificate(theta=t, seq_label=seq.label, horizon=K, delta=delta,
                              residues=residues, target=Fraction(target) if target is not None else None,
                              meets_target=meets)


@dataclass
class WitnessSearch:
    found: bool
    certificate: WitnessCertificate | None
    requested_delta: Fraction
    trials: list[tuple[Fraction, Fraction]]   # (search delta, surviving measure)


def witness_nested_intervals(seq: IntegerSequence, K: int, delta_target,
                             max_removals: int = 200_000) -> WitnessSearch:
    """Search for lambda with all |lambda^{n_k} - 1| >= delta, k <= K.

    Greedy nested-interval engine: survivors of step k avoid a neighborhood
    of radius ``delta_s / (4 pi n_k)`` around every multiple of ``1/n_k``
    (the design radius ``delta_s/(2 pi n_k)`` with a 1/2 safety factor), so
    any survivor has ``dist(n_k theta, Z) >= delta_s/(4 pi)`` and chord at
    least ``2 sin(delta_s / 4)``.  The returned midpoint is re-verified
    term by term; the certificate's delta is the certified achieved value,
    never the design floor.  If the requested target fails, the search
    relaxes the design delta downward (halving ladder) and reports the
    best certified witness with ``found=False`` instead of guessing.
    """
    delta_target = Fraction(delta_target)
    if delta_target <= 0:
        raise ValueError("delta target must be positive")
    terms = seq.prefix(K + 1)
    if sum(terms) + len(terms) > max_removals:
        raise ValueError(
            f"nested-interval engine needs {sum(terms) + len(terms)} removals, "
            f"budget is {max_removals}; use a structural witness instead")
    # upper rational bound of 1/(4 pi): radius never undershoots the design
    inv4pi = Fraction(1) / (4 * pi_bound().lo)
    ladder = [Fraction(4), Fraction(3), Fraction(5, 2), Fraction(2),
              Fraction(3, 2), Fraction(1), Fraction(1, 2), Fraction(1, 4),
              Fraction(1, 8), Fraction(1, 16)]
    trials: list[tuple[Fraction, Fraction]] = []
    best: WitnessCertificate | None = None
    for factor in ladder:
        delta_s = delta_target * factor
        survivors = IntervalSet.single(Fraction(0), Fraction(1))
        for n in terms:
            radius = delta_s * inv4pi / n
            for j in range(n + 1):
                survivors = remove_ball_mod1(survivors, Fraction(j, n), radius)
                if not survivors:
                    break
            if not survivors:
                break
        trials.append((delta_s, survivors.measure()))
        if not survivors:
            continue
        a, b = survivors.largest_component()
        cert = verify_witness((a + b) / 2, seq, K, target=delta_target)
        if best is None or cert.delta.lo > best.delta.lo:
            best = cert
        if cert.meets_target:
            return WitnessSearch(found=True, certificate=cert,
                                 requested_delta=delta_target, trials=trials)
    return WitnessSearch(found=False, certificate=best,
                         requested_delta=delta_target, trials=trials)


# ---------------------------------------------------------------------------
# near-1 search (separation test)
# ---------------------------------------------------------------------------

@dataclass
class JamisonReport:
    """Outcome of the search for lambda != 1 with small horizon sup."""

    epsilon: Fraction
    horizon: int
    grid: int
    best_theta: Fraction | None
    sup: Bound | None
    witness_found: bool
    method: str
    candidates_checked: int

    def to_certificate(self) -> Certificate:
        return Certificate(
            kind="jamison-separation",
            claim=(f"exists lambda != 1 with sup_k<={self.horizon} "
                   f"|lambda^{{n_k}} - 1| < {self.epsilon}"),
            passed=self.witness_found,
            exact=False,
            method=self.method,
            horizon=self.horizon,
            params={"epsilon": self.epsilon, "grid": self.grid,
                    "candidates_checked": self.candidates_checked},
            bounds={"sup": self.sup} if self.sup is not None else {},
            values={"best_theta": frac_str(self.best_theta)
                    if self.best_theta is not None else None},
        )


def _grid_scan(terms: list[int], grid: int) -> tuple[int, int]:
    """Best grid index by integer residue arithmetic; returns (i, max_dist)."""
    import numpy as np

    if terms[-1] * grid < 2 ** 62:
        n_arr = np.asarray(terms, dtype=np.int64)
        best_i, best_d = 0, grid
        chunk = max(1, (1 << 21) // max(len(terms), 1))
        for lo in range(1, grid, chunk):
            ii = np.arange(lo, min(lo + chunk, grid), dtype=np.int64)
            r = (ii[:, None] * n_arr[None, :]) % grid
            d = np.minimum(r, grid - r).max(axis=1)
            j = int(d.argmin())
            if int(d[j]) < best_d:
                best_d, best_i = int(d[j]), int(ii[j])
        return best_i, best_d
    best_i, best_d = 0, grid
    for i in range(1, grid):
        worst = max(min(r := (i * n) % grid, grid - r) for n in terms)
        if worst < best_d:
            best_d, best_i = worst, i
    return best_i, best_d


def _refine_float(theta0: float, terms: list[int], halfwidth: float,
                  steps: int = 48) -> float:
    """Golden-section polish of the float sup objective near theta0."""
    import math

    def f(t: float) -> float:
        return max(2 * abs(math.sin(math.pi * ((n * t) % 1.0))) for n in terms)

    inv_phi = (5 ** 0.5 - 1) / 2
    a, b = theta0 - halfwidth, theta0 + halfwidth
    c, d = b - inv_phi * (b - a), a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(steps):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2


def jamison_separation_test(seq: IntegerSequence, epsilon, K: int,
                            grid: int = 0) -> JamisonReport:
    """Search for ``lambda != 1`` with certified horizon sup below epsilon.

    ``grid > 0`` scans the uniform angles ``i/grid`` (rejected if coarser
    than ``1/n_K``: the objective oscillates at frequency ``n_K`` and a
    coarser comb aliases past its minima), then polishes the best cell by
    golden section and certifies a bounded-denominator snap of the result.
    ``grid = 0`` searches the structural candidates ``1/n_m`` of a
    divisibility sequence, whose evaluation is exact at any magnitude.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    terms = seq.prefix(K + 1)
    candidates: list[Fraction] = []
    if grid:
        if grid < terms[-1]:
            raise ValueError(
                f"grid {grid} is coarser than 1/n_K = 1/{terms[-1]}; "
                "a uniform scan would alias past the objective's minima")
        best_i, _ = _grid_scan(terms, grid)
        if best_i:
            base = Fraction(best_i, grid)
            candidates.append(base)
            polished = _refine_float(float(base), terms, 1.0 / grid)
            snapped = Fraction(polished).limit_denominator(grid * (1 << 12))
            if snapped not in (0, 1) and snapped != base:
                candidates.append(snapped)
        method = f"uniform grid of {grid} + golden-section polish"
    else:
        if not seq.divisibility:
            raise ValueError("structural candidate search (grid=0) needs a "
                             "divisibility sequence")
        for m in range(1, K + 2):
            try:
                candidates.append(Fraction(1, seq.term(m)))
            except IndexError:
                break   # finite ratio list exhausted; keep what we have
        method = "structural candidates 1/n_m (exact residues)"
    best_theta, best_sup = None, None
    for theta in candidates:
        sup, _ = _sup_chord_exact(theta, terms)
        if best_sup is None or sup.hi < best_sup.hi:
            best_theta, best_sup = theta, sup
    found = best_sup is not None and best_sup.certainly_lt(epsilon)
    return JamisonReport(epsilon=epsilon, horizon=K, grid=grid,
                         best_theta=best_theta, sup=best_sup,
                         witness_found=found, method=method,
                         candidates_checked=len(candidates))
