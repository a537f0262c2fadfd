"""Discrete measures on the circle and their certified Fourier analysis.

A measure here is a finite list of rational atoms with positive rational
weights summing to exactly 1.  The Fourier convention is fixed once:

    sigma_hat(n) = integral of lambda^n d sigma = sum_i w_i e^{2 pi i n theta_i}.

Everything downstream only ever uses |sigma_hat(n) - 1|, which is
invariant under conjugating the convention.

Products of few-atom factors are the main construction: the rigid
measures built here are finite stages of an infinite convolution whose
j-th factor moves mass ``t_j`` to the atom ``1/n_{j+1}``.  On a chained
divisibility sequence every factor below the current stage evaluates to
exactly 1 at frequency ``n_k``, and the factors above it are summable in
a geometric chain, which is what the build certificate records.

The Gaussian model at the end realizes a discrete-spectrum stationary
process: ``f = sum_i sqrt(w_i) c_i g_i`` with iid standard complex
Gaussians ``g_i`` has ``E f(T^n x) conj(f(x)) = sum_i w_i lambda_i^n |c_i|^2``,
so rectangle overlap probabilities under time shift are Monte-Carlo
estimable with exact covariance structure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np

from .certificates import Certificate, frac_str
from .precision import (Bound, CBound, bound_sum, cbound_prod, chord, get_bits,
                        pi_bound, set_bits)
from .seqcore import IntegerSequence


class DiscreteMeasure:
    """Probability measure with finitely many exact rational atoms."""

    __slots__ = ("atoms",)

    def __init__(self, pairs):
        merged: dict[Fraction, Fraction] = {}
        for angle, weight in pairs:
            a, w = Fraction(angle) % 1, Fraction(weight)
            if w < 0:
                raise ValueError("negative weight")
            if w:
                merged[a] = merged.get(a, Fraction(0)) + w
        if sum(merged.values()) != 1:
            raise ValueError("weights must sum to exactly 1")
        self.atoms: list[tuple[Fraction, Fraction]] = sorted(merged.items())

    @staticmethod
    def delta(angle) -> "DiscreteMeasure":
        return DiscreteMeasure([(angle, Fraction(1))])

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiscreteMeasure) and self.atoms == other.atoms

    def __repr__(self) -> str:
        inner = ", ".join(f"{w}@{a}" for a, w in self.atoms[:3])
        more = ", ..." if len(self.atoms) > 3 else ""
        return f"DiscreteMeasure({inner}{more})"

    def convolve(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure([(a1 + a2, w1 * w2)
                                for a1, w1 in self.atoms
                                for a2, w2 in other.atoms])

    def max_weight(self) -> Fraction:
        return max(w for _, w in self.atoms)

    def atom_energy(self) -> Fraction:
        """sum of squared weights; the Wiener limit of the energy average."""
        return sum((w * w for _, w in self.atoms), Fraction(0))

    def denominator_lcm(self) -> int:
        return lcm(*(a.denominator for a, _ in self.atoms))


def convolve(mu: DiscreteMeasure, nu: DiscreteMeasure) -> DiscreteMeasure:
    return mu.convolve(nu)


def fourier_direct(measure: DiscreteMeasure, n: int) -> CBound:
    """sigma_hat(n) by atom enumeration; exact residue reduction per atom."""
    total = CBound.exact(0)
    for angle, weight in measure.atoms:
        r = Fraction((n * angle.numerator) % angle.denominator, angle.denominator)
        total = total + CBound.from_turns(r).scale(weight)
    return total


class ConvolutionFactorization:
    """Convolution of few-atom factors; Fourier always via the product rule."""

    def __init__(self, factors):
        self.factors: list[DiscreteMeasure] = list(factors)
        if not self.factors:
            raise ValueError("need at least one factor")
        self._periods = [f.denominator_lcm() for f in self.factors]
        self._cache: dict[tuple[int, int], CBound] = {}

    def factor_fourier(self, j: int, n: int) -> CBound:
        key = (j, n % self._periods[j])
        hit = self._cache.get(key)
        if hit is None:
            hit = self._cache[key] = fourier_direct(self.factors[j], n % self._periods[j])
        return hit

    def fourier(self, n: int) -> CBound:
        return cbound_prod(self.factor_fourier(j, n) for j in range(len(self.factors)))

    def materialize(self, max_atoms: int = 1 << 16) -> DiscreteMeasure:
        count = 1
        for f in self.factors:
            count *= len(f)
        if count > max_atoms:
            raise ValueError(f"materialization would enumerate up to {count} atoms")
        out = self.factors[0]
        for f in self.factors[1:]:
            out = out.convolve(f)
        return out


# ---------------------------------------------------------------------------
# rigid measures on divisibility sequences
# ---------------------------------------------------------------------------

def _looks_summable(a: list[Fraction]) -> bool:
    """Tail comparison against the harmonic series: flags (j+1) a_j
    strictly decreasing over the tail, which spares 1/(j+1) itself."""
    if len(a) < 4:
        return False
    tail = range(max(0, len(a) - 1 - max(3, (len(a) - 1) // 2)), len(a) - 1)
    return all((j + 2) * a[j + 1] < (j + 1) * a[j] for j in tail)


class KahaneFactorization(ConvolutionFactorization):
    """Finite stage of the rigid-measure convolution, with its build certificate."""

    def __init__(self, factors, seq: IntegerSequence, targets: list[Fraction],
                 t: list[Fraction], inv4pi: Fraction, certificate: Certificate):
        super().__init__(factors)
        self.seq = seq
        self.targets = targets
        self.t = t
        self.inv4pi = inv4pi
        self.certificate = certificate

    def chain_term(self, j: int, k: int) -> tuple[Bound, Bound]:
        """Certified (|factor_j(n_k) - 1|, arc bound 2 pi t_j n_k / n_{j+1}).

        The factor frequency ratio can be tiny (n_{j+1} astronomically
        large), where the chord and the arc agree to relative order d^2;
        working precision is raised past that margin so the comparison
        certifies instead of drowning in enclosure width.
        """
        n_k, n_next = self.seq.term(k), self.seq.term(j + 1)
        ratio = Fraction(n_k, n_next)
        old = get_bits()
        try:
            set_bits(max(old, 2 * n_next.bit_length() + 96))
            lhs = self.factor_fourier_fresh(j, n_k).dist_to_one()
            rhs = pi_bound().scale(2 * self.t[j] * ratio)
        finally:
            set_bits(old)
        return lhs, rhs

    def factor_fourier_fresh(self, j: int, n: int) -> CBound:
        # bypasses the cache: chain_term changes working precision
        return fourier_direct(self.factors[j], n % self._periods[j])


def kahane_build(seq: IntegerSequence, a, N: int) -> KahaneFactorization:
    """Build the N-stage rigid measure nu_0 * ... * nu_{N-1}.

    Factor j is ``(1 - t_j) delta_0 + t_j delta_{1/n_{j+1}}`` with
    ``t_j = min(1/2, a_j / (4 pi))``; the division by ``4 pi`` is taken
    through a certified rational lower bound so weights stay exact while
    the arc chain is only strengthened.  The certificate records, all by
    exact rational arithmetic:

    * factors below stage k see an integer frequency and equal 1 exactly;
    * the arc chain ``sum_{j >= k} 2 pi t_j n_k / n_{j+1} <= a_k`` for
      every ``k < N`` (uses consecutive ratios >= 2);
    * the continuity proxy: the largest atom mass is the product of the
      ``1 - t_j``.
    """
    if not seq.divisibility:
        raise ValueError("rigid construction needs a chained divisibility sequence")
    if N < 1:
        raise ValueError("need at least one stage")
    targets = [Fraction(x) for x in (a(j) for j in range(N))] if callable(a) \
        else [Fraction(x) for x in a]
    if len(targets) < N:
        raise ValueError(f"need {N} targets, got {len(targets)}")
    if any(not (0 < targets[j] <= 1) for j in range(N)):
        raise ValueError("targets must lie in (0, 1]")
    if any(targets[j + 1] > targets[j] for j in range(N - 1)):
        raise ValueError("targets must be nonincreasing")
    terms = seq.prefix(N + 1)
    # divisibility + strict monotonicity force every ratio >= 2, which is
    # exactly what the geometric arc chain below needs
    if _looks_summable(targets[:N]):
        warnings.warn("rigidity targets decay geometrically; their sum looks "
                      "finite, so the limiting measure may fail continuity",
                      RuntimeWarning, stacklevel=2)

    inv4pi = Fraction(1) / (4 * pi_bound().hi)        # rational lower bound
    two_pi_hi = 2 * pi_bound().hi                     # rational upper bound
    t = [min(Fraction(1, 2), targets[j] * inv4pi) for j in range(N)]
    factors = [DiscreteMeasure([(Fraction(0), 1 - t[j]),
                                (Fraction(1, terms[j + 1]), t[j])])
               for j in range(N)]

    chains: dict[str, str] = {}
    ok = True
    for k in range(N):
        exact_below = all(terms[k] % terms[j + 1] == 0 for j in range(k))
        arc = sum((two_pi_hi * t[j] * Fraction(terms[k], terms[j + 1])
                   for j in range(k, N)), Fraction(0))
        ok = ok and exact_below and arc <= targets[k]
        chains[f"k={k}"] = frac_str(arc)
    max_mass = math.prod(1 - tj for tj in t)
    cert = Certificate(
        kind="rigid-measure-build",
        claim=f"stage-{N} factors satisfy |sigma_hat(n_k) - 1| <= a_k for k < {N}",
        passed=ok, exact=True,
        method="exact residues below stage + rational arc chain above "
               "(chord <= arc, unit-disk product triangle inequality)",
        horizon=N,
        params={"seq": seq.label, "targets": [frac_str(x) for x in targets[:N]],
                "t": [frac_str(x) for x in t]},
        values={"arc_chain": chains, "max_atom_mass": frac_str(max_mass)},
    )
    return KahaneFactorization(factors, seq, targets, t, inv4pi, cert)


def rigidity_check(factored: ConvolutionFactorization, seq: IntegerSequence,
                   a, K: int) -> Certificate:
    """Certify |sigma_hat(n_k) - 1| <= a_k for all k <= K."""
    targets = [Fraction(x) for x in (a(k) for k in range(K + 1))] if callable(a) \
        else [Fraction(x) for x in a]
    if len(targets) < K + 1:
        raise ValueError(f"need {K + 1} targets, got {len(targets)}")
    deviations = []
    first_violation = None
    min_slack = None
    for k in range(K + 1):
        d = factored.fourier(seq.term(k)).dist_to_one()
        deviations.append(d)
        slack = targets[k] - d.hi
        if min_slack is None or slack < min_slack[0]:
            min_slack = (slack, k)
        if slack < 0 and first_violation is None:
            first_violation = k
    values = {"min_slack": frac_str(min_slack[0]), "tightest_k": min_slack[1],
              "max_deviation": max(deviations, key=lambda b: b.hi)}
    if first_violation is not None:
        values["first_violation"] = first_violation
    return Certificate(
        kind="rigidity-check",
        claim=f"|sigma_hat(n_k) - 1| <= a_k for k <= {K} on {seq.label}",
        passed=first_violation is None,
        exact=all(d.is_exact for d in deviations),
        method="certified product-formula Fourier evaluation",
        horizon=K,
        params={"targets": [frac_str(x) for x in targets[:K + 1]]},
        bounds={f"dev_k{k}": d for k, d in enumerate(deviations)},
        values=values,
    )


# ---------------------------------------------------------------------------
# energy and drift diagnostics
# ---------------------------------------------------------------------------

def wiener_energy(measure: DiscreteMeasure, N: int) -> tuple[Bound, Fraction]:
    """Cesaro energy average ((1/N) sum_{n=1..N} |sigma_hat(n)|^2, sum w_i^2).

    When every atom denominator divides N the average collapses exactly:
    each cross pair (i, j) contributes a full set of q-th roots of unity,
    which sums to zero, leaving the diagonal sum of squared weights.
    Otherwise the average is accumulated term by term with certified
    arithmetic (cost O(N * atoms)).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    energy = measure.atom_energy()
    if N % measure.denominator_lcm() == 0:
        return Bound.exact(energy), energy
    avg = bound_sum(fourier_direct(measure, n).abs2() for n in range(1, N + 1))
    return avg.scale(Fraction(1, N)), energy


@dataclass
class DriftReport:
    """Chain diagnostic linking rigidity targets to base-frequency drift."""

    k: int
    q_k: int
    q_next: int
    premise_bounds: tuple[Bound, Bound]
    premise_holds: bool
    drift: Bound          # L = integral of |lambda - 1| d sigma
    ceiling: Bound        # R = 2 sqrt(2) (q_{k+1}^{-2} + q_k^{-1})
    conclusion_certified: bool
    consistent: bool

    def to_certificate(self) -> Certificate:
        return Certificate(
            kind="recursive-q-drift",
            claim=f"premise at (k, k+1) forces drift <= ceiling at k={self.k}",
            passed=self.consistent, exact=False,
            method="certified atom sums + chord chain",
            params={"k": self.k, "q_k": self.q_k, "q_next": self.q_next,
                    "premise_holds": self.premise_holds},
            bounds={"drift": self.drift, "ceiling": self.ceiling,
                    "premise_k": self.premise_bounds[0],
                    "premise_next": self.premise_bounds[1]},
            values={"conclusion_certified": self.conclusion_certified},
        )


def example44_diagnostic(measure: DiscreteMeasure, seq: IntegerSequence,
                         k: int) -> DriftReport:
    """Check the drift chain on a ``n_{k+1} = q_k n_k + 1`` sequence.

    If the measure is rigid enough at stages k and k+1 (deviation at most
    ``q_j^{-4}``), then the mean distance of the base frequency from 1,
    ``L = integral |lambda - 1| d sigma``, must stay under
    ``2 sqrt(2) (q_{k+1}^{-2} + q_k^{-1})``: the +1 offset in the
    recursion transfers stage rigidity down to frequency one.  The report
    never asserts the conclusion when the premise fails.
    """
    n = [seq.term(k), seq.term(k + 1), seq.term(k + 2)]
    qs = []
    for lo, hi in ((n[0], n[1]), (n[1], n[2])):
        if (hi - 1) % lo:
            raise ValueError("sequence does not satisfy n_{k+1} = q_k n_k + 1")
        qs.append((hi - 1) // lo)
    q_k, q_next = qs
    dev_k = fourier_direct(measure, n[0]).dist_to_one()
    dev_next = fourier_direct(measure, n[1]).dist_to_one()
    premise = (dev_k.hi <= Fraction(1, q_k ** 4)
               and dev_next.hi <= Fraction(1, q_next ** 4))
    drift = bound_sum(chord(angle).scale(w) for angle, w in measure.atoms)
    ceiling = Bound.exact(8).sqrt().scale(
        Fraction(1, q_next ** 2) + Fraction(1, q_k))
    concluded = drift.hi <= ceiling.lo
    return DriftReport(k=k, q_k=q_k, q_next=q_next,
                       premise_bounds=(dev_k, dev_next), premise_holds=premise,
                       drift=drift, ceiling=ceiling,
                       conclusion_certified=concluded,
                       consistent=(not premise) or concluded)


# ---------------------------------------------------------------------------
# Gaussian rectangle overlap
# ---------------------------------------------------------------------------

@dataclass
class GaussianRectangleModel:
    measure: DiscreteMeasure
    rectangle: tuple[float, float, float, float]
    seed: int = 0
    coeffs: list[complex] | None = None

    def __post_init__(self):
        a, b, c, d = self.rectangle
        if not (a < b and c < d):
            raise ValueError("rectangle is degenerate")
        if self.coeffs is not None and len(self.coeffs) != len(self.measure):
            raise ValueError("one coefficient per atom")


@dataclass
class GaussOverlapEstimate:
    n: int
    samples: int
    p_in: float
    p_in_se: float
    p_exit: float                 # P(f in R, f_n not in R)
    p_exit_se: float
    sym_diff: float
    sym_diff_se: float
    second_moment: float          # mean |f|^2
    second_moment_se: float
    second_moment_closed: float   # sum w |c|^2
    shift_moment: float           # mean |f_n - f|^2
    shift_moment_se: float
    shift_moment_closed: float    # sum w |lambda^n - 1|^2 |c|^2


def gauss_rectangle_overlap_mc(model: GaussianRectangleModel, n: int,
                               samples: int) -> GaussOverlapEstimate:
    """Estimate rectangle overlap under the time-n shift of the model field."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    atoms = model.measure.atoms
    coeffs = np.ones(len(atoms), dtype=np.complex128) if model.coeffs is None \
        else np.asarray(model.coeffs, dtype=np.complex128)
    weights = np.array([float(w) for _, w in atoms])
    if float(weights @ np.abs(coeffs) ** 2) == 0.0:
        raise ValueError("zero-variance model: all coefficients vanish")
    # exact residue reduction before float conversion: n can be astronomical
    residues = [Fraction((n * a.numerator) % a.denominator, a.denominator)
                for a, _ in atoms]
    lam_n = np.exp(2j * np.pi * np.array([float(r) for r in residues]))
    base = np.sqrt(weights) * coeffs
    shifted = base * lam_n

    a, b, c, d = (float(x) for x in model.rectangle)
    chunk = max(1024, (1 << 22) // max(len(atoms), 1))
    streams = np.random.SeedSequence(model.seed).spawn(-(-samples // chunk))
    n_in = n_exit = n_sym = 0
    s2 = s2_sq = sh = sh_sq = 0.0
    done = 0
    for ss in streams:
        m = min(chunk, samples - done)
        rng = np.random.default_rng(ss)
        g = (rng.standard_normal((m, len(atoms)))
             + 1j * rng.standard_normal((m, len(atoms)))) / np.sqrt(2.0)
        f = g @ base
        f_n = g @ shifted
        inside = (a < f.real) & (f.real < b) & (c < f.imag) & (f.imag < d)
        inside_n = (a < f_n.real) & (f_n.real < b) & (c < f_n.imag) & (f_n.imag < d)
        n_in += int(inside.sum())
        n_exit += int((inside & ~inside_n).sum())
        n_sym += int((inside ^ inside_n).sum())
        x = np.abs(f) ** 2
        y = np.abs(f_n - f) ** 2
        s2 += float(x.sum()); s2_sq += float((x * x).sum())
        sh += float(y.sum()); sh_sq += float((y * y).sum())
        done += m

    def prop(count: int) -> tuple[float, float]:
        p = count / samples
        return p, math.sqrt(p * (1 - p) / samples)

    def mean_se(total: float, total_sq: float) -> tuple[float, float]:
        mean = total / samples
        var = max(total_sq / samples - mean * mean, 0.0)
        return mean, math.sqrt(var / samples)

    p_in, p_in_se = prop(n_in)
    p_exit, p_exit_se = prop(n_exit)
    sym, sym_se = prop(n_sym)
    m2, m2_se = mean_se(s2, s2_sq)
    shm, shm_se = mean_se(sh, sh_sq)
    return GaussOverlapEstimate(
        n=n, samples=samples,
        p_in=p_in, p_in_se=p_in_se,
        p_exit=p_exit, p_exit_se=p_exit_se,
        sym_diff=sym, sym_diff_se=sym_se,
        second_moment=m2, second_moment_se=m2_se,
        second_moment_closed=float(weights @ np.abs(coeffs) ** 2),
        shift_moment=shm, shift_moment_se=shm_se,
        shift_moment_closed=float(weights @ (np.abs(lam_n - 1.0) ** 2
                                             * np.abs(coeffs) ** 2)),
    )
