"""Exact homological algebra over the cyclic group ring Z_k[T]/(T^k - 1).

Critical manifolds of the cyclic compositions assemble into small filtered
chain complexes with group-ring coefficients: each sphere shell contributes a
lens-type block of 2n generators whose differentials alternate between
multiplication by T - 1 and by the norm element N = 1 + T + ... + T^{k-1},
consecutive blocks are connected by N, and the origin contributes one
isolated generator.  Everything here is exact integer arithmetic mod k
(mod 2 for the plain sentinel k = 1); ranks come from Gaussian elimination
over the prime field, never from floating point.

Homology is read in two modes.  "plain" forgets the module structure and
expands each ring entry into a k x k circulant over F_k; "equivariant"
computes homology of the coinvariant quotient, sending each ring generator to
a single field generator and each entry p(T) to p(1) mod k.  For the free
strata handled here the coinvariant complex computes equivariant homology,
which is why non-free shells (l a multiple of k) are refused rather than
silently included.

Barcodes sweep the action threshold a and record, per degree, the maximal
intervals of constant nonzero rank of the relative homology built from
generators with critical value > a.  Degrees are stored in the normalized
convention: the raw Morse index minus the composition bookkeeping shift
k*iota + n(k-1).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, NonFreeStratum, NonPrimeK,
                     ThresholdOnSpectrum)
from .sympl import shells


def is_prime(k):
    """Trial-division primality; ample for the desk-scale k in play."""
    if k < 2:
        return False
    if k < 4:
        return True
    if k % 2 == 0:
        return False
    d = 3
    while d * d <= k:
        if k % d == 0:
            return False
        d += 2
    return True


class GroupRing:
    """Z_k[T]/(T^k - 1) with exact coefficient arithmetic mod k.

    The sentinel k = 1 is the plain mode: length-1 coefficient vectors over
    F_2, under which T and N both become 1 and T - 1 becomes 0, so the same
    complex constructions specialize to ordinary F_2 chain complexes.
    """

    def __init__(self, k):
        if k != 1 and not is_prime(k):
            raise NonPrimeK("group ring needs k prime (or the sentinel 1), "
                            "got %r" % (k,))
        self.k = k
        self.mod = 2 if k == 1 else k

    def elem(self, coeffs):
        c = np.zeros(self.k, dtype=np.int64)
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=np.int64))
        for i, a in enumerate(coeffs):
            c[i % self.k] = (c[i % self.k] + a) % self.mod
        return c

    @property
    def zero(self):
        return self.elem([0])

    @property
    def one(self):
        return self.elem([1])

    @property
    def T(self):
        return self.elem([0, 1]) if self.k > 1 else self.elem([1])

    @property
    def T_minus_1(self):
        return self.sub(self.T, self.one)

    @property
    def N(self):
        return self.elem([1] * self.k)

    def add(self, a, b):
        return (a + b) % self.mod

    def sub(self, a, b):
        return (a - b) % self.mod

    def mul(self, a, b):
        conv = np.convolve(a, b)
        out = np.zeros(self.k, dtype=np.int64)
        for i, v in enumerate(conv):
            out[i % self.k] = (out[i % self.k] + v) % self.mod
        return out

    def is_zero(self, a):
        return not np.any(a % self.mod)

    def circulant(self, a):
        """k x k matrix of multiplication by a on the regular representation:
        C[i, j] = a[(i - j) mod k]."""
        a = self.elem(a)
        C = np.zeros((self.k, self.k), dtype=np.int64)
        for i in range(self.k):
            for j in range(self.k):
                C[i, j] = a[(i - j) % self.k]
        return C

    def aug(self, a):
        """Augmentation p(T) -> p(1) mod k: the coinvariant image."""
        return int(np.sum(a)) % self.mod


def rank_mod_p(M, p):
    """Rank of an integer matrix over F_p by exact Gaussian elimination."""
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        return 0
    A = M % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if A[i, c]:
                piv = i
                break
        if piv is None:
            continue
        A[[r, piv]] = A[[piv, r]]
        A[r] = (A[r] * pow(int(A[r, c]), -1, p)) % p
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        r += 1
        if r == rows:
            break
    return r


@dataclass
class Generator:
    """One group-ring generator of the complex."""
    degree: int
    value: float = 0.0
    label: str = ""


class GroupRingComplex:
    """Chain complex of free Z_k[T]/(T^k-1) modules, filtered by value.

    Differentials are stored as ring elements indexed by (target, source)
    generator positions; d(target.degree) = source.degree - 1 always.  All
    checks (d o d = 0, filtration compatibility) are exact.
    """

    def __init__(self, ring, generators):
        self.ring = ring
        self.generators = list(generators)
        self.diff = {}  # (target_index, source_index) -> ring elem
        self.meta = {}

    def add_diff(self, target, source, elem):
        gt, gs = self.generators[target], self.generators[source]
        if gt.degree != gs.degree - 1:
            raise DomainError("differential must drop degree by one")
        if gt.value > gs.value + 1e-12:
            raise DomainError("differential must not increase value")
        elem = self.ring.elem(elem)
        if not self.ring.is_zero(elem):
            self.diff[(target, source)] = elem

    def indices_of_degree(self, d, alive=None):
        return [i for i, g in enumerate(self.generators)
                if g.degree == d and (alive is None or alive[i])]

    def degrees(self):
        if not self.generators:
            return []
        lo = min(g.degree for g in self.generators)
        hi = max(g.degree for g in self.generators)
        return list(range(lo, hi + 1))

    def check_d2(self):
        """d o d = 0 in exact ring arithmetic; returns the violations."""
        bad = []
        by_source = {}
        for (t, s), e in self.diff.items():
            by_source.setdefault(s, []).append((t, e))
        for (mid, s), e1 in self.diff.items():
            for t, e2 in by_source.get(mid, []):
                acc = self.ring.mul(e2, e1)
                key = (t, s)
                bad.append((key, acc))
        totals = {}
        for key, acc in bad:
            totals[key] = self.ring.add(totals.get(key, self.ring.zero), acc)
        return [key for key, tot in totals.items()
                if not self.ring.is_zero(tot)]

    def check_filtration(self):
        """Differential entries must not increase the critical value."""
        return [(t, s) for (t, s), _ in self.diff.items()
                if self.generators[t].value > self.generators[s].value + 1e-12]

    def matrix(self, d, mode, alive=None):
        """Expanded F_p matrix of d_d : C_d -> C_{d-1} restricted to alive
        generators; block size k in plain mode, 1 in equivariant mode."""
        ring = self.ring
        rows = self.indices_of_degree(d - 1, alive)
        cols = self.indices_of_degree(d, alive)
        block = ring.k if mode == "plain" else 1
        M = np.zeros((block * len(rows), block * len(cols)), dtype=np.int64)
        pos_r = {g: i for i, g in enumerate(rows)}
        pos_c = {g: i for i, g in enumerate(cols)}
        for (t, s), e in self.diff.items():
            if t in pos_r and s in pos_c:
                i, j = pos_r[t], pos_c[s]
                if mode == "plain":
                    M[i * block:(i + 1) * block,
                      j * block:(j + 1) * block] = ring.circulant(e)
                else:
                    M[i, j] = ring.aug(e)
        return M

    def homology_ranks(self, mode, alive=None):
        """F_p-dimension of H_d of the (restricted) complex, per degree."""
        if mode not in ("plain", "equivariant"):
            raise DomainError("mode must be 'plain' or 'equivariant'")
        p = self.ring.mod
        block = self.ring.k if mode == "plain" else 1
        out = {}
        for d in self.degrees():
            dim = block * len(self.indices_of_degree(d, alive))
            if dim == 0:
                out[d] = 0
                continue
            r_in = rank_mod_p(self.matrix(d, mode, alive), p)
            r_out = rank_mod_p(self.matrix(d + 1, mode, alive), p)
            out[d] = dim - r_in - r_out
        return out

    def euler_characteristic(self, mode, alive=None):
        block = self.ring.k if mode == "plain" else 1
        return sum((-1) ** g.degree * block
                   for i, g in enumerate(self.generators)
                   if alive is None or alive[i])


# FilteredComplex is the same machine with critical values attached; the
# alias keeps call sites honest about which role the object plays.
FilteredComplex = GroupRingComplex


def circle_complex(k):
    """Morse complex of the k-maxima circle function:
    0 -> R --(T-1)--> R -> 0 in degrees 1, 0."""
    ring = GroupRing(k)
    cx = GroupRingComplex(ring, [Generator(0, 0.0, "min"),
                                 Generator(1, 0.0, "max")])
    cx.add_diff(0, 1, ring.T_minus_1)
    return cx


def lens_complex(n, k):
    """2n-term complex computing the sphere S^{2n-1} with its free cyclic
    action: generators in degrees 0..2n-1, differentials alternating T-1
    (odd -> even) and N (even -> odd).

    Plain homology is H(S^{2n-1}; F_k) (ranks 1, 0, ..., 0, 1); coinvariant
    homology is F_k in every degree (the lens space).
    """
    if n < 1:
        raise DomainError("lens_complex needs n >= 1")
    ring = GroupRing(k)
    gens = [Generator(d, 0.0, "e%d" % d) for d in range(2 * n)]
    cx = GroupRingComplex(ring, gens)
    for d in range(1, 2 * n):
        cx.add_diff(d - 1, d, ring.T_minus_1 if d % 2 == 1 else ring.N)
    return cx


def ball_complex(amb, rho, k, a_window=None):
    """Filtered Morse-Bott complex of the k-fold composition over a ball.

    One lens block per sphere shell l (2n generators in degrees
    2nl..2nl+2n-1, all at the shell value c_l), one isolated generator for
    the origin (value k*rho(0), degree 2n(L+1), no differentials), and a
    connecting differential N from each shell-l bottom generator to the
    shell-(l-1) top generator.  Degrees are already normalized (the raw
    Morse index carries the extra shift k*iota + n(k-1); see meta).

    a_window = (lo, hi) keeps only generators with lo < value < hi.  The
    default window runs from 0 up to the first non-free obstruction: the
    smallest of the l = 0 mod k shell values and the origin value (for the
    plain sentinel k = 1 everything is kept).  An explicit window that
    includes a non-free shell (l a multiple of k >= 3) raises NonFreeStratum,
    because the coinvariant computation is only valid on free strata.
    """
    if k != 1 and not is_prime(k):
        raise NonPrimeK("ball_complex needs k prime or the sentinel 1")
    ring = GroupRing(k)
    data = shells(amb, rho, k)
    shell_data = [s for s in data if s.kind == "sphereShell"]
    origin = [s for s in data if s.kind == "isolated"][0]
    n = amb.n

    if a_window is None:
        if k == 1:
            hi = math.inf
        else:
            nonfree = [s.value for s in shell_data if s.l % k == 0]
            hi = min(nonfree + [origin.value])
        lo = 0.0
    else:
        lo, hi = float(a_window[0]), float(a_window[1])
        if k >= 3:
            for s in shell_data:
                if s.l % k == 0 and lo < s.value < hi:
                    raise NonFreeStratum(
                        "window (%g, %g) crosses the non-free shell l = %d "
                        "at value %.6g" % (lo, hi, s.l, s.value))
    if not (lo >= 0.0):
        raise DomainError("ball_complex window must start at a >= 0")

    kept = [s for s in shell_data if lo < s.value < hi]
    gens = []
    block_of = {}
    for s in kept:
        block_of[s.l] = len(gens)
        for i in range(2 * n):
            gens.append(Generator(2 * n * s.l + i, s.value,
                                  "l%d-%d" % (s.l, i)))
    keep_origin = lo < origin.value < hi
    if keep_origin:
        origin_index = len(gens)
        gens.append(Generator(2 * n * (len(shell_data) + 1), origin.value,
                              "origin"))

    cx = GroupRingComplex(ring, gens)
    for s in kept:
        base = block_of[s.l]
        for i in range(1, 2 * n):
            cx.add_diff(base + i - 1, base + i,
                        ring.T_minus_1 if i % 2 == 1 else ring.N)
        if s.l - 1 in block_of:
            top_prev = block_of[s.l - 1] + 2 * n - 1
            cx.add_diff(top_prev, base, ring.N)

    cx.meta = {
        "kind": "ballComplex",
        "n": n,
        "k": k,
        "R": amb.R,
        "window": (lo, hi),
        "shells": [(s.l, s.value) for s in kept],
        "origin_value": origin.value if keep_origin else None,
        "degree_normalization":
            "stored degree = raw Morse index - (k*iota + n*(k-1))",
    }
    return cx


@dataclass
class Bar:
    """One barcode bar: rank `rank` on the half-open interval
    [birth, death) in the given degree."""
    degree: int
    birth: float
    death: float
    rank: int


class Barcode:
    """Per-degree interval decomposition of the relative-homology rank as a
    function of the action threshold a (right-continuous in a)."""

    def __init__(self, bars, field_order, meta=None):
        self.bars = sorted(bars, key=lambda b: (b.degree, b.birth))
        self.field = int(field_order)
        self.meta = meta or {}

    def __iter__(self):
        return iter(self.bars)

    def __len__(self):
        return len(self.bars)

    def degrees(self):
        return sorted({b.degree for b in self.bars})

    def rank_at(self, degree, a):
        return sum(b.rank for b in self.bars
                   if b.degree == degree and b.birth <= a < b.death)

    def endpoints(self, degree=None):
        pts = set()
        for b in self.bars:
            if degree is None or b.degree == degree:
                pts.add(b.birth)
                if math.isfinite(b.death):
                    pts.add(b.death)
        return sorted(pts)

    def to_json(self):
        obj = {
            "schema": "gfs/1",
            "field": self.field,
            "bars": [
                {"degree": b.degree, "birth": b.birth,
                 "death": None if math.isinf(b.death) else b.death,
                 "rank": b.rank}
                for b in self.bars
            ],
        }
        return json.dumps(obj, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text)
        if obj.get("schema") != "gfs/1":
            raise DomainError("unrecognized barcode schema %r"
                              % obj.get("schema"))
        bars = [Bar(int(b["degree"]), float(b["birth"]),
                    math.inf if b["death"] is None else float(b["death"]),
                    int(b["rank"]))
                for b in obj["bars"]]
        return cls(bars, obj["field"])

    def to_tsv(self):
        """Step-plot data (columns a, degree, rank): for every breakpoint of
        every degree, the right-continuous rank just after it."""
        lines = ["a\tdegree\trank"]
        for d in self.degrees():
            pts = self.endpoints(d)
            if not pts or pts[0] > 0.0:
                pts = [0.0] + pts
            for a in pts:
                lines.append("%.12g\t%d\t%d" % (a, d, self.rank_at(d, a)))
        return "\n".join(lines) + "\n"


def barcode(cx, mode):
    """Barcode of the filtered complex: sweep a over the generator values and
    record, per degree, maximal intervals of constant nonzero rank of
    H(generators with value > a)."""
    values = sorted({g.value for g in cx.generators})
    points = [0.0] + [v for v in values if v > 0.0]
    ranks = []
    for a in points:
        alive = [g.value > a for g in cx.generators]
        ranks.append(cx.homology_ranks(mode, alive))
    bars = []
    degrees = cx.degrees()
    for d in degrees:
        run_rank, run_start = 0, 0.0
        for a, r in zip(points, ranks):
            rd = r.get(d, 0)
            if rd != run_rank:
                if run_rank > 0:
                    bars.append(Bar(d, run_start, a, run_rank))
                run_rank, run_start = rd, a
        if run_rank > 0:
            bars.append(Bar(d, run_start, math.inf, run_rank))
    meta = dict(getattr(cx, "meta", {}))
    meta["mode"] = mode
    field_order = 2 if (mode == "plain" and cx.ring.k == 1) else cx.ring.mod
    return Barcode(bars, field_order, meta)


def limit_barcode(amb, k, mode, lmax=4):
    """Idealized steep-profile limit barcode for the ball of area pi R^2.

    As the profile steepens, every shell value c_l climbs to l*pi*R^2.  In
    the equivariant (coinvariant) reading the surviving groups sit in the
    shell degrees 2nl for 0 < l < k, each alive on (0, l*pi*R^2); in the
    plain reading the connecting norm maps collapse each pair of adjacent
    shells, leaving the degree-2nl group alive exactly on
    [(l-1)*pi*R^2, l*pi*R^2).
    """
    A = math.pi * amb.R * amb.R
    n = amb.n
    bars = []
    if mode == "equivariant":
        if k == 1 or not is_prime(k):
            raise NonPrimeK("equivariant limit barcode needs k an odd prime")
        for l in range(1, k):
            bars.append(Bar(2 * n * l, 0.0, l * A, 1))
        field_order = k
    elif mode == "plain":
        for l in range(1, lmax + 1):
            bars.append(Bar(2 * n * l, (l - 1) * A, l * A, 1))
        field_order = 2 if k == 1 else k
    else:
        raise DomainError("mode must be 'plain' or 'equivariant'")
    return Barcode(bars, field_order,
                   {"mode": mode, "k": k, "n": n, "R": amb.R, "limit": True})


def thom_shift(bc, q_index, k):
    """Stabilization by an index-q_index fibre quadratic form on each of the
    k factors: shifts every bar degree by k*q_index, nothing else."""
    bars = [Bar(b.degree + k * int(q_index), b.birth, b.death, b.rank)
            for b in bc.bars]
    meta = dict(bc.meta)
    meta["thom_shift"] = meta.get("thom_shift", 0) + k * int(q_index)
    return Barcode(bars, bc.field, meta)


def tensor_circle(bc):
    """Prequantization Kunneth: every bar is duplicated one degree up."""
    bars = []
    for b in bc.bars:
        bars.append(Bar(b.degree, b.birth, b.death, b.rank))
        bars.append(Bar(b.degree + 1, b.birth, b.death, b.rank))
    meta = dict(bc.meta)
    meta["tensor_circle"] = True
    return Barcode(bars, bc.field, meta)


def inclusion_map(bc_large, bc_small, degree, a):
    """Rank of the persistence map induced by including the small ball into
    the large one, read at threshold a in the given degree.

    The monotone-family mechanism matches bars by interval: the map is onto
    whatever survives on both sides, so its rank is the minimum of the two
    live ranks.  The threshold must avoid all bar endpoints (the rank
    function jumps there).
    """
    if not a > 0:
        raise DomainError("inclusion_map needs a threshold a > 0")
    for bc in (bc_large, bc_small):
        for e in bc.endpoints():
            if abs(a - e) < 1e-12:
                raise ThresholdOnSpectrum(
                    "threshold a = %.12g sits on a bar endpoint" % a)
    return min(bc_large.rank_at(degree, a), bc_small.rank_at(degree, a))
