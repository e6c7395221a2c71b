"""Algebraic data of multiplicity-free anyon models.

An :class:`AnyonModel` bundles a finite charge set with its fusion rules
(``N_ab^c`` restricted to 0/1), quantum dimensions, F-symbols and R-symbols,
plus derived quantities (duals, Frobenius-Schur phases, the Abelian
predicate).  Models are immutable after construction and safe to share
between threads or worker processes.

Built-in models
---------------
``fibonacci``
    Charges ``0, 1`` with ``1 x 1 = 0 + 1`` and ``d_1`` the golden ratio.
``ising``
    Charges ``0, 1/2, 1`` (vacuum, sigma, psi) with ``d_{1/2} = sqrt(2)``,
    in the variant whose Frobenius-Schur sign for ``1/2`` is ``+1``.
``su2_k``
    Charges ``0, 1/2, ..., k/2`` with level-truncated SU(2) fusion.  F-symbols
    come from the q-deformed 6j recoupling at ``q = exp(2*pi*i/(k+2))``; the
    Frobenius-Schur sign of the half-integer charges is ``-1``.

Gauge and chirality conventions are fixed per model: F-matrices are real in
the built-in gauge, and the stored ``R_c^{ab}`` is the phase picked up by a
counterclockwise exchange (the ``+1`` braid sign in
:mod:`anyonbraid.fusion_space`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FusionError, ModelError, UnknownChargeError

#: Default tolerance for consistency checks.
CONSISTENCY_TOL = 1e-10

#: Quantum dimensions within this distance of 1 count as Abelian.
ABELIAN_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Charge:
    """One topological charge of a model, identified by its stable index.

    The label is presentation-layer only; equality and ordering use the
    index so that charges can key dictionaries and sort deterministically.
    """

    index: int
    label: str = field(compare=False)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class ConsistencyReport:
    """Maximum residuals of the defining consistency equations of a model."""

    max_pentagon_residual: float
    max_hexagon_residual: float
    max_unitarity_residual: float
    qdim_residual: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "max_pentagon_residual": self.max_pentagon_residual,
            "max_hexagon_residual": self.max_hexagon_residual,
            "max_unitarity_residual": self.max_unitarity_residual,
            "qdim_residual": self.qdim_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


class AnyonModel:
    """Immutable container for the data of one multiplicity-free anyon model.

    Parameters
    ----------
    name : str
        Identifier used in reports and serialized schedules.
    labels : sequence of str
        Charge labels; the first entry must be the vacuum.
    fusion : (m, m, m) int array
        ``fusion[a, b, c] = N_ab^c`` with values 0 or 1.
    qdim : (m,) float array
        Quantum dimensions ``d_a``.
    f_symbols : (m, m, m, m, m, m) complex array
        ``f_symbols[a, b, c, d, e, f] = [F_d^{abc}]_{ef}``; entries at
        inadmissible index combinations must be zero.
    r_symbols : (m, m, m) complex array
        ``r_symbols[a, b, c] = R_c^{ab}``, a unit phase for admissible ``c``.
    params : dict, optional
        Construction parameters (e.g. ``{"k": 4}``).
    meta : dict, optional
        Free-form provenance notes (gauge, chirality, preferred charge).
    """

    def __init__(self, name, labels, fusion, qdim, f_symbols, r_symbols,
                 params=None, meta=None):
        self.name = str(name)
        self.labels = tuple(str(l) for l in labels)
        m = len(self.labels)
        self.num_charges = m
        self.N = np.ascontiguousarray(fusion, dtype=np.int8)
        self.qd = np.ascontiguousarray(qdim, dtype=float)
        self.F = np.ascontiguousarray(f_symbols, dtype=complex)
        self.R = np.ascontiguousarray(r_symbols, dtype=complex)
        self.params = dict(params or {})
        self.meta = dict(meta or {})
        for arr in (self.N, self.qd, self.F, self.R):
            arr.flags.writeable = False
        self._charges = tuple(Charge(i, lab) for i, lab in enumerate(self.labels))
        self._by_label = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._by_label) != m:
            raise ModelError(f"duplicate charge labels in model {self.name!r}")
        self._validate_tables()
        self._dual = self._find_duals()
        self._validate_duals()
        # Scratch caches for basis/operator construction (see fusion_space).
        # Entries are only ever added, never mutated, so concurrent readers
        # at worst recompute a value.
        self._cache: dict = {}

    # -- charge bookkeeping -------------------------------------------------

    @property
    def charges(self) -> tuple[Charge, ...]:
        return self._charges

    @property
    def vacuum(self) -> Charge:
        return self._charges[0]

    def charge(self, x) -> Charge:
        """Coerce a label, index or Charge to this model's canonical Charge."""
        if isinstance(x, Charge):
            if 0 <= x.index < self.num_charges and self.labels[x.index] == x.label:
                return self._charges[x.index]
            raise UnknownChargeError(f"charge {x} is not part of model {self.name!r}")
        if isinstance(x, (int, np.integer)):
            if 0 <= x < self.num_charges:
                return self._charges[int(x)]
            raise UnknownChargeError(f"charge index {x} out of range for model {self.name!r}")
        if isinstance(x, str):
            try:
                return self._charges[self._by_label[x]]
            except KeyError:
                raise UnknownChargeError(
                    f"charge label {x!r} not in model {self.name!r} "
                    f"(labels: {', '.join(self.labels)})") from None
        raise UnknownChargeError(f"cannot interpret {x!r} as a charge")

    def dual(self, a) -> Charge:
        return self._charges[self._dual[self.charge(a).index]]

    # -- fusion algebra -----------------------------------------------------

    def fuse(self, a, b) -> tuple[Charge, ...]:
        """All charges ``c`` with ``N_ab^c = 1``, in index order."""
        ia, ib = self.charge(a).index, self.charge(b).index
        return tuple(self._charges[c] for c in np.flatnonzero(self.N[ia, ib]))

    def n_symbol(self, a, b, c) -> int:
        return int(self.N[self.charge(a).index, self.charge(b).index,
                          self.charge(c).index])

    def f_symbol(self, a, b, c, d, e, f) -> complex:
        """Matrix element ``[F_d^{abc}]_{ef}``; 0 for inadmissible indices."""
        idx = tuple(self.charge(x).index for x in (a, b, c, d, e, f))
        return complex(self.F[idx])

    def r_symbol(self, a, b, c) -> complex:
        """Exchange phase ``R_c^{ab}`` for the counterclockwise convention."""
        ia, ib, ic = (self.charge(x).index for x in (a, b, c))
        if not self.N[ia, ib, ic]:
            raise FusionError(
                f"{self.labels[ic]} is not a fusion channel of "
                f"{self.labels[ia]} x {self.labels[ib]}")
        return complex(self.R[ia, ib, ic])

    def kappa(self, a) -> complex:
        """The bending phase ``d_a * [F_a^{a,dual(a),a}]_{00}``.

        Gauge-dependent in general; for self-dual ``a`` this is the
        Frobenius-Schur indicator and equals +-1.
        """
        ia = self.charge(a).index
        ab = self._dual[ia]
        return complex(self.qd[ia] * self.F[ia, ab, ia, ia, 0, 0])

    def is_abelian(self, c) -> bool:
        """True iff ``d_c = 1``, i.e. fusion with ``c`` is single-channel."""
        return bool(self.qd[self.charge(c).index] < 1.0 + ABELIAN_TOL)

    def twist(self, a) -> complex:
        """Topological spin ``theta_a = sum_c (d_c / d_a) R_c^{aa}``."""
        ia = self.charge(a).index
        channels = np.flatnonzero(self.N[ia, ia])
        return complex(np.sum(self.qd[channels] * self.R[ia, ia, channels])
                       / self.qd[ia])

    # -- consistency --------------------------------------------------------

    def verify_consistency(self, tolerance: float = CONSISTENCY_TOL) -> ConsistencyReport:
        """Residuals of pentagon, hexagon (both chiralities), F-unitarity
        and the quantum-dimension fusion identity.

        Failures are reported, never raised.
        """
        pent = _pentagon_residual(self.N, self.F)
        hexa = _hexagon_residual(self.N, self.F, self.R)
        unit = _unitarity_residual(self.N, self.F)
        qres = _qdim_residual(self.N, self.qd)
        worst = max(pent, hexa, unit, qres)
        return ConsistencyReport(pent, hexa, unit, qres, tolerance,
                                 bool(worst < tolerance))

    def vacuum_probability_residual(self) -> float:
        """Worst deviation of ``|[F_a^{a,dual(a),a}]_{e0}|^2`` from ``d_e/d_a^2``.

        This is the identity behind the per-attempt success probability of a
        forced measurement; it must vanish for any consistent unitary model.
        """
        worst = 0.0
        for a in range(self.num_charges):
            ab = self._dual[a]
            da2 = self.qd[a] ** 2
            for e in np.flatnonzero(self.N[a, ab]):
                got = abs(self.F[a, ab, a, a, e, 0]) ** 2
                worst = max(worst, abs(got - self.qd[e] / da2))
        return worst

    # -- internals ----------------------------------------------------------

    def _find_duals(self) -> np.ndarray:
        dual = np.full(self.num_charges, -1, dtype=int)
        for a in range(self.num_charges):
            partners = np.flatnonzero(self.N[a, :, 0])
            if len(partners) != 1:
                raise ModelError(
                    f"charge {self.labels[a]!r} must have exactly one dual, "
                    f"found {len(partners)}")
            dual[a] = partners[0]
        return dual

    def _validate_tables(self) -> None:
        m = self.num_charges
        if self.N.shape != (m, m, m):
            raise ModelError("fusion table has wrong shape")
        if self.F.shape != (m,) * 6 or self.R.shape != (m,) * 3:
            raise ModelError("F/R tables have wrong shape")
        if self.qd.shape != (m,):
            raise ModelError("quantum-dimension vector has wrong shape")
        if np.any((self.N != 0) & (self.N != 1)):
            raise ModelError("fusion multiplicities must be 0 or 1")
        eye = np.eye(m, dtype=np.int8)
        if not (np.array_equal(self.N[0], eye) and np.array_equal(self.N[:, 0], eye)):
            raise ModelError("the first charge must act as the vacuum")
        if np.any(self.N != self.N.transpose(1, 0, 2)):
            raise ModelError("fusion must be commutative")
        # Associativity of the fusion ring, needed for well-defined bases.
        lhs = np.einsum("abe,ecd->abcd", self.N, self.N)
        rhs = np.einsum("bcf,afd->abcd", self.N, self.N)
        if np.any(lhs != rhs):
            raise ModelError("fusion rules are not associative")
        if abs(self.qd[0] - 1.0) > 1e-12 or np.any(self.qd < 1.0 - 1e-9):
            raise ModelError("quantum dimensions must satisfy d_0 = 1 and d_a >= 1")

    def _validate_duals(self) -> None:
        if np.any(np.abs(self.qd - self.qd[self._dual]) > 1e-9):
            raise ModelError("quantum dimensions must satisfy d_a = d_dual(a)")
        if np.any(self._dual[self._dual] != np.arange(self.num_charges)):
            raise ModelError("dual map must be an involution")

    def __repr__(self) -> str:
        extra = "".join(f", {k}={v}" for k, v in sorted(self.params.items()))
        return f"AnyonModel({self.name!r}{extra})"


# ---------------------------------------------------------------------------
# Consistency residuals.
#
# The pentagon check is the hot path (SU(2)_10 has ~10^7 admissible
# instances), so admissible index tuples are enumerated with vectorized
# joins and the equation is evaluated with gather operations on the dense
# F array.  Inadmissible F entries are stored as exact zeros, which lets the
# internal sums run over the full charge range.
# ---------------------------------------------------------------------------


def _join_keys(small: np.ndarray, big: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Matching row-index pairs (i_small, i_big) for equal key values."""
    order = np.argsort(small, kind="stable")
    sorted_small = small[order]
    lo = np.searchsorted(sorted_small, big, side="left")
    hi = np.searchsorted(sorted_small, big, side="right")
    counts = hi - lo
    total = int(counts.sum())
    i_big = np.repeat(np.arange(len(big)), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    i_small = order[np.repeat(lo, counts) + offsets]
    return i_small, i_big


def _join_on(left: np.ndarray, left_cols, right: np.ndarray, right_cols) -> tuple[np.ndarray, np.ndarray]:
    """Row indices (il, ir) of the inner join of two integer tables.

    Sorts whichever side is smaller; the pentagon enumeration joins a large
    accumulated table against the short fusion-triple list at every step.
    """
    lk = left[:, left_cols[0]].astype(np.int64)
    rk = right[:, right_cols[0]].astype(np.int64)
    for lc, rc in zip(left_cols[1:], right_cols[1:]):
        span = int(max(left[:, lc].max(initial=0), right[:, rc].max(initial=0))) + 1
        lk = lk * span + left[:, lc]
        rk = rk * span + right[:, rc]
    if len(lk) <= len(rk):
        return _join_keys(lk, rk)
    ir, il = _join_keys(rk, lk)
    return il, ir


def _pentagon_tuples(N: np.ndarray) -> np.ndarray:
    """All admissible pentagon index tuples, columns (a, b, f, c, g, d, e, l, k).

    Admissibility: f in ab, g in fc, e in gd, l in cd, k in bl and e in ak.
    """
    triples = np.argwhere(N)  # rows (x, y, z) with z in fuse(x, y)
    abf = triples
    fcg = triples
    il, ir = _join_on(abf, [2], fcg, [0])
    t = np.column_stack([abf[il][:, [0, 1, 2]], fcg[ir][:, [1, 2]]])  # a b f c g
    gde = triples
    il, ir = _join_on(t, [4], gde, [0])
    t = np.column_stack([t[il], gde[ir][:, [1, 2]]])  # a b f c g d e
    cdl = triples
    il, ir = _join_on(t, [3, 5], cdl, [0, 1])
    t = np.column_stack([t[il], cdl[ir][:, [2]]])  # a b f c g d e l
    blk = triples
    il, ir = _join_on(t, [1, 7], blk, [0, 1])
    t = np.column_stack([t[il], blk[ir][:, [2]]])  # a b f c g d e l k
    keep = N[t[:, 0], t[:, 8], t[:, 6]].astype(bool)  # e in fuse(a, k)
    return t[keep]


def _pentagon_residual(N: np.ndarray, F: np.ndarray, chunk: int = 262144) -> float:
    tuples = _pentagon_tuples(N)
    if len(tuples) == 0:
        return 0.0
    if not np.any(F.imag):
        F = np.ascontiguousarray(F.real)  # halves the gather traffic
    # h appears in all three right-hand factors; transposed copies put the
    # h axis last so each gather is one contiguous slab per row.
    F2 = np.ascontiguousarray(F.transpose(0, 2, 3, 4, 5, 1))  # [a,d,e,g,k,h]
    F3 = np.ascontiguousarray(F.transpose(0, 1, 2, 3, 5, 4))  # [b,c,d,k,l,h]
    worst = 0.0
    for start in range(0, len(tuples), chunk):
        a, b, f, c, g, d, e, l, k = tuples[start:start + chunk].T
        lhs = F[f, c, d, e, g, l] * F[a, b, l, e, f, k]
        rhs = np.einsum("rh,rh,rh->r", F[a, b, c, g, f, :], F2[a, d, e, g, k, :],
                        F3[b, c, d, k, l, :])
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def _hexagon_tuples(N: np.ndarray) -> np.ndarray:
    """Admissible hexagon tuples, columns (a, b, c, d, e, f).

    Admissibility: e in ac, d in eb, f in cb, d in af.
    """
    ace = np.argwhere(N)  # rows (a, c, e) with e in fuse(a, c)
    ebd = np.argwhere(N)  # rows (e, b, d)
    il, ir = _join_on(ace, [2], ebd, [0])
    t = np.column_stack([ace[il], ebd[ir][:, [1, 2]]])  # a c e b d
    cbf = np.argwhere(N)
    il, ir = _join_on(t, [1, 3], cbf, [0, 1])
    t = np.column_stack([t[il], cbf[ir][:, [2]]])  # a c e b d f
    keep = N[t[:, 0], t[:, 5], t[:, 4]].astype(bool)  # d in fuse(a, f)
    t = t[keep]
    return t[:, [0, 3, 1, 4, 2, 5]]  # a b c d e f


def _hexagon_residual(N: np.ndarray, F: np.ndarray, R: np.ndarray) -> float:
    tuples = _hexagon_tuples(N)
    if len(tuples) == 0:
        return 0.0
    a, b, c, d, e, f = tuples.T
    Rt = np.ascontiguousarray(R.transpose(0, 2, 1))           # [c, d, g]
    Ft = np.ascontiguousarray(F.transpose(0, 1, 2, 3, 5, 4))  # [a,b,c,d,f,g]
    mid = F[c, a, b, d, e, :] * Ft[a, b, c, d, f, :]
    worst = 0.0
    # One hexagon per chirality: R and its inverse must both recouple
    # consistently with F.
    lhs = R[c, a, e] * F[a, c, b, d, e, f] * R[c, b, f]
    rhs = np.einsum("rg,rg->r", mid, Rt[c, d, :])
    worst = max(worst, float(np.abs(lhs - rhs).max()))
    lhs = np.conj(R[c, a, e]) * F[a, c, b, d, e, f] * np.conj(R[c, b, f])
    rhs = np.einsum("rg,rg->r", mid, np.conj(Rt[c, d, :]))
    worst = max(worst, float(np.abs(lhs - rhs).max()))
    return worst


def _unitarity_residual(N: np.ndarray, F: np.ndarray) -> float:
    m = N.shape[0]
    adm_e = np.einsum("abe,ecd->abcde", N, N)  # e admissible for [F_d^{abc}]
    adm_f = np.einsum("bcf,afd->abcdf", N, N)
    eye = np.eye(m)
    rows = np.einsum("abcdef,abcdgf->abcdeg", F, np.conj(F))
    target = adm_e[..., :, None] * adm_e[..., None, :] * eye
    worst = float(np.abs(rows - target).max())
    cols = np.einsum("abcdef,abcdeg->abcdfg", np.conj(F), F)
    target = adm_f[..., :, None] * adm_f[..., None, :] * eye
    return max(worst, float(np.abs(cols - target).max()))


def _qdim_residual(N: np.ndarray, qd: np.ndarray) -> float:
    lhs = np.outer(qd, qd)
    rhs = np.einsum("abc,c->ab", N, qd)
    return float(np.abs(lhs - rhs).max())


# ---------------------------------------------------------------------------
# Built-in models.
# ---------------------------------------------------------------------------


def _fill_tables(m, fusion, f_func, r_func):
    """Dense F/R arrays from per-entry functions, zero off the admissible set."""
    N = np.zeros((m, m, m), dtype=np.int8)
    for (a, b), cs in fusion.items():
        for c in cs:
            N[a, b, c] = 1
    F = np.zeros((m,) * 6, dtype=complex)
    for a in range(m):
        for b in range(m):
            for e in np.flatnonzero(N[a, b]):
                for c in range(m):
                    for d in np.flatnonzero(N[e, c]):
                        for f in np.flatnonzero(N[b, c]):
                            if N[a, f, d]:
                                F[a, b, c, d, e, f] = f_func(a, b, c, d, e, f)
    R = np.zeros((m, m, m), dtype=complex)
    for a in range(m):
        for b in range(m):
            for c in np.flatnonzero(N[a, b]):
                R[a, b, c] = r_func(a, b, c)
    return N, F, R


def fibonacci_model() -> AnyonModel:
    """The Fibonacci anyon model: charges 0 (vacuum) and 1 (tau)."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    fmat = np.array([[1 / phi, 1 / math.sqrt(phi)],
                     [1 / math.sqrt(phi), -1 / phi]])
    r_tau = {0: np.exp(-4j * np.pi / 5.0), 1: np.exp(3j * np.pi / 5.0)}

    def f_func(a, b, c, d, e, f):
        if (a, b, c, d) == (1, 1, 1, 1):
            return fmat[e, f]
        return 1.0

    def r_func(a, b, c):
        if (a, b) == (1, 1):
            return r_tau[c]
        return 1.0

    fusion = {(0, 0): [0], (0, 1): [1], (1, 0): [1], (1, 1): [0, 1]}
    N, F, R = _fill_tables(2, fusion, f_func, r_func)
    return AnyonModel("fibonacci", ["0", "1"], N, np.array([1.0, phi]), F, R,
                      meta={"computational_charge": "1",
                            "chirality": "counterclockwise",
                            "gauge": "real symmetric F"})


def ising_model() -> AnyonModel:
    """The Ising anyon model: charges 0, 1/2 (sigma), 1 (psi).

    Uses the variant with Frobenius-Schur sign +1 for the sigma charge and
    topological twist exp(i*pi/8); the level-2 SU(2) model differs from this
    in the sign of kappa_{1/2}.
    """
    s, p = 1, 2  # sigma, psi indices
    isq2 = 1 / math.sqrt(2.0)

    def f_func(a, b, c, d, e, f):
        if (a, b, c, d) == (s, s, s, s):
            return -isq2 if e == p and f == p else isq2
        if (a, b, c, d) in ((s, p, s, p), (p, s, p, s)):
            return -1.0
        return 1.0

    def r_func(a, b, c):
        if (a, b) == (s, s):
            return np.exp(-1j * np.pi / 8) if c == 0 else np.exp(3j * np.pi / 8)
        if (a, b) in ((s, p), (p, s)):
            return -1.0j
        if (a, b) == (p, p):
            return -1.0
        return 1.0

    fusion = {(0, 0): [0], (0, s): [s], (s, 0): [s], (0, p): [p], (p, 0): [p],
              (s, s): [0, p], (s, p): [s], (p, s): [s], (p, p): [0]}
    N, F, R = _fill_tables(3, fusion, f_func, r_func)
    return AnyonModel("ising", ["0", "1/2", "1"], N,
                      np.array([1.0, math.sqrt(2.0), 1.0]), F, R,
                      meta={"computational_charge": "1/2",
                            "chirality": "counterclockwise",
                            "gauge": "real symmetric F",
                            "frobenius_schur_1/2": 1})


def _spin_label(n: int) -> str:
    return str(n // 2) if n % 2 == 0 else f"{n}/2"


def su2k_model(k: int) -> AnyonModel:
    """Level-``k`` SU(2) anyons; charges are spins ``0, 1/2, ..., k/2``.

    Internally charges are doubled spins ``n = 0..k``.  F-symbols are the
    q-deformed 6j recoupling coefficients at ``q = exp(2*pi*i/(k+2))``,
    which are real orthogonal in this gauge.
    """
    if k < 2:
        raise ModelError("su2_k requires k >= 2")
    m = k + 1
    # q-numbers [n] = sin(n*pi/(k+2)) / sin(pi/(k+2)) and their factorials.
    s1 = math.sin(math.pi / (k + 2))
    qnum = np.array([math.sin(n * math.pi / (k + 2)) / s1 for n in range(2 * k + 4)])
    qfact = np.ones(2 * k + 4)
    for n in range(1, 2 * k + 4):
        qfact[n] = qfact[n - 1] * qnum[n]

    def admissible(a, b, c):
        return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b and a + b + c <= 2 * k

    def delta(a, b, c):
        num = (qfact[(-a + b + c) // 2] * qfact[(a - b + c) // 2]
               * qfact[(a + b - c) // 2])
        return math.sqrt(num / qfact[(a + b + c) // 2 + 1])

    def sixj(a, b, e, c, d, f):
        # Racah sum for {a b e; c d f} with doubled-integer arguments.
        for x, y, z in ((a, b, e), (a, d, f), (c, b, f), (c, d, e)):
            if not admissible(x, y, z):
                return 0.0
        t1, t2, t3, t4 = (a + b + e) // 2, (e + c + d) // 2, (b + c + f) // 2, (a + f + d) // 2
        s12, s13, s23 = (a + b + c + d) // 2, (a + e + c + f) // 2, (b + e + d + f) // 2
        total = 0.0
        for z in range(max(t1, t2, t3, t4), min(s12, s13, s23) + 1):
            denom = (qfact[z - t1] * qfact[z - t2] * qfact[z - t3] * qfact[z - t4]
                     * qfact[s12 - z] * qfact[s13 - z] * qfact[s23 - z])
            total += (-1) ** z * qfact[z + 1] / denom
        return total * delta(a, b, e) * delta(e, c, d) * delta(c, b, f) * delta(a, f, d)

    def f_func(a, b, c, d, e, f):
        sign = (-1) ** ((a + b + c + d) // 2)
        return sign * math.sqrt(qnum[e + 1] * qnum[f + 1]) * sixj(a, b, e, c, d, f)

    q = np.exp(2j * np.pi / (k + 2))

    def r_func(a, b, c):
        return ((-1.0) ** ((c - a - b) // 2)
                * q ** ((c * (c + 2) - a * (a + 2) - b * (b + 2)) / 8.0))

    fusion = {}
    for a in range(m):
        for b in range(m):
            top = min(a + b, 2 * k - a - b)
            fusion[(a, b)] = list(range(abs(a - b), top + 1, 2))
    N, F, R = _fill_tables(m, fusion, f_func, r_func)
    qd = qnum[1:m + 1].copy()
    return AnyonModel("su2_k", [_spin_label(n) for n in range(m)], N, qd, F, R,
                      params={"k": k},
                      meta={"computational_charge": "1/2",
                            "chirality": "counterclockwise",
                            "gauge": "real orthogonal q-6j",
                            "frobenius_schur_1/2": -1})


_BUILTIN_NAMES = ("fibonacci", "ising", "su2_k")


def load_builtin(name: str, k: int | None = None) -> AnyonModel:
    """Construct a built-in model by name.

    ``k`` is required for ``su2_k`` (and must be >= 2); it is rejected for
    the other models.
    """
    key = name.strip().lower().replace("-", "_")
    if key == "su2k":
        key = "su2_k"
    if key not in _BUILTIN_NAMES:
        raise ModelError(f"unknown model {name!r}; built-ins: {', '.join(_BUILTIN_NAMES)}")
    if key == "su2_k":
        if k is None:
            raise ModelError("su2_k requires the level parameter k")
        return su2k_model(int(k))
    if k is not None:
        raise ModelError(f"model {name!r} does not take a level parameter")
    return fibonacci_model() if key == "fibonacci" else ising_model()
