"""Dense density-matrix oracle for small mode counts.

Everything in this module works on explicit numpy matrices over the full
truncated Fock space and is kept deliberately independent of the sparse
engine: operators are built from ladder matrices and matrix exponentials and
applied by direct multiplication (einsum contractions over the mode axes).
It exists so that every number produced by the sparse engine can be checked
against a second, structurally different implementation.

Intended for Hilbert-space dimensions up to ~1e5.
"""

from __future__ import annotations

import itertools
import math
import string
from typing import Iterable, Mapping, Sequence

import numpy as np

# 50/50 beamsplitter convention used across the project: the creation operator
# of the first mode maps to (out1 + out2)/sqrt(2), the second to
# (out1 - out2)/sqrt(2), with outputs occupying the input slots.
_BS_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def _lowering(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


def _expm_hermitian_times_minus_i(h: np.ndarray) -> np.ndarray:
    """exp(-i h) for Hermitian h, via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


class DenseOracle:
    """Dense simulator over a fixed ordered set of labeled modes."""

    def __init__(self, labels: Sequence[str], cutoffs: int | Mapping[str, int]):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate mode labels")
        if isinstance(cutoffs, Mapping):
            self.cutoffs = tuple(int(cutoffs[m]) for m in self.labels)
        else:
            self.cutoffs = tuple(int(cutoffs) for _ in self.labels)
        self.dims = tuple(c + 1 for c in self.cutoffs)
        self.dim = int(np.prod(self.dims))
        self._pos = {m: i for i, m in enumerate(self.labels)}
        # basis index -> occupation tuple, row-major over self.dims
        self._occupations = np.array(
            list(itertools.product(*[range(d) for d in self.dims])), dtype=int
        )

    # ------------------------------------------------------------------ basis

    def index(self, occ: Sequence[int]) -> int:
        idx = 0
        for n, d in zip(occ, self.dims):
            if not 0 <= n < d:
                raise ValueError(f"occupation {occ} outside cutoffs")
            idx = idx * d + n
        return idx

    def occupation(self, by_label: Mapping[str, int]) -> tuple:
        """Occupation tuple from a {label: count} mapping (others vacuum)."""
        unknown = set(by_label) - set(self.labels)
        if unknown:
            raise KeyError(f"unknown modes {sorted(unknown)}")
        return tuple(int(by_label.get(m, 0)) for m in self.labels)

    def ket(self, terms: Mapping[tuple, complex]) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        for occ, amp in terms.items():
            v[self.index(occ)] += amp
        return v

    def pure_rho(self, terms: Mapping[tuple, complex]) -> np.ndarray:
        v = self.ket(terms)
        return np.outer(v, v.conj())

    # ------------------------------------------------------ operator building

    def _mode_dims(self, modes: Sequence[str]) -> list[int]:
        return [self.dims[self._pos[m]] for m in modes]

    def beamsplitter_matrix(self, mode1: str, mode2: str) -> np.ndarray:
        """Unitary on the two-mode subspace implementing the 50/50 convention."""
        d1, d2 = self._mode_dims([mode1, mode2])
        a1 = np.kron(_lowering(d1), np.eye(d2))
        a2 = np.kron(np.eye(d1), _lowering(d2))
        h_small = math.pi * (np.eye(2) - _BS_MATRIX) / 2.0
        ops = [a1, a2]
        h = np.zeros((d1 * d2, d1 * d2), dtype=complex)
        for i in range(2):
            for j in range(2):
                h += h_small[i, j] * ops[i].conj().T @ ops[j]
        return _expm_hermitian_times_minus_i(h)

    def tms_matrix(self, mode1: str, mode2: str, r: float) -> np.ndarray:
        """exp(r (a1† a2† - a1 a2)) on the truncated two-mode subspace."""
        d1, d2 = self._mode_dims([mode1, mode2])
        a1 = np.kron(_lowering(d1), np.eye(d2))
        a2 = np.kron(np.eye(d1), _lowering(d2))
        k = r * (a1.conj().T @ a2.conj().T - a1 @ a2)
        return _expm_hermitian_times_minus_i(1j * k)

    def swap_matrix(self, mode1: str, mode2: str) -> np.ndarray:
        d1, d2 = self._mode_dims([mode1, mode2])
        if d1 != d2:
            raise ValueError("swap requires equal cutoffs")
        u = np.zeros((d1 * d2, d1 * d2))
        for n1 in range(d1):
            for n2 in range(d2):
                u[n2 * d2 + n1, n1 * d2 + n2] = 1.0
        return u

    def phase_matrix(self, mode: str, phi: float) -> np.ndarray:
        d = self.dims[self._pos[mode]]
        return np.diag(np.exp(1j * phi * np.arange(d)))

    def loss_kraus(self, mode: str, transmittance: float) -> list[np.ndarray]:
        """Kraus set for single-mode photon loss, indexed by photons lost."""
        d = self.dims[self._pos[mode]]
        t, r = float(transmittance), 1.0 - float(transmittance)
        kraus = []
        for m in range(d):
            a = np.zeros((d, d), dtype=complex)
            for n in range(m, d):
                a[n - m, n] = math.sqrt(math.comb(n, m)) * t ** ((n - m) / 2.0) * r ** (m / 2.0)
            kraus.append(a)
        return kraus

    # ------------------------------------------------------------ application

    def _side_apply(self, rho: np.ndarray, op: np.ndarray, pos: Sequence[int], bra: bool) -> np.ndarray:
        """Multiply op onto the ket axes (or conj(op) onto the bra axes).

        When the target axes are consecutive and ascending the operation is a
        single batched matmul on a reshaped view; otherwise the axes are moved
        to the front first.
        """
        n = len(self.labels)
        axes = [n + p for p in pos] if bra else list(pos)
        d_op = int(np.prod([self.dims[p] for p in pos]))
        mat = op.conj() if bra else op
        full = self.dims + self.dims
        if all(axes[i] + 1 == axes[i + 1] for i in range(len(axes) - 1)):
            start, stop = axes[0], axes[-1] + 1
            pre = int(np.prod(full[:start]))
            post = int(np.prod(full[stop:]))
            r3 = rho.reshape(pre, d_op, post)
            return np.matmul(mat, r3).reshape(self.dim, self.dim)
        rho_t = rho.reshape(full)
        moved = np.moveaxis(rho_t, axes, range(len(axes)))
        shape = moved.shape
        out = mat @ np.ascontiguousarray(moved).reshape(d_op, -1)
        out = np.moveaxis(out.reshape(shape), range(len(axes)), axes)
        return np.ascontiguousarray(out).reshape(self.dim, self.dim)

    def _apply_one_sided(self, rho: np.ndarray, op: np.ndarray, modes: Sequence[str]) -> np.ndarray:
        """op rho op† with op acting on the listed modes only."""
        pos = [self._pos[m] for m in modes]
        return self._side_apply(self._side_apply(rho, op, pos, bra=False), op, pos, bra=True)

    def apply_unitary(self, rho: np.ndarray, u: np.ndarray, modes: Sequence[str]) -> np.ndarray:
        return self._apply_one_sided(rho, u, modes)

    def apply_channel(self, rho: np.ndarray, kraus: Iterable[np.ndarray], modes: Sequence[str]) -> np.ndarray:
        out = np.zeros_like(rho)
        for a in kraus:
            out += self._apply_one_sided(rho, a, modes)
        return out

    def apply_beamsplitter(self, rho: np.ndarray, mode1: str, mode2: str) -> np.ndarray:
        return self.apply_unitary(rho, self.beamsplitter_matrix(mode1, mode2), [mode1, mode2])

    def apply_phase(self, rho: np.ndarray, mode: str, phi: float) -> np.ndarray:
        return self.apply_unitary(rho, self.phase_matrix(mode, phi), [mode])

    def apply_swap(self, rho: np.ndarray, mode1: str, mode2: str) -> np.ndarray:
        return self.apply_unitary(rho, self.swap_matrix(mode1, mode2), [mode1, mode2])

    def apply_tms(self, rho: np.ndarray, mode1: str, mode2: str, r: float) -> np.ndarray:
        return self.apply_unitary(rho, self.tms_matrix(mode1, mode2, r), [mode1, mode2])

    def apply_loss(self, rho: np.ndarray, mode: str, transmittance: float) -> np.ndarray:
        return self.apply_channel(rho, self.loss_kraus(mode, transmittance), [mode])

    def run_circuit(self, rho: np.ndarray, ops: Iterable[tuple]) -> np.ndarray:
        """Apply a sequence of ("bs", m1, m2) / ("phase", m, phi) / ("loss", m, T)
        / ("swap", m1, m2) / ("tms", m1, m2, r) instructions."""
        for op in ops:
            kind, args = op[0], op[1:]
            if kind == "bs":
                rho = self.apply_beamsplitter(rho, *args)
            elif kind == "phase":
                rho = self.apply_phase(rho, *args)
            elif kind == "loss":
                rho = self.apply_loss(rho, *args)
            elif kind == "swap":
                rho = self.apply_swap(rho, *args)
            elif kind == "tms":
                rho = self.apply_tms(rho, *args)
            else:
                raise ValueError(f"unknown circuit op {kind!r}")
        return rho

    # ------------------------------------------------------------ measurement

    def pattern_mask(self, detector_modes: Sequence[str], clicks: Sequence[bool]) -> np.ndarray:
        """Diagonal projector (as a 0/1 vector over the basis) for a click pattern.

        A click means at least one photon in the mode; threshold detectors do
        not resolve photon number.
        """
        mask = np.ones(self.dim, dtype=bool)
        for mode, clicked in zip(detector_modes, clicks):
            occ = self._occupations[:, self._pos[mode]]
            mask &= (occ >= 1) if clicked else (occ == 0)
        return mask.astype(float)

    def threshold_patterns(self, rho: np.ndarray, detector_modes: Sequence[str]):
        """All 2^k click patterns with weights and reduced conditional matrices.

        Returns a list of (clicks, weight, rho_reduced, kept_labels); the
        conditional matrices are unnormalized (their traces are the weights).
        The per-pattern projectors are diagonal, so the conditional reduced
        matrix is a single contraction against a detector-basis mask.
        """
        kept = [m for m in self.labels if m not in detector_modes]
        kept_pos = [self._pos[m] for m in kept]
        det_pos = [self._pos[m] for m in detector_modes]
        n = len(self.labels)
        order = kept_pos + det_pos
        rho_t = rho.reshape(self.dims + self.dims)
        rho_t = np.transpose(rho_t, order + [n + p for p in order])
        d_kept = int(np.prod([self.dims[p] for p in kept_pos])) if kept_pos else 1
        d_det = int(np.prod([self.dims[p] for p in det_pos]))
        rho4 = np.ascontiguousarray(rho_t.reshape(d_kept, d_det, d_kept, d_det))

        det_dims = [self.dims[p] for p in det_pos]
        det_occ = np.array(list(itertools.product(*[range(d) for d in det_dims])), dtype=int)
        results = []
        for clicks in itertools.product([False, True], repeat=len(detector_modes)):
            mask = np.ones(d_det, dtype=float)
            for col, clicked in enumerate(clicks):
                mask *= (det_occ[:, col] >= 1) if clicked else (det_occ[:, col] == 0)
            reduced = np.einsum("adbd,d->ab", rho4, mask, optimize=True)
            weight = float(np.real(np.trace(reduced)))
            results.append((clicks, weight, reduced, kept))
        return results

    def ptrace(self, rho: np.ndarray, keep: Sequence[str]) -> np.ndarray:
        """Partial trace keeping the listed modes (in registry order)."""
        n = len(self.labels)
        keep_pos = [self._pos[m] for m in self.labels if m in keep]
        rho_t = rho.reshape(self.dims + self.dims)
        ls = string.ascii_letters
        sub = list(ls[: 2 * n])
        for i in range(n):
            if i not in keep_pos:
                sub[n + i] = sub[i]
        out = [sub[i] for i in keep_pos] + [sub[n + i] for i in keep_pos]
        expr = f"{''.join(sub)}->{''.join(out)}"
        reduced = np.einsum(expr, rho_t, optimize=True)
        d = int(np.prod([self.dims[i] for i in keep_pos])) if keep_pos else 1
        return reduced.reshape(d, d)

    def fidelity(self, rho: np.ndarray, target: np.ndarray) -> float:
        """<target| rho |target> for a unit-norm target vector."""
        return float(np.real(target.conj() @ rho @ target))


# --------------------------------------------------------------------------
# Reference scenarios, written directly against the dense primitives.  These
# re-derive the protocol pipeline without touching the sparse engine.
# --------------------------------------------------------------------------

# Detector aliases after the Bell beamsplitter acts in place:
#   cH <- H1 slot, cV <- V1 slot, dH <- H2 slot, dV <- V2 slot.
BELL_DETECTOR_MODES = ("H1", "V1", "H2", "V2")


def classify_clicks(clicks: Sequence[bool]) -> str:
    """Same-side orthogonal double clicks herald "plus", cross-side "minus"."""
    c_h, c_v, d_h, d_v = clicks
    if sum(clicks) != 2:
        return "none"
    if (c_h and c_v) or (d_h and d_v):
        return "plus"
    if (c_v and d_h) or (c_h and d_v):
        return "minus"
    return "same_pol"


def bell_outcomes(oracle: DenseOracle, rho: np.ndarray):
    """Bell analysis: per-polarization beamsplitter, threshold patterns, class sums.

    Returns (weights_by_class, conditional_by_class) with unnormalized reduced
    density matrices over the non-detector modes.
    """
    rho = oracle.apply_beamsplitter(rho, "H1", "H2")
    rho = oracle.apply_beamsplitter(rho, "V1", "V2")
    weights = {"plus": 0.0, "minus": 0.0, "same_pol": 0.0, "none": 0.0}
    conditionals: dict[str, np.ndarray | None] = {k: None for k in weights}
    for clicks, weight, reduced, _kept in oracle.threshold_patterns(rho, BELL_DETECTOR_MODES):
        cls = classify_clicks(clicks)
        weights[cls] += weight
        conditionals[cls] = reduced if conditionals[cls] is None else conditionals[cls] + reduced
    return weights, conditionals


_SCENARIO_LABELS = ("mechA", "mechB", "H1", "H2", "V1", "V2")


def _joint_terms(oracle: DenseOracle, theta: float, phi: float, memory: Mapping[tuple, complex]) -> dict:
    """Tensor the memory/Stokes terms with the polarization input qubit.

    ``memory`` maps {mechA, mechB, H2, V2 occupations as a label dict} terms;
    here it is given as {(mA, mB, nH2, nV2): amplitude}.
    """
    joint: dict = {}
    for (m_a, m_b, n_h2, n_v2), amp in memory.items():
        base = {"mechA": m_a, "mechB": m_b, "H2": n_h2, "V2": n_v2}
        occ_v = oracle.occupation({**base, "V1": 1})
        occ_h = oracle.occupation({**base, "H1": 1})
        joint[occ_v] = joint.get(occ_v, 0.0) + amp * math.cos(theta)
        joint[occ_h] = joint.get(occ_h, 0.0) + amp * math.sin(theta) * np.exp(1j * phi)
    return joint


def ideal_teleport(theta: float, phi: float = 0.0, cutoff: int = 2):
    """Heralded mechanical states for single-photon sources and no loss."""
    oracle = DenseOracle(_SCENARIO_LABELS, cutoff)
    s2 = 1.0 / math.sqrt(2.0)
    memory = {(0, 1, 0, 1): s2, (1, 0, 1, 0): s2}
    rho = oracle.pure_rho(_joint_terms(oracle, theta, phi, memory))
    return oracle, bell_outcomes(oracle, rho)


def lossy_teleport(theta: float, t_nd: float = 1.0, t_det: float = 1.0, cutoff: int = 2):
    """Single-photon scenario with propagation loss on the memory output and
    detector inefficiency on all four detector modes."""
    oracle = DenseOracle(_SCENARIO_LABELS, cutoff)
    s2 = 1.0 / math.sqrt(2.0)
    memory = {(0, 1, 0, 1): s2, (1, 0, 1, 0): s2}
    rho = oracle.pure_rho(_joint_terms(oracle, theta, 0.0, memory))
    if t_nd != 1.0:
        rho = oracle.apply_loss(rho, "H2", t_nd)
        rho = oracle.apply_loss(rho, "V2", t_nd)
    rho = oracle.apply_beamsplitter(rho, "H1", "H2")
    rho = oracle.apply_beamsplitter(rho, "V1", "V2")
    if t_det != 1.0:
        for mode in BELL_DETECTOR_MODES:
            rho = oracle.apply_loss(rho, mode, t_det)
    weights = {"plus": 0.0, "minus": 0.0, "same_pol": 0.0, "none": 0.0}
    conditionals: dict[str, np.ndarray | None] = {k: None for k in weights}
    for clicks, weight, reduced, _kept in oracle.threshold_patterns(rho, BELL_DETECTOR_MODES):
        cls = classify_clicks(clicks)
        weights[cls] += weight
        conditionals[cls] = reduced if conditionals[cls] is None else conditionals[cls] + reduced
    return oracle, weights, conditionals


def blue_two_photon_loss(theta: float, transmittance: float):
    """Entangling pulse in a two-photon state, single-photon input, loss on the
    memory output before the Bell beamsplitter.

    Returns (weights_by_class, unnormalized "plus" conditional over the
    mechanical modes, mech basis occupations).
    """
    cutoffs = {"mechA": 2, "mechB": 2, "H1": 3, "H2": 3, "V1": 3, "V2": 3}
    oracle = DenseOracle(_SCENARIO_LABELS, cutoffs)
    # Two pump photons split over the two paths and convert pairwise:
    # (|20;20> + |02;02>)/2 + |11;11>/sqrt(2) over mech(A,B) x Stokes(H2,V2).
    memory = {
        (2, 0, 2, 0): 0.5,
        (0, 2, 0, 2): 0.5,
        (1, 1, 1, 1): 1.0 / math.sqrt(2.0),
    }
    rho = oracle.pure_rho(_joint_terms(oracle, theta, 0.0, memory))
    rho = oracle.apply_loss(rho, "H2", transmittance)
    rho = oracle.apply_loss(rho, "V2", transmittance)
    weights, conditionals = bell_outcomes(oracle, rho)
    mech_basis = list(itertools.product(range(3), range(3)))
    return weights, conditionals["plus"], mech_basis
