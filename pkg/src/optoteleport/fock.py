"""Sparse multimode Fock states and mixed-state ensembles.

States live on a fixed ordered set of labeled bosonic modes (a
``ModeRegistry``).  A ``PureState`` is a sparse map from occupation tuples to
complex amplitudes; an ``Ensemble`` is a weighted list of unit-norm pure
states and is the general carrier for heralded, lossy and thermal (mixed)
states.  Every operation is a pure function: inputs are never mutated, so
states can be shared freely across threads or parallel parameter sweeps.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Mapping, Sequence

PRUNE_TOL = 1e-12
NORM_TOL = 1e-10


class FockStateError(Exception):
    """Base class for state-algebra errors."""


class CutoffError(FockStateError):
    """An occupation number would exceed a mode's cutoff."""


class RegistryMismatchError(FockStateError):
    """Operation mixing states that live on different registries."""


class NormalizationError(FockStateError):
    """A state required to be normalized is not."""


class ModeRegistry:
    """Ordered set of labeled bosonic modes with per-mode occupation cutoffs.

    The label order fixes the tensor-product ordering of occupation tuples
    for the registry's lifetime.  ``total_max`` optionally caps the summed
    excitation across all modes (off by default).
    """

    __slots__ = ("labels", "cutoffs", "total_max", "_index")

    def __init__(
        self,
        labels: Sequence[str],
        n_max: int | Mapping[str, int] = 3,
        total_max: int | None = None,
    ):
        labels = tuple(labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate mode labels in {labels}")
        if isinstance(n_max, Mapping):
            cutoffs = tuple(int(n_max[m]) for m in labels)
        else:
            cutoffs = tuple(int(n_max) for _ in labels)
        if any(c < 1 for c in cutoffs) and labels:
            raise ValueError("every mode needs a cutoff of at least 1")
        if total_max is not None and total_max < 1:
            raise ValueError("total_max must be at least 1 when set")
        self.labels = labels
        self.cutoffs = cutoffs
        self.total_max = total_max
        self._index = {m: i for i, m in enumerate(labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModeRegistry)
            and self.labels == other.labels
            and self.cutoffs == other.cutoffs
            and self.total_max == other.total_max
        )

    def __hash__(self) -> int:
        return hash((self.labels, self.cutoffs, self.total_max))

    def __repr__(self) -> str:
        return f"ModeRegistry({list(self.labels)}, cutoffs={list(self.cutoffs)})"

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown mode {label!r}; registry has {self.labels}") from None

    def cutoff(self, label: str) -> int:
        return self.cutoffs[self.index(label)]

    def subset(self, keep: Iterable[str]) -> "ModeRegistry":
        """Registry restricted to the given labels, preserving order."""
        keep = set(keep)
        labels = [m for m in self.labels if m in keep]
        return ModeRegistry(labels, {m: self.cutoff(m) for m in labels}, self.total_max)

    def validate_occupation(self, occ: Sequence[int]) -> tuple[int, ...]:
        occ = tuple(int(n) for n in occ)
        if len(occ) != len(self.labels):
            raise ValueError(f"occupation {occ} has wrong length for {self!r}")
        for label, n, c in zip(self.labels, occ, self.cutoffs):
            if n < 0:
                raise ValueError(f"negative occupation on mode {label!r}")
            if n > c:
                raise CutoffError(f"occupation {n} exceeds cutoff {c} on mode {label!r}")
        if self.total_max is not None and sum(occ) > self.total_max:
            raise CutoffError(
                f"total excitation {sum(occ)} exceeds the registry cap {self.total_max}"
            )
        return occ


class PureState:
    """Sparse pure state: map from occupation tuples to complex amplitudes.

    Amplitudes with magnitude below ``PRUNE_TOL`` are dropped on construction.
    Instances are immutable by convention; operations return new states.
    """

    __slots__ = ("registry", "_terms")

    def __init__(self, registry: ModeRegistry, terms: Mapping[tuple, complex]):
        self.registry = registry
        pruned = {}
        for occ, amp in terms.items():
            amp = complex(amp)
            if abs(amp) < PRUNE_TOL:
                continue
            pruned[registry.validate_occupation(occ)] = amp
        self._terms = pruned

    @property
    def terms(self) -> dict[tuple, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def amplitude(self, occ: Sequence[int]) -> complex:
        return self._terms.get(tuple(int(n) for n in occ), 0.0 + 0.0j)

    @property
    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self._terms.values())

    @property
    def num_terms(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def normalized(self) -> "PureState":
        n2 = self.norm_squared
        if n2 == 0.0:
            raise NormalizationError("cannot normalize the zero state")
        scale = 1.0 / math.sqrt(n2)
        return PureState(self.registry, {o: a * scale for o, a in self._terms.items()})

    def canonical_phase(self) -> "PureState":
        """Rotate the global phase so the first occupation's amplitude is
        real and positive (first in lexicographic order)."""
        if self.is_zero():
            return self
        lead = self._terms[min(self._terms)]
        phase = lead / abs(lead)
        return PureState(self.registry, {o: a / phase for o, a in self._terms.items()})

    def map_terms(self, fn: Callable[[tuple, complex], Iterable[tuple[tuple, complex]]]) -> "PureState":
        """Rebuild the state by expanding every term through ``fn``."""
        out: dict[tuple, complex] = {}
        for occ, amp in self._terms.items():
            for new_occ, new_amp in fn(occ, amp):
                out[new_occ] = out.get(new_occ, 0.0 + 0.0j) + new_amp
        return PureState(self.registry, out)

    def __repr__(self) -> str:
        return f"PureState({ket_string(self)})"


def ket_string(state: PureState, digits: int = 6) -> str:
    """Deterministic human-readable ket like ``0.707107|01> + 0.707107|10>``."""
    if state.is_zero():
        return "0"
    parts = []
    for occ in sorted(state._terms):
        amp = state._terms[occ]
        ket = "|" + "".join(str(n) for n in occ) + ">"
        if abs(amp - 1.0) < 1e-12:
            parts.append(ket)
            continue
        if abs(amp.imag) < 1e-12:
            coeff = f"{amp.real:.{digits}g}"
        else:
            coeff = f"({amp.real:.{digits}g}{amp.imag:+.{digits}g}j)"
        parts.append(f"{coeff}{ket}")
    return " + ".join(parts)


def basis_state(registry: ModeRegistry, occupations: Mapping[str, int] | Sequence[int]) -> PureState:
    """Single Fock basis ket.  Mappings may omit modes, which default to vacuum."""
    if isinstance(occupations, Mapping):
        unknown = set(occupations) - set(registry.labels)
        if unknown:
            raise KeyError(f"unknown modes {sorted(unknown)}; registry has {registry.labels}")
        occ = tuple(int(occupations.get(m, 0)) for m in registry.labels)
    else:
        occ = tuple(int(n) for n in occupations)
    return PureState(registry, {occ: 1.0 + 0.0j})


def superpose(terms: Iterable[tuple[complex, PureState]]) -> PureState:
    """Linear combination of states sharing one registry."""
    terms = list(terms)
    if not terms:
        raise ValueError("superpose needs at least one term")
    registry = terms[0][1].registry
    out: dict[tuple, complex] = {}
    for coeff, state in terms:
        if state.registry != registry:
            raise RegistryMismatchError("superpose requires a common registry")
        c = complex(coeff)
        for occ, amp in state.items():
            out[occ] = out.get(occ, 0.0 + 0.0j) + c * amp
    return PureState(registry, out)


def inner_product(a: PureState, b: PureState) -> complex:
    """<a|b> over matching occupation tuples."""
    if a.registry != b.registry:
        raise RegistryMismatchError("inner product requires a common registry")
    small, large = (a, b) if a.num_terms <= b.num_terms else (b, a)
    acc = 0.0 + 0.0j
    for occ, amp in small.items():
        other = large._terms.get(occ)
        if other is not None:
            if small is a:
                acc += amp.conjugate() * other
            else:
                acc += other.conjugate() * amp
    return acc


def tensor(a: PureState, b: PureState) -> PureState:
    """Product state on the concatenated registry (labels must be disjoint)."""
    overlap = set(a.registry.labels) & set(b.registry.labels)
    if overlap:
        raise RegistryMismatchError(f"tensor factors share modes {sorted(overlap)}")
    labels = a.registry.labels + b.registry.labels
    cutoffs = dict(zip(a.registry.labels, a.registry.cutoffs))
    cutoffs.update(zip(b.registry.labels, b.registry.cutoffs))
    registry = ModeRegistry(labels, cutoffs)
    out = {}
    for occ_a, amp_a in a.items():
        for occ_b, amp_b in b.items():
            out[occ_a + occ_b] = amp_a * amp_b
    return PureState(registry, out)


class Ensemble:
    """Weighted collection of unit-norm pure branches on one registry.

    Total weight may be below one: sub-normalized ensembles represent
    heralded/conditional states.
    """

    __slots__ = ("registry", "branches")

    def __init__(self, registry: ModeRegistry, branches: Iterable[tuple[float, PureState]]):
        checked = []
        for weight, state in branches:
            weight = float(weight)
            if weight < -NORM_TOL:
                raise ValueError(f"negative branch weight {weight}")
            if weight <= 0.0:
                continue
            if state.registry != registry:
                raise RegistryMismatchError("ensemble branches must share the registry")
            if abs(state.norm_squared - 1.0) > NORM_TOL:
                raise NormalizationError(
                    f"branch norm^2 {state.norm_squared} is not 1 within {NORM_TOL}"
                )
            checked.append((weight, state))
        self.registry = registry
        self.branches = tuple(checked)

    @classmethod
    def from_pure(cls, state: PureState) -> "Ensemble":
        """Ensemble with one branch carrying the state's norm^2 as weight."""
        n2 = state.norm_squared
        if n2 == 0.0:
            return cls(state.registry, [])
        return cls(state.registry, [(n2, state.normalized())])

    @property
    def total_weight(self) -> float:
        return sum(w for w, _ in self.branches)

    @property
    def num_branches(self) -> int:
        return len(self.branches)

    def normalized(self) -> "Ensemble":
        total = self.total_weight
        if total <= 0.0:
            raise NormalizationError("cannot normalize an empty ensemble")
        return Ensemble(self.registry, [(w / total, s) for w, s in self.branches])

    def scaled(self, factor: float) -> "Ensemble":
        return Ensemble(self.registry, [(w * factor, s) for w, s in self.branches])

    def map_pure(self, fn: Callable[[PureState], PureState]) -> "Ensemble":
        """Apply a norm-preserving map branch by branch."""
        mapped = [(w, fn(s)) for w, s in self.branches]
        registry = mapped[0][1].registry if mapped else self.registry
        return Ensemble(registry, [(w, s.normalized()) for w, s in mapped])

    def map_channel(self, fn: Callable[[PureState], "Ensemble"]) -> "Ensemble":
        """Apply a channel (pure state -> ensemble) branch by branch."""
        out = []
        registry = self.registry
        for w, s in self.branches:
            sub = fn(s)
            registry = sub.registry
            out.extend((w * sw, ss) for sw, ss in sub.branches)
        return Ensemble(registry, out)

    def compact(self, tol: float = 1e-12) -> "Ensemble":
        """Merge branches that are the same pure state up to a global phase."""
        reps: list[tuple[float, PureState]] = []
        for w, s in self.branches:
            for i, (rw, rs) in enumerate(reps):
                if abs(abs(inner_product(rs, s)) - 1.0) < tol:
                    reps[i] = (rw + w, rs)
                    break
            else:
                reps.append((w, s.canonical_phase()))
        return Ensemble(self.registry, reps)

    def __repr__(self) -> str:
        body = ", ".join(f"({w:.6g}, {ket_string(s)})" for w, s in self.branches[:4])
        more = "" if self.num_branches <= 4 else f", ... {self.num_branches} branches"
        return f"Ensemble[{body}{more}]"


def as_ensemble(state: PureState | Ensemble) -> Ensemble:
    return state if isinstance(state, Ensemble) else Ensemble.from_pure(state)


def trace_out(state: PureState | Ensemble, modes: Iterable[str]) -> Ensemble:
    """Partial trace over the given modes.

    Amplitudes are grouped by the occupation of the traced modes; each group
    becomes one branch whose weight is the group's norm^2.  The total weight
    equals the input norm^2 (or ensemble weight).
    """
    modes = list(modes)
    ens = as_ensemble(state)
    registry = ens.registry
    traced_idx = sorted(registry.index(m) for m in modes)
    traced_set = set(traced_idx)
    kept_idx = [i for i in range(len(registry)) if i not in traced_set]
    reduced = registry.subset(registry.labels[i] for i in kept_idx)

    out: list[tuple[float, PureState]] = []
    for weight, branch in ens.branches:
        groups: dict[tuple, dict[tuple, complex]] = {}
        for occ, amp in branch.items():
            key = tuple(occ[i] for i in traced_idx)
            kept = tuple(occ[i] for i in kept_idx)
            groups.setdefault(key, {})[kept] = amp
        for key in sorted(groups):
            sub = PureState(reduced, groups[key])
            n2 = sub.norm_squared
            if n2 > 0.0:
                out.append((weight * n2, sub.normalized()))
    return Ensemble(reduced, out)


def drop_vacuum_modes(state: PureState, modes: Iterable[str]) -> PureState:
    """Remove modes that are in the vacuum in every term (e.g. spent pump modes)."""
    modes = list(modes)
    registry = state.registry
    idx = [registry.index(m) for m in modes]
    for occ in state._terms:
        for i in idx:
            if occ[i] != 0:
                raise ValueError(f"mode {registry.labels[i]!r} is not empty; trace it out instead")
    keep = [i for i in range(len(registry)) if i not in set(idx)]
    reduced = registry.subset(registry.labels[i] for i in keep)
    return PureState(reduced, {tuple(occ[i] for i in keep): amp for occ, amp in state.items()})


def fidelity(state: PureState | Ensemble, target: PureState) -> float:
    """sum_i w_i |<target|branch_i>|^2; lies in [0, total weight]."""
    if abs(target.norm_squared - 1.0) > NORM_TOL:
        raise NormalizationError("fidelity target must be normalized")
    ens = as_ensemble(state)
    if ens.registry != target.registry:
        raise RegistryMismatchError("fidelity requires a common registry")
    return sum(w * abs(inner_product(target, s)) ** 2 for w, s in ens.branches)
