"""Random-direction conditional-gradient iteration toward the separable set.

Each trial draws a random pure product state, keeps it only if the linear
functional Tr[(trial - approx)(target - approx)] is positive (a positive
value guarantees some admixture strictly shrinks the squared distance),
optionally symmetrizes it over an attached group, solves the exact
one-dimensional line search in closed form, and mixes it into the running
separable approximation.  The squared distance d2 is therefore a
monotonically improving upper bound on the distance between the target
and the separable set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateError, DimensionError, ParameterError
from .linalg import DensityMatrix, as_matrix, assert_valid_density, hermitize, maximally_mixed
from .states import SamplerConfig, StateSampler
from .symmetry import SymmetryGroup, twirl, twirl_pure

DEGENERATE_TOL = 1e-14

REJECT_PRESELECT = "preselect-failed"
REJECT_RANGE = "p-out-of-range"
REJECT_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class HaltCriteria:
    """Stop conditions for a run; at least one must be set.

    ``stall_trials`` counts trials since the last accepted correction and
    guarantees termination on (nearly) separable targets.
    """

    max_successes: Optional[int] = None
    max_trials: Optional[int] = None
    target_d2: Optional[float] = None
    stall_trials: Optional[int] = None

    def __post_init__(self):
        values = (self.max_successes, self.max_trials, self.target_d2, self.stall_trials)
        if all(v is None for v in values):
            raise ParameterError("at least one halt criterion must be set")
        for name in ("max_successes", "max_trials", "stall_trials"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ParameterError(f"{name} must be nonnegative, got {v}")
        if self.target_d2 is not None and self.target_d2 < 0:
            raise ParameterError(f"target_d2 must be nonnegative, got {self.target_d2}")

    def as_dict(self) -> dict:
        return {
            k: v
            for k, v in (
                ("max_successes", self.max_successes),
                ("max_trials", self.max_trials),
                ("target_d2", self.target_d2),
                ("stall_trials", self.stall_trials),
            )
            if v is not None
        }


class TraceRecord(NamedTuple):
    trials: int
    successes: int
    d2: float


@dataclass
class RunState:
    """Mutable run state: the target, the separable iterate, counters, log."""

    target: DensityMatrix
    approx: DensityMatrix
    d2: float
    trials: int = 0
    successes: int = 0
    group: Optional[SymmetryGroup] = None
    trace: list[TraceRecord] = field(default_factory=list)

    @classmethod
    def initial(
        cls,
        target: DensityMatrix,
        approx: Optional[DensityMatrix] = None,
        group: Optional[SymmetryGroup] = None,
    ) -> "RunState":
        assert_valid_density(target)
        if approx is None:
            approx = maximally_mixed(target.dims)
        if approx.dims != target.dims:
            raise DimensionError(f"initial state dims {approx.dims} differ from target dims {target.dims}")
        assert_valid_density(approx)
        if group is not None:
            if group.dims != target.dims:
                raise DimensionError(f"group dims {group.dims} differ from target dims {target.dims}")
            approx = twirl(approx, group)
        diff = target.mat - approx.mat
        return cls(target=target, approx=approx, d2=float(np.vdot(diff, diff).real), group=group)


@dataclass(frozen=True)
class StepOutcome:
    accepted: bool
    record: Optional[TraceRecord] = None
    reason: Optional[str] = None


@dataclass(frozen=True)
class RunResult:
    state: RunState
    trace: list[TraceRecord]
    wall_seconds: float


def preselect(target, approx, trial) -> float:
    """Value of Tr[(trial - approx)(target - approx)]; accept when positive."""
    if isinstance(target, DensityMatrix) and isinstance(approx, DensityMatrix) and target.dims != approx.dims:
        raise DimensionError(f"dims mismatch: {target.dims} vs {approx.dims}")
    t, a, r = as_matrix(target), as_matrix(approx), as_matrix(trial)
    if not (t.shape == a.shape == r.shape):
        raise DimensionError(f"shape mismatch: {t.shape}, {a.shape}, {r.shape}")
    return float(np.vdot(r - a, t - a).real)


def _line_search_raw(mu00: float, mu01: float, mu11: float, q0: float, q1: float, s2: float):
    """Inner products of the quadratic d2(w) = aa - 2 w ab + w^2 bb.

    ``mu..`` are the cached pairwise inner products of (target, approx),
    ``q0``/``q1`` the trial's overlaps with target/approx, ``s2`` the
    trial's purity.  Returns (aa, ab, bb).
    """
    aa = mu00 - 2.0 * q0 + s2
    ab = mu01 - q0 - q1 + s2
    bb = mu11 - 2.0 * q1 + s2
    return aa, ab, bb


def line_search(target, approx, trial) -> tuple[float, float]:
    """Exact minimizer of d2 over mixtures w*approx + (1-w)*trial.

    Returns the weight clamped to [0, 1] and the squared distance at the
    clamped weight, evaluated by quadratic expansion.
    """
    t, a, r = as_matrix(target), as_matrix(approx), as_matrix(trial)
    if not (t.shape == a.shape == r.shape):
        raise DimensionError(f"shape mismatch: {t.shape}, {a.shape}, {r.shape}")
    mu00 = float(np.vdot(t, t).real)
    mu01 = float(np.vdot(t, a).real)
    mu11 = float(np.vdot(a, a).real)
    q0 = float(np.vdot(t, r).real)
    q1 = float(np.vdot(a, r).real)
    s2 = float(np.vdot(r, r).real)
    aa, ab, bb = _line_search_raw(mu00, mu01, mu11, q0, q1, s2)
    if bb < DEGENERATE_TOL:
        raise DegenerateError("approx and trial coincide; line search direction is degenerate")
    w = min(1.0, max(0.0, ab / bb))
    return w, aa - 2.0 * w * ab + w * w * bb


def _decide(mu00, mu01, mu11, q0, q1, s2, d2):
    """Acceptance decision for one trial given cached inner products.

    Returns (reason, weight, new_d2); reason is None on acceptance.  The
    unclamped minimizer must land in [0, 1] and the new distance must be a
    strict float improvement (guards the monotone trace against roundoff).
    """
    f = q0 - q1 - mu01 + mu11
    if not f > 0.0:
        return REJECT_PRESELECT, None, None
    aa, ab, bb = _line_search_raw(mu00, mu01, mu11, q0, q1, s2)
    if bb < DEGENERATE_TOL:
        return REJECT_DEGENERATE, None, None
    w = ab / bb
    if not 0.0 <= w <= 1.0:
        return REJECT_RANGE, None, None
    new_d2 = aa - ab * ab / bb
    if not new_d2 < d2:
        return REJECT_DEGENERATE, None, None
    return None, w, new_d2


def step(state: RunState, sampler: StateSampler) -> StepOutcome:
    """One trial: draw, preselect, optionally twirl, line-search, update.

    Always increments the trial counter; on acceptance updates the
    iterate, the distance and the trace.  This is the single-trial
    reference path; :func:`run` batches the same arithmetic.
    """
    state.trials += 1
    dims = state.target.dims
    t = state.target.mat
    a = state.approx.mat
    mu00 = float(np.vdot(t, t).real)
    mu01 = float(np.vdot(t, a).real)
    mu11 = float(np.vdot(a, a).real)

    ket = sampler.product_kets(dims, 1)[0]
    q0 = float(np.vdot(ket, t @ ket).real)
    q1 = float(np.vdot(ket, a @ ket).real)
    if not q0 - q1 - mu01 + mu11 > 0.0:
        return StepOutcome(False, reason=REJECT_PRESELECT)

    if state.group is not None:
        trial_mat = twirl_pure(ket, state.group)
        q0 = float(np.vdot(t, trial_mat).real)
        q1 = float(np.vdot(a, trial_mat).real)
        s2 = float(np.vdot(trial_mat, trial_mat).real)
    else:
        trial_mat = np.outer(ket, ket.conj())
        s2 = 1.0

    reason, w, new_d2 = _decide(mu00, mu01, mu11, q0, q1, s2, state.d2)
    if reason is not None:
        return StepOutcome(False, reason=reason)

    new_mat = w * a + (1.0 - w) * trial_mat
    state.approx = DensityMatrix(dims, new_mat)
    state.d2 = new_d2
    state.successes += 1
    record = TraceRecord(state.trials, state.successes, new_d2)
    state.trace.append(record)
    return StepOutcome(True, record=record)


class _Halt:
    """Incremental halt bookkeeping shared by the run loops."""

    def __init__(self, halt: HaltCriteria, state: RunState):
        self.halt = halt
        self.state = state
        self.last_success_trials = state.trials
        self.done = self._distance_hit() or self._success_hit()

    def _distance_hit(self) -> bool:
        return self.halt.target_d2 is not None and self.state.d2 <= self.halt.target_d2

    def _success_hit(self) -> bool:
        return self.halt.max_successes is not None and self.state.successes >= self.halt.max_successes

    def rejection_budget(self, wanted: int) -> int:
        """How many consecutive rejected trials may be consumed before halting."""
        allowed = wanted
        if self.halt.max_trials is not None:
            allowed = min(allowed, self.halt.max_trials - self.state.trials)
        if self.halt.stall_trials is not None:
            stall_left = self.halt.stall_trials - (self.state.trials - self.last_success_trials)
            allowed = min(allowed, stall_left)
        return max(allowed, 0)

    def consume_rejections(self, count: int, wanted: int) -> None:
        self.state.trials += count
        if count < wanted:
            self.done = True
        elif self.rejection_budget(1) == 0:
            self.done = True

    def can_consume_one(self) -> bool:
        return self.halt.max_trials is None or self.state.trials < self.halt.max_trials

    def note_success(self) -> None:
        self.last_success_trials = self.state.trials
        if self._distance_hit() or self._success_hit():
            self.done = True


def run(
    target: DensityMatrix,
    halt: HaltCriteria,
    *,
    init: Optional[DensityMatrix] = None,
    group: Optional[SymmetryGroup] = None,
    config: Optional[SamplerConfig] = None,
    sampler: Optional[StateSampler] = None,
    threads: int = 1,
    refresh_every: int = 1024,
    min_batch: int = 64,
    max_batch: int = 8192,
) -> RunResult:
    """Iterate trials until a halt criterion fires.

    ``init`` defaults to the maximally mixed state; when a group is given
    the initial iterate is twirled once up front and every preselected
    trial is twirled (with the preselection functional re-checked on the
    symmetrized trial).  Deterministic for a fixed sampler seed when
    ``threads == 1``.
    """
    if sampler is None:
        sampler = StateSampler(config if config is not None else SamplerConfig())
    elif config is not None:
        raise ParameterError("pass either a sampler or a config, not both")
    state = RunState.initial(target, init, group)
    begin = time.perf_counter()
    if threads <= 1:
        _run_sequential(state, sampler, halt, refresh_every, min_batch, max_batch)
    else:
        _run_speculative(state, sampler, halt, threads, refresh_every, max_batch)
    return RunResult(state, state.trace, time.perf_counter() - begin)


def _quad_forms(mat: np.ndarray, kets: np.ndarray) -> np.ndarray:
    """Row-wise <k| M |k> for a stack of kets (real for Hermitian M)."""
    return np.einsum("ni,ni->n", kets.conj() @ mat, kets).real


class _Engine:
    """Cached inner products and update arithmetic for the run loops."""

    def __init__(self, state: RunState, refresh_every: int):
        self.state = state
        self.refresh_every = refresh_every
        self.tmat = np.ascontiguousarray(state.target.mat)
        self.amat = np.array(state.approx.mat, copy=True)
        self.mu00 = float(np.vdot(self.tmat, self.tmat).real)
        self.refresh()

    def refresh(self) -> None:
        self.amat = hermitize(self.amat)
        self.mu01 = float(np.vdot(self.tmat, self.amat).real)
        self.mu11 = float(np.vdot(self.amat, self.amat).real)
        exact = self.mu00 - 2.0 * self.mu01 + self.mu11
        # Keep the logged distances monotone: drift corrections may not move d2 up.
        self.state.d2 = min(self.state.d2, exact) if self.state.trace else exact

    def trial_quantities(self, ket: np.ndarray, q0: float, q1: float):
        """Final (q0, q1, purity, trial matrix) after optional twirling."""
        if self.state.group is None:
            return q0, q1, 1.0, None
        trial_mat = twirl_pure(ket, self.state.group)
        return (
            float(np.vdot(self.tmat, trial_mat).real),
            float(np.vdot(self.amat, trial_mat).real),
            float(np.vdot(trial_mat, trial_mat).real),
            trial_mat,
        )

    def try_accept(self, ket: np.ndarray, q0: float, q1: float) -> bool:
        q0, q1, s2, trial_mat = self.trial_quantities(ket, q0, q1)
        reason, w, new_d2 = _decide(self.mu00, self.mu01, self.mu11, q0, q1, s2, self.state.d2)
        if reason is not None:
            return False
        self.amat *= w
        if trial_mat is None:
            self.amat += (1.0 - w) * np.outer(ket, ket.conj())
        else:
            self.amat += (1.0 - w) * trial_mat
        self.mu01 = w * self.mu01 + (1.0 - w) * q0
        self.mu11 = w * w * self.mu11 + 2.0 * w * (1.0 - w) * q1 + (1.0 - w) ** 2 * s2
        self.state.d2 = new_d2
        self.state.successes += 1
        if self.state.successes % self.refresh_every == 0:
            self.refresh()
        self.state.trace.append(TraceRecord(self.state.trials, self.state.successes, self.state.d2))
        return True

    def finalize(self) -> None:
        self.refresh()
        self.state.approx = DensityMatrix(self.state.target.dims, self.amat)


def _run_sequential(state, sampler, halt, refresh_every, min_batch, max_batch):
    engine = _Engine(state, refresh_every)
    control = _Halt(halt, state)
    dims = state.target.dims
    batch = min_batch
    while not control.done:
        want = batch
        if halt.max_trials is not None:
            want = min(want, halt.max_trials - state.trials)
        if halt.stall_trials is not None:
            stall_left = halt.stall_trials - (state.trials - control.last_success_trials)
            want = min(want, max(stall_left, 1))
        if want <= 0:
            break
        kets = sampler.product_kets(dims, want)
        q0s = _quad_forms(engine.tmat, kets)
        q1s = _quad_forms(engine.amat, kets)
        candidates = np.flatnonzero(q0s - q1s - engine.mu01 + engine.mu11 > 0.0)
        cursor = 0
        accepted_any = False
        for idx in candidates:
            gap = int(idx) - cursor
            if gap:
                allowed = control.rejection_budget(gap)
                control.consume_rejections(allowed, gap)
                cursor += allowed
                if control.done:
                    break
            if not control.can_consume_one():
                control.done = True
                break
            state.trials += 1
            cursor += 1
            if engine.try_accept(kets[idx], float(q0s[idx]), float(q1s[idx])):
                accepted_any = True
                control.note_success()
                break  # iterate moved; the rest of the batch is stale
            if control.rejection_budget(1) == 0:
                control.done = True
                break
        else:
            tail = want - cursor
            if tail:
                allowed = control.rejection_budget(tail)
                control.consume_rejections(allowed, tail)
        batch = min_batch if accepted_any else min(batch * 2, max_batch)
    engine.finalize()


def _run_speculative(state, sampler, halt, threads, refresh_every, max_batch):
    """Parallel trial speculation with serialized acceptance.

    Workers draw and preselect trial batches against a snapshot of the
    iterate; the main thread re-verifies every candidate against the
    current iterate before accepting.  Stale candidates that fail the
    re-check count as ordinary rejected trials.
    """
    from concurrent.futures import ThreadPoolExecutor

    engine = _Engine(state, refresh_every)
    control = _Halt(halt, state)
    dims = state.target.dims
    workers = sampler.spawn(threads)
    per_worker = max(256, max_batch // threads)

    def speculate(worker, snapshot, snap_mu01, snap_mu11):
        kets = worker.product_kets(dims, per_worker)
        q0s = _quad_forms(engine.tmat, kets)
        q1s = _quad_forms(snapshot, kets)
        flags = q0s - q1s - snap_mu01 + snap_mu11 > 0.0
        return kets, q0s, flags

    with ThreadPoolExecutor(max_workers=threads) as pool:
        while not control.done:
            snapshot = engine.amat.copy()
            futures = [pool.submit(speculate, w, snapshot, engine.mu01, engine.mu11) for w in workers]
            for fut in futures:
                kets, q0s, flags = fut.result()
                if control.done:
                    continue  # drain remaining futures without consuming trials
                cursor = 0
                for idx in np.flatnonzero(flags):
                    gap = int(idx) - cursor
                    if gap:
                        allowed = control.rejection_budget(gap)
                        control.consume_rejections(allowed, gap)
                        cursor += allowed
                        if control.done:
                            break
                    if not control.can_consume_one():
                        control.done = True
                        break
                    state.trials += 1
                    cursor += 1
                    ket = kets[idx]
                    q1 = float(np.vdot(ket, engine.amat @ ket).real)  # re-verified vs current iterate
                    if engine.try_accept(ket, float(q0s[idx]), q1):
                        control.note_success()
                        if control.done:
                            break
                    elif control.rejection_budget(1) == 0:
                        control.done = True
                        break
                else:
                    tail = per_worker - cursor
                    if tail:
                        allowed = control.rejection_budget(tail)
                        control.consume_rejections(allowed, tail)
    engine.finalize()
