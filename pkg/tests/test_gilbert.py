import numpy as np
import pytest

from sepdist import (
    DegenerateError,
    DensityMatrix,
    DimensionError,
    HaltCriteria,
    ParameterError,
    RunState,
    SamplerConfig,
    StateSampler,
    ValidationError,
    bell,
    closure,
    css_ghz,
    css_max_entangled,
    ghz,
    ghz_css_distance,
    hsd_sq,
    is_ppt,
    line_search,
    maximally_mixed,
    party_permutation,
    preselect,
    run,
    step,
)
from conftest import random_density, rng_for

BELL = bell()
MAXMIX = maximally_mixed((2, 2))


def ket00():
    v = np.zeros(4, dtype=complex)
    v[0] = 1.0
    return np.outer(v, v.conj())


class TestHaltCriteria:
    def test_requires_one(self):
        with pytest.raises(ParameterError):
            HaltCriteria()

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            HaltCriteria(max_trials=-1)

    def test_as_dict(self):
        halt = HaltCriteria(max_successes=3, target_d2=0.5)
        assert halt.as_dict() == {"max_successes": 3, "target_d2": 0.5}


class TestPreselect:
    def test_trial_equals_iterate(self):
        assert preselect(BELL, MAXMIX, MAXMIX.mat) == 0.0

    def test_trial_equals_target(self):
        value = preselect(BELL, MAXMIX, BELL.mat)
        assert value == pytest.approx(hsd_sq(BELL, MAXMIX), abs=1e-14)
        assert value > 0

    def test_bell_maxmix_corner_projector(self):
        # oracle: brute-force trace of the product of differences
        r0, r1, r2 = BELL.mat, MAXMIX.mat, ket00()
        brute = np.trace((r2 - r1) @ (r0 - r1)).real
        assert brute == pytest.approx(0.25, abs=1e-14)
        assert preselect(BELL, MAXMIX, r2) == pytest.approx(brute, abs=1e-14)

    def test_dims_mismatch(self):
        with pytest.raises(DimensionError):
            preselect(BELL, maximally_mixed((2, 3)), np.eye(6) / 6)


class TestLineSearch:
    def test_target_equals_iterate(self):
        w, d2 = line_search(BELL, BELL, ket00())
        assert w == 1.0
        assert d2 == pytest.approx(0.0, abs=1e-14)

    def test_target_equals_trial(self):
        w, d2 = line_search(BELL, MAXMIX, BELL.mat)
        assert w == 0.0
        assert d2 == pytest.approx(0.0, abs=1e-14)

    def test_degenerate_direction(self):
        with pytest.raises(DegenerateError):
            line_search(BELL, MAXMIX, MAXMIX.mat)

    @pytest.mark.parametrize("dims", [(2, 2), (3, 3)])
    def test_against_golden_section(self, dims):
        rng = rng_for(99)
        for _ in range(100):
            r0 = random_density(dims, rng)
            r1 = random_density(dims, rng)
            r2 = random_density(dims, rng)
            w, d2 = line_search(r0, r1, r2)
            g = golden_section_quadratic(r0.mat, r1.mat, r2.mat)
            assert w == pytest.approx(g, abs=1e-10)
            assert d2 == pytest.approx(hsd_sq(r0.mat, w * r1.mat + (1 - w) * r2.mat), abs=1e-10)


def golden_section_quadratic(t, a1, a2, lo=0.0, hi=1.0, tol=1e-11):
    """Golden-section minimization of Tr(t - p a1 - (1-p) a2)^2 over p.

    The objective is the scalar quadratic in p; probe points are floats
    (hence exactly representable) and comparisons are done in exact
    rational arithmetic, so the bracket genuinely localizes the minimum
    to ``tol`` without a floating-point noise floor.
    """
    from fractions import Fraction

    da = t - a2
    db = a1 - a2
    aa = Fraction(float(np.vdot(da, da).real))
    ab = Fraction(float(np.vdot(da, db).real))
    bb = Fraction(float(np.vdot(db, db).real))

    def f(p):
        q = Fraction(p)
        return aa - 2 * ab * q + bb * q * q

    ratio = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = f(d)
    return (a + b) / 2


class TestStep:
    def test_separable_target_never_accepts(self):
        state = RunState.initial(css_ghz(3), css_ghz(3))
        sampler = StateSampler(SamplerConfig(seed=4))
        for _ in range(200):
            outcome = step(state, sampler)
            assert not outcome.accepted
            assert outcome.reason == "preselect-failed"
        assert state.trials == 200
        assert state.successes == 0

    def test_accepted_step_decreases_d2(self):
        state = RunState.initial(BELL)
        assert state.d2 == pytest.approx(0.75, abs=1e-14)  # baseline Tr(bell - I/4)^2
        sampler = StateSampler(SamplerConfig(seed=4))
        seen = state.d2
        accepted = 0
        while accepted < 20:
            outcome = step(state, sampler)
            if outcome.accepted:
                accepted += 1
                assert outcome.record.d2 < seen
                seen = outcome.record.d2
        assert state.d2 < 0.75

    def test_counts_trials_on_rejection(self):
        state = RunState.initial(BELL)
        sampler = StateSampler(SamplerConfig(seed=4))
        before = state.trials
        step(state, sampler)
        assert state.trials == before + 1

    def test_step_with_group_keeps_iterate_invariant(self):
        group = closure([party_permutation((1, 0), (2, 2))], (2, 2))
        state = RunState.initial(BELL, group=group)
        sampler = StateSampler(SamplerConfig(seed=4))
        swap = group.elements[1]
        accepted = 0
        while accepted < 5:
            if step(state, sampler).accepted:
                accepted += 1
                moved = swap @ state.approx.mat @ swap.conj().T
                assert np.abs(moved - state.approx.mat).max() <= 1e-12


class TestRun:
    def test_bell_reaches_its_limit(self):
        result = run(BELL, HaltCriteria(max_successes=1000), config=SamplerConfig(seed=7))
        assert 1 / 3 <= result.state.d2 <= 1 / 3 + 0.01

    def test_trace_monotone_and_counters_increase(self):
        result = run(BELL, HaltCriteria(max_successes=300), config=SamplerConfig(seed=3))
        trace = result.trace
        assert len(trace) == 300
        assert all(a.d2 > b.d2 for a, b in zip(trace, trace[1:]))
        assert all(a.trials < b.trials for a, b in zip(trace, trace[1:]))
        assert all(a.successes < b.successes for a, b in zip(trace, trace[1:]))

    def test_d2_matches_full_recomputation(self):
        result = run(BELL, HaltCriteria(max_successes=300), config=SamplerConfig(seed=3))
        assert abs(result.state.d2 - hsd_sq(result.state.target, result.state.approx)) <= 1e-10

    def test_upper_bound_soundness(self):
        result = run(ghz(3), HaltCriteria(max_successes=400), config=SamplerConfig(seed=5))
        floor = ghz_css_distance(3)
        assert all(rec.d2 >= floor - 1e-9 for rec in result.trace)

    def test_iterate_stays_physical_and_ppt(self):
        result = run(BELL, HaltCriteria(max_successes=500), config=SamplerConfig(seed=9))
        approx = result.state.approx
        assert np.abs(approx.mat - approx.mat.conj().T).max() <= 1e-12
        assert abs(np.trace(approx.mat) - 1.0) <= 1e-10
        assert np.linalg.eigvalsh(approx.mat)[0] >= -1e-9
        assert is_ppt(approx, tol=1e-9)

    def test_seeded_reproducibility(self):
        a = run(BELL, HaltCriteria(max_successes=200), config=SamplerConfig(seed=21))
        b = run(BELL, HaltCriteria(max_successes=200), config=SamplerConfig(seed=21))
        assert a.trace == b.trace
        assert np.array_equal(a.state.approx.mat, b.state.approx.mat)

    def test_trial_budget_is_exact(self):
        result = run(BELL, HaltCriteria(max_trials=5000), config=SamplerConfig(seed=2))
        assert result.state.trials == 5000

    def test_distance_halt(self):
        result = run(BELL, HaltCriteria(target_d2=0.5, max_trials=10**6), config=SamplerConfig(seed=2))
        assert result.state.d2 <= 0.5

    def test_stall_halt_on_separable_target(self):
        target = css_max_entangled(2)
        result = run(target, HaltCriteria(stall_trials=500), init=target, config=SamplerConfig(seed=2))
        assert result.state.trials == 500
        assert result.state.successes == 0

    def test_own_css_as_target_accepts_nothing(self):
        target = css_ghz(4)
        result = run(target, HaltCriteria(max_trials=2000), init=target, config=SamplerConfig(seed=2))
        assert result.state.successes == 0
        assert result.state.d2 == 0.0

    def test_group_run_converges(self):
        group = closure([party_permutation((1, 0), (2, 2))], (2, 2))
        result = run(BELL, HaltCriteria(max_successes=300), group=group, config=SamplerConfig(seed=7))
        assert result.state.d2 < 0.345
        assert all(a.d2 > b.d2 for a, b in zip(result.trace, result.trace[1:]))

    def test_threads_smoke(self):
        result = run(BELL, HaltCriteria(max_successes=150), config=SamplerConfig(seed=31), threads=2)
        state = result.state
        assert state.successes == 150
        assert state.trials >= state.successes
        assert all(a.d2 > b.d2 for a, b in zip(result.trace, result.trace[1:]))
        assert abs(state.d2 - hsd_sq(state.target, state.approx)) <= 1e-10
        assert 1 / 3 - 1e-9 <= state.d2 <= 0.75

    def test_threads_trial_budget(self):
        result = run(BELL, HaltCriteria(max_trials=4000), config=SamplerConfig(seed=31), threads=3)
        assert result.state.trials == 4000

    def test_invalid_target_rejected(self):
        bad = DensityMatrix((2, 2), np.diag([0.7, 0.5, -0.1, -0.1]).astype(complex))
        with pytest.raises(ValidationError):
            run(bad, HaltCriteria(max_trials=10), config=SamplerConfig(seed=0))

    def test_init_dims_mismatch(self):
        with pytest.raises(DimensionError):
            run(BELL, HaltCriteria(max_trials=10), init=maximally_mixed((2, 3)), config=SamplerConfig(seed=0))

    def test_sampler_and_config_conflict(self):
        with pytest.raises(ParameterError):
            run(
                BELL,
                HaltCriteria(max_trials=10),
                config=SamplerConfig(seed=0),
                sampler=StateSampler(SamplerConfig(seed=0)),
            )
