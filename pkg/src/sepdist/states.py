"""Random product-state sampling and reference states.

The sampler draws pure states with the unitarily invariant measure (the
one induced by the Hilbert-Schmidt metric), either from paired Gaussian
deviates or from the polar Box-Muller recipe.  Real-amplitude sampling is
an explicit opt-in: for targets such as the two-qubit maximally entangled
state it converges to the wrong limit, which is exactly what the
``real_limit_bell`` reference matrix documents.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import ParameterError
from .linalg import DensityMatrix, maximally_mixed, pure_density

MODES = ("complex", "real")
SOURCES = ("gaussian", "box-muller")


@dataclass(frozen=True)
class SamplerConfig:
    mode: str = "complex"
    source: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.source not in SOURCES:
            raise ParameterError(f"source must be one of {SOURCES}, got {self.source!r}")


def box_muller_complex(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Normally distributed complex deviate exp(2 pi i x1) sqrt(-2 ln x2).

    ``x1`` is uniform on [0, 1), ``x2`` uniform on (0, 1]; at x2 = 1 the
    deviate is exactly zero.
    """
    return np.exp(2j * np.pi * np.asarray(x1)) * np.sqrt(-2.0 * np.log(np.asarray(x2)))


def box_muller_real(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Real normal deviate sqrt(-2 ln x2) cos(2 pi x1)."""
    return np.sqrt(-2.0 * np.log(np.asarray(x2))) * np.cos(2 * np.pi * np.asarray(x1))


class StateSampler:
    """Seeded source of random pure states and pure product states.

    Each sampler owns its own PCG64 stream; identical configuration and
    call sequence reproduce identical output bit for bit.  ``spawn``
    derives independent child streams for parallel speculation.
    """

    def __init__(self, config: SamplerConfig | None = None, *, _seed_seq=None):
        self.config = config if config is not None else SamplerConfig()
        self._seed_seq = _seed_seq if _seed_seq is not None else np.random.SeedSequence(self.config.seed)
        self._rng = np.random.Generator(np.random.PCG64(self._seed_seq))

    def spawn(self, count: int) -> list["StateSampler"]:
        return [StateSampler(self.config, _seed_seq=child) for child in self._seed_seq.spawn(count)]

    def _raw_amplitudes(self, d: int, count: int) -> np.ndarray:
        cfg = self.config
        if cfg.source == "gaussian":
            if cfg.mode == "complex":
                pairs = self._rng.standard_normal((count, d, 2))
                return pairs[..., 0] + 1j * pairs[..., 1]
            return self._rng.standard_normal((count, d)).astype(complex)
        x1 = self._rng.random((count, d))
        x2 = 1.0 - self._rng.random((count, d))  # uniform on (0, 1], avoids log(0)
        if cfg.mode == "complex":
            return box_muller_complex(x1, x2)
        return box_muller_real(x1, x2).astype(complex)

    def pure_batch(self, d: int, count: int) -> np.ndarray:
        """``count`` unit-norm state vectors of dimension ``d``, one per row."""
        if d < 2:
            raise ParameterError(f"state dimension must be >= 2, got {d}")
        if count < 1:
            raise ParameterError(f"count must be >= 1, got {count}")
        amps = self._raw_amplitudes(d, count)
        norms = np.linalg.norm(amps, axis=1)
        bad = norms < 1e-150
        while np.any(bad):  # astronomically rare, but log(1.0) inputs can stack up
            redraw = self._raw_amplitudes(d, int(bad.sum()))
            amps[bad] = redraw
            norms = np.linalg.norm(amps, axis=1)
            bad = norms < 1e-150
        return amps / norms[:, None]

    def pure(self, d: int) -> np.ndarray:
        return self.pure_batch(d, 1)[0]

    def product_kets(self, dims, count: int) -> np.ndarray:
        """``count`` product-state vectors on the given parties, one per row."""
        dims = tuple(int(d) for d in dims)
        kets = self.pure_batch(dims[0], count)
        for d in dims[1:]:
            factor = self.pure_batch(d, count)
            kets = np.einsum("ni,nj->nij", kets, factor).reshape(count, -1)
        return kets

    def product(self, dims) -> DensityMatrix:
        """A random pure product state as a rank-1 density matrix."""
        return pure_density(self.product_kets(dims, 1)[0], dims)


# ---------------------------------------------------------------------------
# Reference states.  Entries are written as exact rationals in double
# precision (not via normalized outer products) so tests can compare
# matrices bit for bit.
# ---------------------------------------------------------------------------


def max_entangled(d: int) -> DensityMatrix:
    """Projector onto (1/sqrt(d)) sum_i |i,i> on two d-dimensional parties."""
    if d < 2:
        raise ParameterError(f"local dimension must be >= 2, got {d}")
    mat = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            mat[i * d + i, j * d + j] = 1.0 / d
    return DensityMatrix((d, d), mat)


def css_max_entangled(d: int) -> DensityMatrix:
    """Closest separable state to ``max_entangled(d)``.

    The mixture of the entangled projector (weight 1/(d+1)) with white
    noise (weight d/(d+1)); the squared distance to it is (d-1)/(d+1).
    """
    if d < 2:
        raise ParameterError(f"local dimension must be >= 2, got {d}")
    mat = (1.0 / (d + 1)) * max_entangled(d).mat
    mat += (d / (d + 1)) * np.eye(d * d, dtype=complex) / (d * d)
    return DensityMatrix((d, d), mat)


def bell() -> DensityMatrix:
    """The two-qubit maximally entangled state."""
    return max_entangled(2)


def ghz(n: int) -> DensityMatrix:
    """Projector onto (|0...0> + |1...1>)/sqrt(2) on n qubits."""
    if n < 2:
        raise ParameterError(f"party count must be >= 2, got {n}")
    total = 2**n
    mat = np.zeros((total, total), dtype=complex)
    for r in (0, total - 1):
        for c in (0, total - 1):
            mat[r, c] = 0.5
    return DensityMatrix((2,) * n, mat)


def ghz_css_weight(n: int) -> float:
    """Mixing weight of the corner-diagonal component in the GHZ closest separable state."""
    if n < 2:
        raise ParameterError(f"party count must be >= 2, got {n}")
    return (2**n - 2) ** 2 / (4 + 4**n - 2 ** (n + 1))


def css_ghz(n: int) -> DensityMatrix:
    """Closest separable state to the n-qubit GHZ state.

    Mixes the diagonal corner state (1/2 on the first and last diagonal
    entries) with the state that has 2^-n on the full diagonal plus the
    two far corners, using :func:`ghz_css_weight`.
    """
    if n < 2:
        raise ParameterError(f"party count must be >= 2, got {n}")
    total = 2**n
    corner_diag = np.zeros((total, total), dtype=complex)
    corner_diag[0, 0] = corner_diag[-1, -1] = 0.5
    flat = np.eye(total, dtype=complex)
    flat[0, -1] = flat[-1, 0] = 1.0
    flat /= total
    # Both weights as exact integer ratios: the complement reduces to
    # 2^(n+1)/denominator, which keeps css_ghz(2) bit-identical to the
    # two-qubit Werner state.
    denominator = 4 + 4**n - 2 ** (n + 1)
    x = (2**n - 2) ** 2 / denominator
    complement = 2 ** (n + 1) / denominator
    return DensityMatrix((2,) * n, x * corner_diag + complement * flat)


def ghz_css_distance(n: int) -> float:
    """Closed-form squared distance between the n-qubit GHZ state and its CSS."""
    if n < 2:
        raise ParameterError(f"party count must be >= 2, got {n}")
    return (2**n - 2) / (-4 + 2 ** (3 - n) + 2 ** (n + 1))


def upb_tiles_vectors() -> list[np.ndarray]:
    """The five orthonormal Tiles product vectors."""
    s = 1.0 / np.sqrt(2.0)
    e = [np.eye(3, dtype=complex)[i] for i in range(3)]
    uniform = e[0] + e[1] + e[2]
    return [
        np.kron(e[0], (e[0] - e[1]) * s),
        np.kron(e[2], (e[1] - e[2]) * s),
        np.kron((e[0] - e[1]) * s, e[2]),
        np.kron((e[1] - e[2]) * s, e[0]),
        np.kron(uniform, uniform) / 3.0,
    ]


def upb_tiles_state() -> DensityMatrix:
    """The two-qutrit bound entangled state from the Tiles unextendible product basis.

    The five tiles vectors are mutually orthonormal product states whose
    orthocomplement contains no product vector; the normalized projector
    onto that complement is entangled yet has positive partial transpose.
    """
    mat = np.eye(9, dtype=complex)
    for v in upb_tiles_vectors():
        mat -= np.outer(v, v.conj())
    return DensityMatrix((3, 3), mat / 4.0)


def real_limit_bell() -> DensityMatrix:
    """Limit of the algorithm on the Bell target when trial states are kept real.

    A valid separable state, but not the closest one: its squared distance
    to the Bell state is 3/8 instead of the true 1/3.
    """
    mat = np.array(
        [[3, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 3]],
        dtype=complex,
    ) / 8.0
    return DensityMatrix((2, 2), mat)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed random unitary via QR with phase fixing."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


_FIXED_NAMES = {
    "bell": bell,
    "upb_tiles": upb_tiles_state,
    "real_limit_bell": real_limit_bell,
}

_PARAMETRIC_NAMES = {
    "max_entangled": max_entangled,
    "max_entangled_css": css_max_entangled,
    "ghz": ghz,
    "ghz_css": css_ghz,
}


def named_state(name: str) -> DensityMatrix:
    """Resolve a state name such as ``bell``, ``ghz:3`` or ``max_entangled_css:2``."""
    name = name.strip()
    if name in _FIXED_NAMES:
        return _FIXED_NAMES[name]()
    if ":" in name:
        head, _, arg = name.partition(":")
        if head in _PARAMETRIC_NAMES:
            try:
                value = int(arg)
            except ValueError:
                raise ParameterError(f"bad parameter {arg!r} in state name {name!r}") from None
            return _PARAMETRIC_NAMES[head](value)
    raise ParameterError(f"unknown state name {name!r}")


__all__ = [
    "SamplerConfig",
    "StateSampler",
    "box_muller_complex",
    "box_muller_real",
    "max_entangled",
    "css_max_entangled",
    "bell",
    "ghz",
    "css_ghz",
    "ghz_css_weight",
    "ghz_css_distance",
    "upb_tiles_state",
    "upb_tiles_vectors",
    "real_limit_bell",
    "haar_unitary",
    "maximally_mixed",
    "named_state",
]
