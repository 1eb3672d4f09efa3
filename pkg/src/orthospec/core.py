"""Seeded randomness, complex Gaussian signals, and the cosine-similarity metric.

Every random draw in the package flows through `make_rng`, which derives
independent PCG64 substreams from a 64-bit seed and a text label. Identical
(seed, label) pairs give bit-identical streams on any platform.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "make_rng",
    "sample_complex_gaussian",
    "make_signal",
    "cosine_similarity_sq",
    "SignalInstance",
]


def _label_words(label: str):
    # 128-bit hash of the label, split into 32-bit words for SeedSequence entropy
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=16).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]


def make_rng(seed: int, label: str = "") -> np.random.Generator:
    """Deterministic PCG64 generator for a (seed, label) pair.

    The label selects an independent substream: it is hashed (blake2b) and
    mixed into the SeedSequence entropy after the seed. Distinct labels give
    statistically independent streams for the same seed.
    """
    if not (0 <= int(seed) < 2**64):
        raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    entropy = [int(seed)]
    if label:
        entropy.extend(_label_words(label))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def sample_complex_gaussian(rng: np.random.Generator, n: int, variance: float = 1.0):
    """Circularly-symmetric complex Gaussian vector, E|entry|^2 = variance.

    Real and imaginary parts are independent Normal(0, variance/2) draws from
    numpy's ziggurat sampler (`standard_normal`).
    """
    if variance <= 0:
        raise InvalidParameterError(f"variance must be positive, got {variance}")
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


@dataclass(frozen=True)
class SignalInstance:
    """A ground-truth signal together with its measured magnitudes.

    x_star has norm sqrt(n) exactly; z_star = A x_star; y = |z_star|.
    op_id identifies the sensing operator that produced it.
    """

    x_star: np.ndarray
    z_star: np.ndarray
    y: np.ndarray
    op_id: str

    @property
    def n(self) -> int:
        return self.x_star.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[0]

    @property
    def delta(self) -> float:
        """Realized aspect ratio m/n."""
        return self.m / self.n


def make_signal(op, rng: np.random.Generator) -> SignalInstance:
    """Draw an i.i.d. complex Gaussian signal, rescale to ||x|| = sqrt(n), sense it."""
    x = sample_complex_gaussian(rng, op.n)
    x *= np.sqrt(op.n) / np.linalg.norm(x)
    z = op.apply(x)
    return SignalInstance(x_star=x, z_star=z, y=np.abs(z), op_id=op.op_id)


def cosine_similarity_sq(a: np.ndarray, b: np.ndarray) -> float:
    """Squared cosine similarity |<a, b>|^2 / (||a||^2 ||b||^2), in [0, 1].

    Invariant under global phase and positive rescaling of either argument.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidParameterError(f"length mismatch: {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise InvalidParameterError("cosine similarity of a zero vector is undefined")
    val = np.abs(np.vdot(a, b)) ** 2 / (na**2 * nb**2)
    # rounding can push the ratio a hair past 1
    return float(min(val, 1.0))
