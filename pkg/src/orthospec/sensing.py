"""Column-orthogonal sensing operators: Haar, coded diffraction, partial DFT.

All three ensembles satisfy A^H A = I_n with m > n. Haar is stored dense (no
fast transform exists); the two DFT ensembles are matrix-free and apply in
O(m log m) via the unitary FFT (norm="ortho"). Mixed-radix sizes are fine,
numpy's FFT handles any length.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .core import make_rng
from .errors import InvalidParameterError

__all__ = [
    "SensingOperator",
    "SensingSpec",
    "build_haar",
    "build_cdp",
    "build_partial_dft",
]

HAAR_M_CAP = 20000  # dense payload guard


def _check_vector(v, length, what):
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != length:
        raise InvalidParameterError(f"{what} must be a vector of length {length}, got shape {v.shape}")
    return v.astype(np.complex128, copy=False)


class SensingOperator:
    """Matrix-free A in C^{m x n} with apply / apply_adjoint.

    Instances are immutable after construction and safe to share. `seed` is
    the construction seed when the operator was built from a SensingSpec,
    else None (then the descriptor is unavailable).
    """

    kind = "base"

    def __init__(self, m, n, seed=None, blocks=None):
        if m <= n:
            raise InvalidParameterError(f"need m > n, got m={m}, n={n}")
        self.m = int(m)
        self.n = int(n)
        self.seed = seed
        self.blocks = blocks

    @property
    def delta(self) -> float:
        """Realized aspect ratio m/n."""
        return self.m / self.n

    @property
    def op_id(self) -> str:
        if self.seed is not None:
            return f"{self.kind}:{self.m}x{self.n}:seed={self.seed}"
        return f"{self.kind}:{self.m}x{self.n}:payload={self._payload_digest()}"

    def _payload_digest(self):
        raise NotImplementedError

    def apply(self, x):
        """Return A x."""
        raise NotImplementedError

    def apply_adjoint(self, z):
        """Return A^H z."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        """JSON-ready descriptor; payloads are regenerated from the seed."""
        if self.seed is None:
            raise InvalidParameterError("operator was built from a bare rng; no seed to serialize")
        d = {"kind": self.kind, "m": self.m, "n": self.n, "seed": int(self.seed)}
        if self.blocks is not None:
            d["blocks"] = int(self.blocks)
        return d


class HaarOperator(SensingOperator):
    kind = "haar"

    def __init__(self, matrix, seed=None):
        m, n = matrix.shape
        super().__init__(m, n, seed=seed)
        self._a = matrix

    def _payload_digest(self):
        return hashlib.blake2b(self._a.tobytes(), digest_size=8).hexdigest()

    def apply(self, x):
        x = _check_vector(x, self.n, "x")
        return self._a @ x

    def apply_adjoint(self, z):
        z = _check_vector(z, self.m, "z")
        return self._a.conj().T @ z


class CDPOperator(SensingOperator):
    kind = "cdp"

    def __init__(self, phases, seed=None):
        L, n = phases.shape
        super().__init__(L * n, n, seed=seed, blocks=L)
        self._phases = phases
        self._scale = 1.0 / math.sqrt(L)

    def _payload_digest(self):
        return hashlib.blake2b(self._phases.tobytes(), digest_size=8).hexdigest()

    def apply(self, x):
        x = _check_vector(x, self.n, "x")
        blocks = np.fft.fft(self._phases * x[None, :], axis=1, norm="ortho")
        return self._scale * blocks.ravel()

    def apply_adjoint(self, z):
        z = _check_vector(z, self.m, "z")
        blocks = np.fft.ifft(z.reshape(self.blocks, self.n), axis=1, norm="ortho")
        return self._scale * (self._phases.conj() * blocks).sum(axis=0)


class PartialDFTOperator(SensingOperator):
    kind = "partial_dft"

    def __init__(self, m, indices, phases, seed=None):
        super().__init__(m, indices.shape[0], seed=seed)
        self._idx = indices
        self._phases = phases

    def _payload_digest(self):
        h = hashlib.blake2b(digest_size=8)
        h.update(self._idx.tobytes())
        h.update(self._phases.tobytes())
        return h.hexdigest()

    def apply(self, x):
        x = _check_vector(x, self.n, "x")
        u = np.zeros(self.m, dtype=np.complex128)
        u[self._idx] = self._phases * x
        return np.fft.fft(u, norm="ortho")

    def apply_adjoint(self, z):
        z = _check_vector(z, self.m, "z")
        v = np.fft.ifft(z, norm="ortho")
        return self._phases.conj() * v[self._idx]


def build_haar(m: int, n: int, rng, seed=None) -> SensingOperator:
    """Haar-distributed column-orthogonal A via QR of an i.i.d. complex Gaussian.

    The R-diagonal phase correction is applied (column j of Q is multiplied by
    conj(sign(R_jj))), which removes the QR sign convention so the law is
    exactly Haar on the Stiefel manifold.
    """
    if m <= n:
        raise InvalidParameterError(f"need m > n, got m={m}, n={n}")
    if m > HAAR_M_CAP:
        raise InvalidParameterError(f"haar payload capped at m <= {HAAR_M_CAP}, got m={m}")
    g = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2.0)
    q, r = qr(g, mode="economic")
    d = np.diagonal(r).copy()
    d[np.abs(d) < 1e-300] = 1.0
    sign = d / np.abs(d)
    return HaarOperator(q * sign.conj()[None, :], seed=seed)


def build_cdp(n: int, L: int, rng, seed=None) -> SensingOperator:
    """Coded-diffraction operator: L stacked unitary-DFT blocks with random masks."""
    if int(L) != L or L < 2:
        raise InvalidParameterError(f"need integer L >= 2, got {L}")
    phases = np.exp(2j * np.pi * rng.random((int(L), n)))
    return CDPOperator(phases, seed=seed)


def build_partial_dft(m: int, n: int, rng, seed=None) -> SensingOperator:
    """Partial-DFT operator: random n-subset of the m-point unitary DFT, random phases."""
    if m <= n:
        raise InvalidParameterError(f"need m > n, got m={m}, n={n}")
    indices = rng.choice(m, size=n, replace=False)
    phases = np.exp(2j * np.pi * rng.random(n))
    return PartialDFTOperator(m, indices, phases, seed=seed)


@dataclass(frozen=True)
class SensingSpec:
    """Seed-deterministic recipe for a sensing operator.

    kind is one of haar | cdp | partial_dft. For cdp, `blocks` (= L = delta)
    is used and delta is ignored; otherwise m = ceil(delta * n). The realized
    delta is m/n, reported by the built operator.
    """

    kind: str
    n: int
    seed: int
    delta: float | None = None
    blocks: int | None = None

    def resolved_m(self) -> int:
        if self.kind == "cdp":
            if self.blocks is None:
                raise InvalidParameterError("cdp spec needs blocks (= L)")
            return int(self.blocks) * self.n
        if self.delta is None:
            raise InvalidParameterError(f"{self.kind} spec needs delta")
        return int(math.ceil(self.delta * self.n))

    def build(self) -> SensingOperator:
        rng = make_rng(self.seed, f"sensing/{self.kind}/{self.n}")
        if self.kind == "haar":
            return build_haar(self.resolved_m(), self.n, rng, seed=self.seed)
        if self.kind == "cdp":
            return build_cdp(self.n, int(self.blocks), rng, seed=self.seed)
        if self.kind == "partial_dft":
            return build_partial_dft(self.resolved_m(), self.n, rng, seed=self.seed)
        raise InvalidParameterError(f"unknown sensing kind {self.kind!r}")

    def to_json(self) -> str:
        d = {"kind": self.kind, "n": self.n, "seed": self.seed}
        if self.kind == "cdp":
            d["blocks"] = int(self.blocks)
        else:
            d["delta"] = float(self.delta)
        return json.dumps(d, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "SensingSpec":
        d = json.loads(text)
        return SensingSpec(
            kind=d["kind"],
            n=int(d["n"]),
            seed=int(d["seed"]),
            delta=float(d["delta"]) if "delta" in d else None,
            blocks=int(d["blocks"]) if "blocks" in d else None,
        )

    def replace_seed(self, seed: int) -> "SensingSpec":
        return SensingSpec(self.kind, self.n, int(seed), self.delta, self.blocks)
