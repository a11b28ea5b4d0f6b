"""Frequency-localized trigonometric polynomials and certified norm brackets.

A polynomial ``p(x) = sum_s c_s exp(i s x)`` is stored as a dense run of
complex coefficients starting at an arbitrary integer frequency.  Dense
grid evaluation goes through a length-G FFT.  The supremum bracket follows
from the derivative inequality for trigonometric polynomials
(``|p'| <= deg(p) * sup|p|``): a dense grid maximum M over a grid with
spacing 2*pi/G certifies ``sup|p| <= M / (1 - pi*deg/G)``.

Floating round-off is not tracked term by term; every certified upper
bound instead absorbs an additive slack of ``1e-9 * sum|c_s|``
(``ROUNDOFF_SLACK`` times the coefficient mass), which dwarfs the actual
accumulation at the scales used here.

Norms are normalized so that ``||1||_p = 1`` (the constant carries norm 1
and a single exponential carries norm 1 in every p).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GridTooSmall, LacunaError

TWO_PI = 2.0 * math.pi
ROUNDOFF_SLACK = 1e-9  # per unit of coefficient l1 mass

_LACF_MAGIC = b"LACF"
_LACF_VERSION = 1
_LACF_HEADER = struct.Struct("<4sHqQ")


def _next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (int(n) - 1).bit_length()


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Dense complex coefficients ``coeffs[k]`` at frequency ``min_freq + k``.

    ``padded`` permits zero coefficients at the edges of the stored run
    (sums of blocks set it).  ``carrier`` is optional construction
    metadata: when set, the polynomial is a pure modulation by
    ``exp(i*carrier*x)`` of a low-degree envelope, so modulus-based
    quantities can be computed on the envelope instead.
    """

    min_freq: int
    coeffs: np.ndarray
    padded: bool = False
    carrier: int | None = None

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("coeffs must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr.view(np.float64))):
            raise ValueError("coefficients must be finite")
        if not self.padded and (arr[0] == 0 or arr[-1] == 0):
            raise ValueError("edge coefficients may only vanish on padded polynomials")
        arr = arr.copy() if arr.flags.writeable and arr is not self.coeffs else arr
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def max_freq(self) -> int:
        return self.min_freq + len(self.coeffs) - 1

    def degree(self) -> int:
        return max(abs(self.min_freq), abs(self.max_freq))

    def coeff_l1(self) -> float:
        return float(np.abs(self.coeffs).sum())

    def __len__(self) -> int:
        return len(self.coeffs)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        return poly_sum([self, other])


@dataclass(frozen=True)
class NormBracket:
    """Two-sided enclosure of a norm; ``at`` is the grid point attaining ``lower``."""

    lower: float
    upper: float
    at: float | None = None

    def __contains__(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_json_obj(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "at": self.at}

    @classmethod
    def from_json_obj(cls, obj: dict) -> "NormBracket":
        return cls(lower=obj["lower"], upper=obj["upper"], at=obj.get("at"))


def fejer(d: int) -> TrigPoly:
    """Averaged Dirichlet kernel of order ``d``, halved.

    Coefficients are ``(1 - |k|/(d+1))/2`` for ``|k| <= d``; the kernel is
    nonnegative with mean exactly 1/2 and peak value ``(d+1)/2`` at 0.
    """
    if d < 0:
        raise ValueError("kernel order must be >= 0")
    k = np.arange(-d, d + 1)
    coeffs = 0.5 * (1.0 - np.abs(k) / (d + 1.0))
    return TrigPoly(-d, coeffs.astype(np.complex128))


def grid_eval(p: TrigPoly, G: int) -> np.ndarray:
    """Values ``p(2*pi*k/G)`` for ``k = 0..G-1`` via one inverse FFT.

    Requires ``G > 2*degree(p)`` so every stored frequency lands on a
    distinct residue mod G (no aliasing).
    """
    G = int(G)
    deg = p.degree()
    if G <= 2 * deg:
        raise GridTooSmall(f"grid {G} must exceed twice the degree {deg}")
    buf = np.zeros(G, dtype=np.complex128)
    idx = np.arange(p.min_freq, p.min_freq + len(p.coeffs)) % G
    buf[idx] = p.coeffs
    return np.fft.ifft(buf) * G


def point_eval(p: TrigPoly, xs) -> np.ndarray:
    """Direct evaluation at arbitrary points (chunked over the spectrum)."""
    xs = np.atleast_1d(np.asarray(xs, dtype=np.float64))
    out = np.zeros(xs.shape, dtype=np.complex128)
    freqs = np.arange(p.min_freq, p.min_freq + len(p.coeffs))
    step = 4096
    for lo in range(0, len(freqs), step):
        f = freqs[lo : lo + step]
        c = p.coeffs[lo : lo + step]
        out += np.exp(1j * xs[:, None] * f[None, :]) @ c
    return out


def sup_scan(p: TrigPoly, oversample: int = 16) -> tuple[NormBracket, np.ndarray, int]:
    """Certified sup bracket plus the squared-modulus samples it came from.

    The grid is the smallest power of two >= oversample*(degree+1); callers
    that also need threshold sets over the same samples reuse the array.
    A polynomial tagged with a ``carrier`` is scanned through its envelope:
    the modulus is identical pointwise but the derivative correction then
    uses the envelope's (far smaller) degree.
    """
    if oversample < 8:
        raise ValueError("oversample must be >= 8 for a valid certificate")
    work = p
    if p.carrier is not None:
        pair = factorization(p)
        if pair is not None:
            work = pair[0]
    deg = work.degree()
    G = _next_pow2(max(oversample * (deg + 1), 64))
    vals = grid_eval(work, G)
    abs2 = vals.real * vals.real + vals.imag * vals.imag
    k = int(np.argmax(abs2))
    lower = float(math.sqrt(abs2[k]))
    upper = lower / (1.0 - math.pi * deg / G) + ROUNDOFF_SLACK * work.coeff_l1()
    return NormBracket(lower, upper, at=TWO_PI * k / G), abs2, G


def sup_norm(p: TrigPoly, oversample: int = 16) -> NormBracket:
    """Certified bracket for ``sup_x |p(x)|``."""
    return sup_scan(p, oversample)[0]


def l1_norm(p: TrigPoly, G: int) -> NormBracket:
    """Bracket for the normalized L1 norm ``(1/2pi) * integral of |p|``.

    Rectangle rule on G nodes; the error bound ``pi*deg*sup/G`` comes from
    the Lipschitz constant of ``|p|``.
    """
    deg = p.degree()
    vals = grid_eval(p, G)  # raises GridTooSmall unless G > 2*deg
    mean_abs = float(np.abs(vals).mean())
    sup_upper = sup_norm(p).upper
    err = math.pi * deg * sup_upper / G + ROUNDOFF_SLACK * p.coeff_l1()
    return NormBracket(max(mean_abs - err, 0.0), mean_abs + err)


def l2_norm(p: TrigPoly) -> float:
    """Normalized L2 norm, exactly ``sqrt(sum |c_s|^2)`` by orthonormality."""
    return float(math.sqrt(np.vdot(p.coeffs, p.coeffs).real))


def modulate(p: TrigPoly, M: int) -> TrigPoly:
    """Multiply by ``exp(i M x)``: shifts the spectrum, preserves the modulus."""
    carrier = p.carrier + M if p.carrier is not None else None
    return TrigPoly(p.min_freq + M, p.coeffs, padded=p.padded, carrier=carrier)


def scale(p: TrigPoly, c: complex) -> TrigPoly:
    return TrigPoly(p.min_freq, p.coeffs * c, padded=p.padded or c == 0,
                    carrier=p.carrier)


def poly_sum(ps) -> TrigPoly:
    """Coefficient-exact sum; the result is marked padded (edges may cancel)."""
    ps = list(ps)
    if not ps:
        raise ValueError("poly_sum needs at least one polynomial")
    lo = min(p.min_freq for p in ps)
    hi = max(p.max_freq for p in ps)
    buf = np.zeros(hi - lo + 1, dtype=np.complex128)
    for p in ps:
        a = p.min_freq - lo
        buf[a : a + len(p.coeffs)] += p.coeffs
    return TrigPoly(lo, buf, padded=True)


def factorization(p: TrigPoly) -> tuple[TrigPoly, int] | None:
    """(envelope, carrier) when the polynomial carries modulation metadata."""
    if p.carrier is None:
        return None
    env = TrigPoly(p.min_freq - p.carrier, p.coeffs, padded=p.padded, carrier=None)
    return env, p.carrier


@dataclass(frozen=True, eq=False)
class RealTrigPoly:
    """Real polynomial ``sum_k (A_k cos kx + B_k sin kx)``, k = 0..degree."""

    cos_coeffs: np.ndarray
    sin_coeffs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.cos_coeffs, dtype=np.float64)
        b = np.asarray(self.sin_coeffs, dtype=np.float64)
        if a.shape != b.shape or a.ndim != 1 or a.size < 1:
            raise ValueError("cosine/sine coefficient arrays must match")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "cos_coeffs", a)
        object.__setattr__(self, "sin_coeffs", b)

    def degree(self) -> int:
        return len(self.cos_coeffs) - 1

    def to_complex(self) -> TrigPoly:
        """Hermitian exponential form; feeds the shared norm machinery."""
        D = self.degree()
        buf = np.zeros(2 * D + 1, dtype=np.complex128)
        A = self.cos_coeffs
        B = self.sin_coeffs
        buf[D] = A[0]
        if D >= 1:
            pos = 0.5 * (A[1:] - 1j * B[1:])
            buf[D + 1 :] = pos
            buf[:D] = np.conj(pos[::-1])
        return TrigPoly(-D, buf, padded=True)

    def eval(self, xs) -> np.ndarray:
        return point_eval(self.to_complex(), xs).real


def real_part(p: TrigPoly) -> RealTrigPoly:
    """Real part of ``p`` as a cosine/sine series.

    ``Re(c e^{isx}) = Re(c) cos sx - Im(c) sin sx``; negative frequencies
    fold onto positive ones with the sine sign flipped.
    """
    D = p.degree()
    cos = np.zeros(D + 1)
    sin = np.zeros(D + 1)
    freqs = np.arange(p.min_freq, p.min_freq + len(p.coeffs))
    mag = np.abs(freqs)
    sgn = np.sign(freqs)
    np.add.at(cos, mag, p.coeffs.real)
    np.add.at(sin, mag, -sgn * p.coeffs.imag)
    sin[0] = 0.0
    return RealTrigPoly(cos, sin)


def trim(p: TrigPoly) -> TrigPoly:
    """Drop exactly-zero edge coefficients (keeps at least one coefficient)."""
    nz = np.flatnonzero(p.coeffs)
    if nz.size == 0:
        return TrigPoly(0, np.zeros(1, dtype=np.complex128), padded=True,
                        carrier=p.carrier)
    a, b = int(nz[0]), int(nz[-1])
    return TrigPoly(p.min_freq + a, p.coeffs[a : b + 1], carrier=p.carrier)


# ---------------------------------------------------------------------------
# Coefficient file format: magic "LACF", version u16, min_freq i64, count u64,
# then count little-endian (re, im) float64 pairs.


def save_coeffs(p: TrigPoly, path: str | Path) -> None:
    header = _LACF_HEADER.pack(_LACF_MAGIC, _LACF_VERSION, p.min_freq, len(p.coeffs))
    inter = np.empty(2 * len(p.coeffs), dtype="<f8")
    inter[0::2] = p.coeffs.real
    inter[1::2] = p.coeffs.imag
    Path(path).write_bytes(header + inter.tobytes())


def load_coeffs(path: str | Path, carrier: int | None = None) -> TrigPoly:
    raw = Path(path).read_bytes()
    if len(raw) < _LACF_HEADER.size:
        raise LacunaError(f"{path}: truncated coefficient file")
    magic, version, min_freq, count = _LACF_HEADER.unpack_from(raw)
    if magic != _LACF_MAGIC:
        raise LacunaError(f"{path}: bad magic {magic!r}")
    if version != _LACF_VERSION:
        raise LacunaError(f"{path}: unsupported version {version}")
    need = _LACF_HEADER.size + 16 * count
    if len(raw) != need:
        raise LacunaError(f"{path}: expected {need} bytes, found {len(raw)}")
    inter = np.frombuffer(raw, dtype="<f8", offset=_LACF_HEADER.size)
    coeffs = inter[0::2] + 1j * inter[1::2]
    return TrigPoly(min_freq, coeffs, padded=True, carrier=carrier)
