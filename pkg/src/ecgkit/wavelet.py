"""Orthogonal wavelet transforms on 1-D signals.

Provides the decimated transform (analysis + synthesis), the undecimated
(a-trous) variant used for beat delineation, and detail-coefficient
thresholding for denoising. All transforms use periodic boundary handling by
default, which keeps reconstruction exact and makes the undecimated transform
exactly equivariant under circular shifts.

Conventions: level-1 analysis is the circular convolution of the signal with
the decomposition filters, downsampled by two (decimated) or kept at full
length (undecimated). Level j of the undecimated transform uses the base
filters upsampled by 2**(j-1). Synthesis is the adjoint of analysis, which for
orthonormal filter pairs is the exact inverse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, SignalTooShort

# Orthonormal Daubechies scaling (low-pass) coefficients, 2k taps for order k.
# db1 is the Haar basis. Values normalized so the taps sum to sqrt(2).
_DAUBECHIES_LO = {
    1: (0.7071067811865476, 0.7071067811865476),
    2: (0.48296291314453414, 0.8365163037378079,
        0.22414386804185735, -0.12940952255126037),
    3: (0.3326705529500826, 0.8068915093110928, 0.4598775021184915,
        -0.13501102001025458, -0.08544127388202666, 0.03522629188570953),
    4: (0.2303778133088965, 0.7148465705529157, 0.6308807679298589,
        -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
        0.03288301166688519, -0.010597401785069032),
}


@dataclass(frozen=True)
class WaveletBasis:
    """An orthonormal analysis/synthesis filter pair."""

    name: str
    dec_lo: np.ndarray
    dec_hi: np.ndarray
    rec_lo: np.ndarray
    rec_hi: np.ndarray

    def __post_init__(self):
        for name in ("dec_lo", "dec_hi", "rec_lo", "rec_hi"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), float))

    @property
    def n_taps(self) -> int:
        return len(self.dec_lo)


def wavelet_basis(name: str) -> WaveletBasis:
    """Look up a basis by name: "haar" or "db1".."db4".

    The high-pass filter is the alternating-sign mirror of the low-pass one;
    for orthonormal pairs the reconstruction filters coincide with the
    decomposition filters because synthesis is the adjoint of analysis.
    """
    key = name.lower()
    if key == "haar":
        key = "db1"
    if not (key.startswith("db") and key[2:].isdigit()):
        raise ValueError(f"unknown wavelet basis {name!r}")
    order = int(key[2:])
    if order not in _DAUBECHIES_LO:
        raise ValueError(f"unsupported Daubechies order {order} "
                         f"(available: 1..{max(_DAUBECHIES_LO)})")
    lo = np.array(_DAUBECHIES_LO[order])
    k = np.arange(len(lo))
    hi = ((-1.0) ** k) * lo[::-1]
    return WaveletBasis(name=key, dec_lo=lo, dec_hi=hi, rec_lo=lo, rec_hi=hi)


@dataclass
class DwtDecomposition:
    """Decimated multilevel decomposition.

    ``details[j]`` holds level j+1 (finest first); ``approximation`` is the
    deepest low-pass band. With periodic boundaries the coefficient count
    equals the input length.
    """

    levels: int
    approximation: np.ndarray
    details: list[np.ndarray]
    boundary_mode: str = "periodic"

    @property
    def coefficient_count(self) -> int:
        return len(self.approximation) + sum(len(d) for d in self.details)


@dataclass
class UwtDecomposition:
    """Undecimated (a-trous) multilevel decomposition.

    Every band has the input length. ``epsilon_choices`` records the per-level
    odd/even decimation bits when a single decimated path is materialized from
    this transform; it stays None for the full undecimated result, which
    carries all such paths at once.
    """

    levels: int
    approximations: list[np.ndarray]
    details: list[np.ndarray]
    input_length: int
    epsilon_choices: tuple[int, ...] | None = None


def _analyze_periodic(signal, lo, hi):
    # A[n] = sum_k lo[k] * s[(2n - k) mod N], likewise for the detail band.
    n = len(signal)
    even = np.arange(0, n, 2)
    a = np.zeros(n // 2)
    d = np.zeros(n // 2)
    for k in range(len(lo)):
        tap = signal[(even - k) % n]
        a += lo[k] * tap
        d += hi[k] * tap
    return a, d


def _synthesize_periodic(a, d, lo, hi):
    n = 2 * len(a)
    up_a = np.zeros(n)
    up_d = np.zeros(n)
    up_a[::2] = a
    up_d[::2] = d
    out = np.zeros(n)
    for k in range(len(lo)):
        out += lo[k] * np.roll(up_a, -k) + hi[k] * np.roll(up_d, -k)
    return out


def dwt(signal, basis: WaveletBasis, levels: int) -> DwtDecomposition:
    """Decimated wavelet analysis of a 1-D signal.

    Periodic boundaries require the length to be divisible by 2**levels.
    """
    signal = np.asarray(signal, float)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if signal.ndim != 1:
        raise ShapeMismatch("expected a 1-D signal")
    if len(signal) < 2 ** levels:
        raise SignalTooShort(
            f"length {len(signal)} < 2**{levels} required for {levels} levels")
    if len(signal) % (2 ** levels):
        raise ShapeMismatch(
            f"periodic mode needs length divisible by 2**{levels}, "
            f"got {len(signal)}")
    details = []
    approx = signal
    for _ in range(levels):
        approx, detail = _analyze_periodic(approx, basis.dec_lo, basis.dec_hi)
        details.append(detail)
    return DwtDecomposition(levels=levels, approximation=approx,
                            details=details)


def idwt(decomp: DwtDecomposition, basis: WaveletBasis) -> np.ndarray:
    """Invert :func:`dwt`; exact to round-off for orthonormal bases."""
    if decomp.boundary_mode != "periodic":
        raise ShapeMismatch(f"unsupported boundary mode {decomp.boundary_mode!r}")
    approx = np.asarray(decomp.approximation, float)
    for detail in reversed(decomp.details):
        detail = np.asarray(detail, float)
        if len(detail) != len(approx):
            raise ShapeMismatch(
                f"detail band of length {len(detail)} cannot pair with "
                f"approximation of length {len(approx)}")
        approx = _synthesize_periodic(approx, detail, basis.rec_lo, basis.rec_hi)
    return approx


def uwt(signal, basis: WaveletBasis, levels: int) -> UwtDecomposition:
    """Undecimated (a-trous) analysis; every band keeps the input length.

    Level j uses the base filters with 2**(j-1) - 1 zeros inserted between
    taps, applied as a circular convolution, so a circular shift of the input
    shifts every coefficient band identically.
    """
    signal = np.asarray(signal, float)
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if signal.ndim != 1:
        raise ShapeMismatch("expected a 1-D signal")
    n = len(signal)
    support = (basis.n_taps - 1) * 2 ** (levels - 1) + 1
    if n < 2 * support:
        raise SignalTooShort(
            f"length {n} < {2 * support} required for {levels} undecimated "
            f"levels of {basis.name}")
    approximations = []
    details = []
    approx = signal
    for j in range(levels):
        step = 2 ** j
        nxt = np.zeros(n)
        det = np.zeros(n)
        for k in range(basis.n_taps):
            tap = np.roll(approx, k * step)
            nxt += basis.dec_lo[k] * tap
            det += basis.dec_hi[k] * tap
        approximations.append(nxt)
        details.append(det)
        approx = nxt
    return UwtDecomposition(levels=levels, approximations=approximations,
                            details=details, input_length=n)


def uwt_max_levels(n_samples: int, basis: WaveletBasis) -> int:
    """Deepest undecimated level a signal of this length supports."""
    levels = 0
    while n_samples >= 2 * ((basis.n_taps - 1) * 2 ** levels + 1):
        levels += 1
    return levels


def soft_threshold(values, t):
    values = np.asarray(values, float)
    return np.sign(values) * np.maximum(np.abs(values) - t, 0.0)


def hard_threshold(values, t):
    # |d| <= t is zeroed; the boundary case belongs to the zero side.
    values = np.asarray(values, float)
    return np.where(np.abs(values) > t, values, 0.0)


def threshold_details(decomp: DwtDecomposition, rule: str,
                      thresholds) -> DwtDecomposition:
    """Apply soft or hard thresholding to every detail band.

    ``thresholds`` is a scalar or one value per level (finest first). The
    approximation band is never touched.
    """
    if rule not in ("soft", "hard"):
        raise ValueError(f"rule must be 'soft' or 'hard', got {rule!r}")
    thresholds = np.broadcast_to(np.asarray(thresholds, float),
                                 (decomp.levels,))
    if np.any(thresholds < 0):
        raise ValueError("thresholds must be >= 0")
    shrink = soft_threshold if rule == "soft" else hard_threshold
    details = [shrink(d, t) for d, t in zip(decomp.details, thresholds)]
    return DwtDecomposition(levels=decomp.levels,
                            approximation=np.array(decomp.approximation),
                            details=details,
                            boundary_mode=decomp.boundary_mode)


def universal_thresholds(decomp: DwtDecomposition) -> np.ndarray:
    """Per-level universal thresholds sigma_j * sqrt(2 ln N).

    sigma_j is the robust noise estimate median(|D_j|) / 0.6745; N is the
    total sample count the decomposition was built from.
    """
    n = decomp.coefficient_count
    scale = np.sqrt(2.0 * np.log(n)) if n > 1 else 0.0
    return np.array([np.median(np.abs(d)) / 0.6745 * scale
                     for d in decomp.details])
