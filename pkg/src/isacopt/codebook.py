"""Constant-modulus Q-bit phase alphabet used for every beam entry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class PhaseCodebook:
    q_bits: int
    magnitude: float
    symbols: np.ndarray

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def gram(self) -> np.ndarray:
        """``S = conj(s) s^T``, so that ``Tr(S x_n x_m^T) = (s^T x_n)(s^T x_m)^*``."""
        return np.outer(self.symbols.conj(), self.symbols)

    def decode_entry(self, selector) -> complex:
        """Beam entry selected by a 0/1 vector; the all-zero selector means "off"."""
        sel = np.asarray(selector)
        if sel.shape != (self.size,):
            raise ValueError(f"selector must have length {self.size}, got shape {sel.shape}")
        if not np.all((sel == 0) | (sel == 1)):
            raise ValueError("selector entries must be 0 or 1")
        ones = int(sel.sum())
        if ones > 1:
            raise ValueError(f"selector has {ones} active entries; at most one allowed")
        if ones == 0:
            return 0j
        return complex(self.symbols[int(np.argmax(sel))])

    def index_of(self, value: complex, tol: float = 1e-9) -> int | None:
        """Position of ``value`` in the alphabet, or None when it is not a symbol."""
        d = np.abs(self.symbols - value)
        i = int(np.argmin(d))
        return i if d[i] <= tol * max(1.0, self.magnitude) else None

    def contains(self, value: complex, tol: float = 1e-9) -> bool:
        return self.index_of(value, tol) is not None


def build_codebook(q_bits: int, tx_power: float, k_rf: int, n_antennas: int) -> PhaseCodebook:
    """Uniform ``2**q_bits`` phase grid starting at 0 with magnitude ``sqrt(P/(K N))``."""
    if q_bits < 1:
        raise ValueError(f"q_bits must be >= 1, got {q_bits}")
    if tx_power <= 0:
        raise ValueError(f"tx_power must be positive, got {tx_power}")
    if k_rf < 1 or n_antennas < 1:
        raise ValueError("k_rf and n_antennas must be positive")
    L = 2 ** q_bits
    delta = float(np.sqrt(tx_power / (k_rf * n_antennas)))
    phases = 2.0 * np.pi * np.arange(L) / L
    symbols = delta * np.exp(1j * phases)
    # snap cos/sin round-off so the Q=1,2 alphabets are exactly {±δ, ±jδ}
    symbols = np.where(np.abs(symbols.real) < 1e-15 * delta, 0.0, symbols.real) + 1j * np.where(
        np.abs(symbols.imag) < 1e-15 * delta, 0.0, symbols.imag)
    return PhaseCodebook(q_bits=q_bits, magnitude=delta, symbols=symbols)


def codebook_for(sc) -> PhaseCodebook:
    return build_codebook(sc.phase_bits, sc.tx_power, sc.n_rf_chains, sc.n_antennas)
