"""Doubly entangled pair source with a parameterized imperfection model.

The ideal source emits

    (1/2) * (|HV> - |VH>) (x) (|RL> - e^{i phi} |LR>)

i.e. a polarization singlet times a path singlet with adjustable path
phase phi.  Real sources miss this in a few distinct ways: imperfect
down-conversion (modeled as a white-noise admixture), limited
interference visibility at the polarizing and non-polarizing beam
splitters (modeled as independent polarization/path dephasing), and a
misadjusted phase (modeled as an additive path-phase offset).  The fit
routine calibrates those four knobs against measured correlation values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qstate
from .observables import CORRELATIONS, correlation_operator
from .qstate import (
    DIM,
    Dof,
    Party,
    SubsystemSlot,
    KET_H,
    KET_L,
    KET_R,
    KET_V,
    assert_density_matrix,
    lift_unitary,
    mixed_expectation,
    tensor4,
)


def _canonical_phase(phi: float) -> float:
    """Map a finite angle into [-pi, pi)."""
    if not math.isfinite(phi):
        raise ValueError("phase must be finite")
    return float((phi + math.pi) % (2.0 * math.pi) - math.pi)


@dataclass(frozen=True)
class SourceConfig:
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", _canonical_phase(self.phi))

    def to_dict(self) -> dict:
        return {"phi": self.phi}

    @classmethod
    def from_dict(cls, d: dict) -> "SourceConfig":
        unknown = set(d) - {"phi"}
        if unknown:
            raise ValueError(f"unknown source fields: {sorted(unknown)}")
        return cls(phi=float(d.get("phi", 0.0)))


@dataclass(frozen=True)
class NoiseModel:
    white_noise_weight: float = 0.0
    pol_visibility: float = 1.0
    path_visibility: float = 1.0
    phase_offset: float = 0.0

    def __post_init__(self):
        for name in ("white_noise_weight", "pol_visibility", "path_visibility"):
            v = float(getattr(self, name))
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "phase_offset", _canonical_phase(float(self.phase_offset)))

    def to_dict(self) -> dict:
        return {
            "white_noise_weight": self.white_noise_weight,
            "pol_visibility": self.pol_visibility,
            "path_visibility": self.path_visibility,
            "phase_offset": self.phase_offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        known = {"white_noise_weight", "pol_visibility", "path_visibility", "phase_offset"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown noise fields: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


def build_psi(config: SourceConfig | float | None = None) -> np.ndarray:
    """The doubly entangled state for a given path phase.

    Accepts a SourceConfig or a bare phase in radians; defaults to phi=0.
    """
    if config is None:
        config = SourceConfig()
    elif isinstance(config, (int, float)):
        config = SourceConfig(float(config))
    phase = np.exp(1j * config.phi)
    psi = 0.5 * (
        tensor4(KET_H, KET_R, KET_V, KET_L)
        - phase * tensor4(KET_H, KET_L, KET_V, KET_R)
        - tensor4(KET_V, KET_R, KET_H, KET_L)
        + phase * tensor4(KET_V, KET_L, KET_H, KET_R)
    )
    return psi / np.linalg.norm(psi)


# index bit layout used by the dephasing mask
_BITS = np.array([[(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1] for i in range(DIM)])
_POL_MISMATCH = (_BITS[:, 0][:, None] != _BITS[:, 0][None, :]).astype(int) + (
    _BITS[:, 2][:, None] != _BITS[:, 2][None, :]
).astype(int)
_PATH_MISMATCH = (_BITS[:, 1][:, None] != _BITS[:, 1][None, :]).astype(int) + (
    _BITS[:, 3][:, None] != _BITS[:, 3][None, :]
).astype(int)
_POL_MISMATCH.setflags(write=False)
_PATH_MISMATCH.setflags(write=False)


def apply_noise(state: np.ndarray, model: NoiseModel) -> np.ndarray:
    """Degrade a pure state into a mixed one.

    The channel first shifts the path phase, then scales polarization and
    path coherences by the respective visibilities (per photon, so a fully
    flipped coherence is scaled twice), and finally mixes in white noise:

        rho = (1 - w) * D(|psi><psi|) + w * I/16

    The dephasing mask is a positive-semidefinite kernel, so the output is
    always a valid density matrix.
    """
    psi = qstate.assert_state(state)
    phase_shift = np.array([[1.0, 0.0], [0.0, np.exp(1j * model.phase_offset)]], dtype=complex)
    psi = lift_unitary(phase_shift, SubsystemSlot(Party.ALICE, Dof.PATH)) @ psi
    rho = np.outer(psi, psi.conj())
    damp = (model.pol_visibility ** _POL_MISMATCH) * (model.path_visibility ** _PATH_MISMATCH)
    w = model.white_noise_weight
    rho = (1.0 - w) * (damp * rho) + w * np.eye(DIM) / DIM
    return assert_density_matrix(rho)


@dataclass(frozen=True)
class FitResult:
    model: NoiseModel
    residual: float
    degenerate: bool = False


_NON_M_OPS = tuple(correlation_operator(c) for c in CORRELATIONS[:8])

# deterministic search grid for the calibration fit
_W_GRID = np.linspace(0.0, 1.0, 21)
_VIS_GRID = np.linspace(0.0, 1.0, 11)
_PHASE_GRID = np.linspace(-math.pi, math.pi, 9)
_FIT_MAX_SWEEPS = 1000
_FIT_TOL = 1e-9


def predicted_correlations(model: NoiseModel, phi: float = 0.0) -> np.ndarray:
    """The nine correlation expectations of the noisy source."""
    rho = apply_noise(build_psi(phi), model)
    return np.array([mixed_expectation(correlation_operator(c), rho) for c in CORRELATIONS])


def _non_m_predictions(model: NoiseModel) -> np.ndarray:
    rho = apply_noise(build_psi(0.0), model)
    return np.array([mixed_expectation(op, rho) for op in _NON_M_OPS])


def _objective(params: np.ndarray, targets: np.ndarray) -> float:
    model = NoiseModel(params[0], params[1], params[2], params[3])
    dev = _non_m_predictions(model) - targets
    return float(np.dot(dev, dev))


def fit_noise(targets) -> FitResult:
    """Least-squares calibration of the noise model against measured values.

    targets are the measured correlation values in canonical order; either
    the eight non-M values or all nine (the M entry is then ignored, the
    fit always uses the eight non-M operators).  Deterministic: a fixed
    grid scan followed by coordinate descent with shrinking steps.
    """
    targets = np.asarray([float(t) for t in targets], dtype=float)
    if targets.shape[0] not in (8, 9):
        raise ValueError("expected 8 or 9 target correlation values")
    if np.any(np.abs(targets) > 1.0 + 1e-12):
        raise ValueError("correlation targets must lie in [-1, 1]")
    targets = targets[:8]

    if np.all(targets == 0.0):
        model = NoiseModel(white_noise_weight=1.0)
        return FitResult(model=model, residual=0.0, degenerate=True)

    # grid stage; white noise only rescales, so scan it analytically
    best = (math.inf, None)
    for vp in _VIS_GRID:
        for vq in _VIS_GRID:
            for delta in _PHASE_GRID:
                base = _non_m_predictions(NoiseModel(0.0, vp, vq, delta))
                resid = np.sum(((1.0 - _W_GRID)[:, None] * base[None, :] - targets) ** 2, axis=1)
                k = int(np.argmin(resid))
                if resid[k] < best[0]:
                    best = (float(resid[k]), np.array([_W_GRID[k], vp, vq, delta]))
    value, params = best

    # coordinate descent with halving steps
    lo = np.array([0.0, 0.0, 0.0, -math.pi])
    hi = np.array([1.0, 1.0, 1.0, math.pi])
    steps = np.array([_W_GRID[1], _VIS_GRID[1], _VIS_GRID[1], _PHASE_GRID[1] - _PHASE_GRID[0]])
    for _ in range(_FIT_MAX_SWEEPS):
        improved = False
        for i in range(4):
            for direction in (+1.0, -1.0):
                cand = params.copy()
                cand[i] = min(max(cand[i] + direction * steps[i], lo[i]), hi[i])
                cand_value = _objective(cand, targets)
                if cand_value < value - _FIT_TOL * 1e-3:
                    params, value = cand, cand_value
                    improved = True
        if not improved:
            steps = steps / 2.0
            if float(steps.max()) < _FIT_TOL:
                break
    model = NoiseModel(params[0], params[1], params[2], params[3])
    return FitResult(model=model, residual=value, degenerate=False)
