"""Hyperfine transition descriptions: Zeeman structure, decay branching and
dipole couplings.

Units: the total excited-state decay rate is 1 (all rates and frequencies are
quoted in units of it) and hbar = 1.  The magnetic field enters only through
the dimensionless Larmor parameter ``b_larmor = mu_B * B / (hbar * Gamma)``;
a sublevel with magnetic quantum number m is shifted by
``g_factor * m * b_larmor``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .angular import (
    AngularMomentum,
    DomainError,
    _check_projection,
    _twice,
    clebsch_gordan,
    wigner_6j,
)

__all__ = [
    "FieldConfig",
    "LevelSpec",
    "Polarization",
    "TransitionSystem",
    "branching_ratio",
    "build_system",
    "dipole_coupling",
    "drive_matrix",
    "get_preset",
    "lande_g_factor",
    "preset_names",
    "rabi_for_saturation",
    "rabi_from_intensity",
    "saturation_intensity",
    "saturation_parameter",
    "zeeman_shift",
]

# Fine-structure g-factors used by the shipped alkali presets.
GJ_S_HALF = 2.0
GJ_P_THREE_HALF = 4.0 / 3.0


class Polarization(enum.Enum):
    """Laser polarization, for propagation along the magnetic field axis."""

    LINEAR_X = "linear_x"
    SIGMA_PLUS = "sigma_plus"
    SIGMA_MINUS = "sigma_minus"

    @classmethod
    def parse(cls, text: str) -> "Polarization":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DomainError(
                f"unknown polarization {text!r}; expected one of "
                + ", ".join(p.value for p in cls)
            ) from None

    @property
    def components(self) -> dict[int, float]:
        """Spherical drive components q -> amplitude weight (units of the Rabi
        frequency).  Linear polarization splits equally over sigma+ and
        sigma-; each present component couples with weight 1/2 so that the
        strongest transition of a single component sees the textbook
        two-level Rabi frequency."""
        if self is Polarization.LINEAR_X:
            return {+1: 0.5, -1: 0.5}
        if self is Polarization.SIGMA_PLUS:
            return {+1: 0.5}
        return {-1: 0.5}


@dataclass(frozen=True)
class LevelSpec:
    """One hyperfine level: electronic J, nuclear I, total F and its g-factor."""

    j: AngularMomentum
    i: AngularMomentum
    f: AngularMomentum
    g_factor: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "j", AngularMomentum.of(self.j))
        object.__setattr__(self, "i", AngularMomentum.of(self.i))
        object.__setattr__(self, "f", AngularMomentum.of(self.f))
        tj, ti, tf = self.j.twice_j, self.i.twice_j, self.f.twice_j
        if (tj + ti + tf) % 2 or not abs(tj - ti) <= tf <= tj + ti:
            raise DomainError(
                f"F = {self.f} is not in the coupling range of J = {self.j} and I = {self.i}"
            )

    @property
    def n_states(self) -> int:
        return self.f.multiplicity

    @property
    def m_values(self) -> np.ndarray:
        return np.array(self.f.projections())


@dataclass(frozen=True)
class FieldConfig:
    """Laser drive: polarization, Rabi frequency and detuning (units of Gamma).

    ``rabi`` is normalized to the strongest dipole coupling of the transition:
    for each spherical component present in the polarization, the strongest
    coupled pair evolves like a two-level atom with Rabi frequency ``rabi``.
    ``detuning`` is laser frequency minus transition frequency.
    """

    polarization: Polarization
    rabi: float
    detuning: float = 0.0

    def __post_init__(self) -> None:
        if self.rabi < 0:
            raise DomainError(f"rabi must be non-negative, got {self.rabi}")


def lande_g_factor(j, i, f, g_j: float) -> float:
    """Hyperfine Lande g-factor g_F for electronic g_J and nuclear spin I
    (nuclear magneton contribution neglected)."""
    jv = float(AngularMomentum.of(j).value)
    iv = float(AngularMomentum.of(i).value)
    fv = float(AngularMomentum.of(f).value)
    if fv == 0:
        return 0.0
    return g_j * (fv * (fv + 1) + jv * (jv + 1) - iv * (iv + 1)) / (2 * fv * (fv + 1))


def zeeman_shift(level: LevelSpec, m, b_larmor: float) -> float:
    """Zeeman shift of sublevel m in units of Gamma; odd in m, zero at m = 0."""
    tm = _twice(m, "m")
    _check_projection(level.f.twice_j, tm, "m")
    return level.g_factor * (tm / 2) * b_larmor


def branching_ratio(j_g, j_e, i, f_e, f_g, f_gprime) -> float:
    """Ratio of the spontaneous decay rates F_e -> F_g' over F_e -> F_g.

    Zero when the F_e -> F_g' channel is dipole-forbidden; raises
    :class:`DomainError` when the reference channel F_e -> F_g is forbidden or
    the hyperfine structure is inconsistent.
    """
    jg = AngularMomentum.of(j_g)
    je = AngularMomentum.of(j_e)
    ii = AngularMomentum.of(i)
    fe = AngularMomentum.of(f_e)
    fg = AngularMomentum.of(f_g)
    fgp = AngularMomentum.of(f_gprime)
    # validate the hyperfine couplings themselves
    LevelSpec(jg, ii, fg, 0.0)
    LevelSpec(jg, ii, fgp, 0.0)
    LevelSpec(je, ii, fe, 0.0)
    den = wigner_6j(jg, fg, ii, fe, je, 1) ** 2
    if den == 0.0:
        raise DomainError(
            f"reference decay channel F_e = {fe} -> F_g = {fg} is dipole-forbidden"
        )
    num = wigner_6j(jg, fgp, ii, fe, je, 1) ** 2
    return (fgp.twice_j + 1) / (fg.twice_j + 1) * num / den


@lru_cache(maxsize=None)
def _max_abs_coupling(tf_g: int, tf_e: int) -> float:
    best = 0.0
    for tm_g in range(-tf_g, tf_g + 1, 2):
        for q in (-1, 0, 1):
            tm_e = tm_g + 2 * q
            if abs(tm_e) > tf_e:
                continue
            best = max(
                best,
                abs(clebsch_gordan(tf_g / 2, tm_g / 2, 1, q, tf_e / 2, tm_e / 2)),
            )
    return best


def dipole_coupling(f_g, f_e, m_e, m_g, q: int) -> float:
    """Relative dipole coupling <F_e m_e|d_q|F_g m_g>, rescaled so the
    strongest coupling of the transition has magnitude 1.

    Zero unless m_e = m_g + q.  For F_g -> F_e = F_g + 1 this equals the
    Clebsch-Gordan coefficient <F_g m_g; 1 q | F_e m_e> (the stretched
    transition carries coefficient 1).
    """
    if q not in (-1, 0, 1):
        raise DomainError(f"q must be -1, 0 or +1, got {q!r}")
    fg = AngularMomentum.of(f_g)
    fe = AngularMomentum.of(f_e)
    tm_g = _twice(m_g, "m_g")
    tm_e = _twice(m_e, "m_e")
    _check_projection(fg.twice_j, tm_g, "m_g")
    _check_projection(fe.twice_j, tm_e, "m_e")
    if tm_e != tm_g + 2 * q:
        return 0.0
    cg = clebsch_gordan(fg, tm_g / 2, 1, q, fe, tm_e / 2)
    if cg == 0.0:
        return 0.0
    return cg / _max_abs_coupling(fg.twice_j, fe.twice_j)


@dataclass(frozen=True, eq=False)
class TransitionSystem:
    """Immutable description of one F_g -> F_e transition.

    ``gamma_fe_fg`` is the partial decay rate back into the simulated ground
    level and ``alpha_loss`` the summed ratio of decays into all other ground
    hyperfine levels, so the total excited decay rate is
    ``gamma_fe_fg * (1 + alpha_loss)`` (equal to 1 for physical presets).
    """

    ground: LevelSpec
    excited: LevelSpec
    gamma_fe_fg: float
    alpha_loss: float
    closed: bool
    couplings: np.ndarray = field(repr=False)  # shape (3, n_e, n_g), q-index q+1

    @property
    def f_g(self) -> AngularMomentum:
        return self.ground.f

    @property
    def f_e(self) -> AngularMomentum:
        return self.excited.f

    @property
    def n_g(self) -> int:
        return self.ground.n_states

    @property
    def n_e(self) -> int:
        return self.excited.n_states

    @property
    def dim(self) -> int:
        return self.n_g + self.n_e

    @property
    def m_g(self) -> np.ndarray:
        return self.ground.m_values

    @property
    def m_e(self) -> np.ndarray:
        return self.excited.m_values

    @property
    def total_decay_rate(self) -> float:
        return self.gamma_fe_fg * (1.0 + self.alpha_loss)

    def coupling_matrix(self, q: int) -> np.ndarray:
        """(n_e, n_g) array of relative couplings for spherical component q."""
        if q not in (-1, 0, 1):
            raise DomainError(f"q must be -1, 0 or +1, got {q!r}")
        return self.couplings[q + 1]

    def coupling(self, m_e, m_g, q: int) -> float:
        tm_e = _twice(m_e, "m_e")
        tm_g = _twice(m_g, "m_g")
        _check_projection(self.f_e.twice_j, tm_e, "m_e")
        _check_projection(self.f_g.twice_j, tm_g, "m_g")
        ie = (tm_e + self.f_e.twice_j) // 2
        ig = (tm_g + self.f_g.twice_j) // 2
        return float(self.coupling_matrix(q)[ie, ig])


def build_system(
    ground: LevelSpec,
    excited: LevelSpec,
    *,
    other_ground_f=(),
    force_closed: bool = False,
) -> TransitionSystem:
    """Assemble a :class:`TransitionSystem` from its two levels.

    ``other_ground_f`` lists the F values of the remaining ground hyperfine
    levels of the atom; spontaneous decay into them is treated as loss.
    ``force_closed`` zeroes that loss, for hypothetically closed transitions.
    """
    tf_g, tf_e = ground.f.twice_j, excited.f.twice_j
    if abs(tf_e - tf_g) > 2 or (tf_e == 0 and tf_g == 0):
        raise DomainError(
            f"transition F_g = {ground.f} -> F_e = {excited.f} is dipole-forbidden"
        )
    couplings = np.zeros((3, excited.n_states, ground.n_states))
    for q in (-1, 0, 1):
        for ig, tm_g in enumerate(range(-tf_g, tf_g + 1, 2)):
            tm_e = tm_g + 2 * q
            if abs(tm_e) > tf_e:
                continue
            ie = (tm_e + tf_e) // 2
            couplings[q + 1, ie, ig] = dipole_coupling(
                ground.f, excited.f, tm_e / 2, tm_g / 2, q
            )
    alpha = 0.0
    if not force_closed:
        for f_other in other_ground_f:
            fo = AngularMomentum.of(f_other)
            if fo == ground.f:
                continue
            if abs(fo.twice_j - tf_e) > 2:
                continue  # dipole-forbidden, no loss through this channel
            alpha += branching_ratio(
                ground.j, excited.j, ground.i, excited.f, ground.f, fo
            )
    return TransitionSystem(
        ground=ground,
        excited=excited,
        gamma_fe_fg=1.0 / (1.0 + alpha),
        alpha_loss=alpha,
        closed=(alpha == 0.0),
        couplings=couplings,
    )


def drive_matrix(system: TransitionSystem, field_cfg: FieldConfig) -> np.ndarray:
    """(n_e, n_g) matrix of laser couplings V_eg / hbar in units of Gamma."""
    w = np.zeros((system.n_e, system.n_g))
    for q, weight in field_cfg.polarization.components.items():
        w += field_cfg.rabi * weight * system.coupling_matrix(q)
    return w


def saturation_parameter(rabi: float, detuning: float = 0.0) -> float:
    """s = rabi^2 / (detuning^2 + 1/4), the low-intensity expansion parameter."""
    return rabi**2 / (detuning**2 + 0.25)


def rabi_for_saturation(s: float, detuning: float = 0.0) -> float:
    """Rabi frequency that produces saturation parameter s at this detuning."""
    if s < 0:
        raise DomainError(f"saturation parameter must be non-negative, got {s}")
    return math.sqrt(s * (detuning**2 + 0.25))


def rabi_from_intensity(intensity_mw_cm2: float, isat_mw_cm2: float) -> float:
    """Rabi frequency from laser intensity via rabi^2 = 2 I / I_sat (Gamma = 1)."""
    if intensity_mw_cm2 < 0:
        raise DomainError(f"intensity must be non-negative, got {intensity_mw_cm2}")
    if isat_mw_cm2 <= 0:
        raise DomainError(f"saturation intensity must be positive, got {isat_mw_cm2}")
    return math.sqrt(2.0 * intensity_mw_cm2 / isat_mw_cm2)


def _rb87_2_3() -> TransitionSystem:
    ground = LevelSpec(1 / 2, 3 / 2, 2, lande_g_factor(1 / 2, 3 / 2, 2, GJ_S_HALF))
    excited = LevelSpec(3 / 2, 3 / 2, 3, lande_g_factor(3 / 2, 3 / 2, 3, GJ_P_THREE_HALF))
    return build_system(ground, excited, other_ground_f=(1,))


def _rb85_3_4() -> TransitionSystem:
    ground = LevelSpec(1 / 2, 5 / 2, 3, lande_g_factor(1 / 2, 5 / 2, 3, GJ_S_HALF))
    excited = LevelSpec(3 / 2, 5 / 2, 4, lande_g_factor(3 / 2, 5 / 2, 4, GJ_P_THREE_HALF))
    return build_system(ground, excited, other_ground_f=(2,))


def _rb87_1_2_open() -> TransitionSystem:
    ground = LevelSpec(1 / 2, 3 / 2, 1, lande_g_factor(1 / 2, 3 / 2, 1, GJ_S_HALF))
    excited = LevelSpec(3 / 2, 3 / 2, 2, lande_g_factor(3 / 2, 3 / 2, 2, GJ_P_THREE_HALF))
    return build_system(ground, excited, other_ground_f=(2,))


def _cs_4_5() -> TransitionSystem:
    ground = LevelSpec(1 / 2, 7 / 2, 4, lande_g_factor(1 / 2, 7 / 2, 4, GJ_S_HALF))
    excited = LevelSpec(3 / 2, 7 / 2, 5, lande_g_factor(3 / 2, 7 / 2, 5, GJ_P_THREE_HALF))
    return build_system(ground, excited, other_ground_f=(3,))


def _model_1_2_closed() -> TransitionSystem:
    # Idealized closed 1 -> 2 transition with unit g-factors: relative dipole
    # couplings depend only on F_g and F_e, so I = 0 is a convenient carrier.
    ground = LevelSpec(1, 0, 1, 1.0)
    excited = LevelSpec(2, 0, 2, 1.0)
    return build_system(ground, excited)


_PRESETS = {
    "rb87_2_3": _rb87_2_3,
    "rb85_3_4": _rb85_3_4,
    "rb87_1_2_open": _rb87_1_2_open,
    "cs_4_5": _cs_4_5,
    "model_1_2_closed": _model_1_2_closed,
}

# D2-line saturation intensities in mW/cm^2 for the intensity -> Rabi mapping.
_SATURATION_INTENSITY = {
    "rb87_2_3": 1.67,
    "rb85_3_4": 1.67,
    "rb87_1_2_open": 1.67,
    "cs_4_5": 1.10,
    "model_1_2_closed": None,
}


def preset_names() -> list[str]:
    return sorted(_PRESETS)


def get_preset(name: str) -> TransitionSystem:
    """Build one of the registered transition systems by key."""
    try:
        factory = _PRESETS[name]
    except KeyError:
        raise DomainError(
            f"unknown system preset {name!r}; available: " + ", ".join(preset_names())
        ) from None
    return factory()


def saturation_intensity(name: str) -> float | None:
    """Saturation intensity (mW/cm^2) for a preset, or None if undefined."""
    if name not in _SATURATION_INTENSITY:
        raise DomainError(f"unknown system preset {name!r}")
    return _SATURATION_INTENSITY[name]
