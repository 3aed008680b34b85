"""Scenario configuration: a flat key-value text format, scan execution and
CSV output.

A scenario file is one dotted key per line (``scan.points = 201``); ``#``
starts a comment.  Unknown keys are rejected and every physical value is
range-checked at parse time, so a file either round-trips exactly or fails
loudly.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources

import numpy as np

from .angular import DomainError
from .observables import LineshapeScan, scan_lineshape
from .system import (
    FieldConfig,
    LevelSpec,
    Polarization,
    TransitionSystem,
    build_system,
    get_preset,
    preset_names,
    rabi_from_intensity,
    saturation_intensity,
)

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "available_presets",
    "load_preset_config",
    "parse_config",
    "run_scenario",
    "write_csv",
]

_OUTPUT_CHOICES = ("pi_e", "chi_im", "ground_populations", "coherence")

_KNOWN_KEYS = {
    "system",
    "polarization",
    "rabi_over_gamma",
    "intensity_mw_cm2",
    "saturation_intensity_mw_cm2",
    "detuning_over_gamma",
    "scan.min",
    "scan.max",
    "scan.points",
    "mode",
    "t_int_gamma",
    "outputs",
    "custom.j_g",
    "custom.j_e",
    "custom.i",
    "custom.f_g",
    "custom.f_e",
    "custom.g_g",
    "custom.g_e",
    "custom.force_closed",
}


class ConfigError(ValueError):
    """Malformed or out-of-range scenario configuration."""

    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class CustomSystemSpec:
    """Inline transition description used when ``system = custom``."""

    j_g: float
    j_e: float
    i: float
    f_g: float
    f_e: float
    g_g: float
    g_e: float
    force_closed: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    """One scan scenario, as written in a configuration file."""

    system: str
    polarization: str = "linear_x"
    rabi_over_gamma: float | None = None
    intensity_mw_cm2: float | None = None
    saturation_intensity_mw_cm2: float | None = None
    detuning_over_gamma: float = 0.0
    b_min: float = -0.5
    b_max: float = 0.5
    points: int = 201
    mode: str = "steady"
    t_int_gamma: float | None = None
    outputs: tuple[str, ...] = ("pi_e", "chi_im")
    custom: CustomSystemSpec | None = None

    def build_system(self) -> TransitionSystem:
        if self.system == "custom":
            c = self.custom
            ground = LevelSpec(c.j_g, c.i, c.f_g, c.g_g)
            excited = LevelSpec(c.j_e, c.i, c.f_e, c.g_e)
            return build_system(ground, excited, force_closed=c.force_closed)
        return get_preset(self.system)

    def resolve_rabi(self) -> float:
        if self.rabi_over_gamma is not None:
            return self.rabi_over_gamma
        isat = self.saturation_intensity_mw_cm2
        if isat is None and self.system != "custom":
            isat = saturation_intensity(self.system)
        if isat is None:
            raise ConfigError(
                "intensity_mw_cm2 given but no saturation intensity is known for "
                f"system {self.system!r}; set saturation_intensity_mw_cm2"
            )
        return rabi_from_intensity(self.intensity_mw_cm2, isat)

    def field_config(self) -> FieldConfig:
        return FieldConfig(
            Polarization.parse(self.polarization),
            self.resolve_rabi(),
            self.detuning_over_gamma,
        )

    def b_grid(self) -> np.ndarray:
        return np.linspace(self.b_min, self.b_max, self.points)

    def to_text(self) -> str:
        """Canonical configuration text; parsing it reproduces this object."""
        lines = [f"system = {self.system}"]
        if self.custom is not None:
            c = self.custom
            lines += [
                f"custom.j_g = {_fmt_half(c.j_g)}",
                f"custom.j_e = {_fmt_half(c.j_e)}",
                f"custom.i = {_fmt_half(c.i)}",
                f"custom.f_g = {_fmt_half(c.f_g)}",
                f"custom.f_e = {_fmt_half(c.f_e)}",
                f"custom.g_g = {c.g_g!r}",
                f"custom.g_e = {c.g_e!r}",
                f"custom.force_closed = {str(c.force_closed).lower()}",
            ]
        lines.append(f"polarization = {self.polarization}")
        if self.rabi_over_gamma is not None:
            lines.append(f"rabi_over_gamma = {self.rabi_over_gamma!r}")
        if self.intensity_mw_cm2 is not None:
            lines.append(f"intensity_mw_cm2 = {self.intensity_mw_cm2!r}")
        if self.saturation_intensity_mw_cm2 is not None:
            lines.append(
                f"saturation_intensity_mw_cm2 = {self.saturation_intensity_mw_cm2!r}"
            )
        lines += [
            f"detuning_over_gamma = {self.detuning_over_gamma!r}",
            f"scan.min = {self.b_min!r}",
            f"scan.max = {self.b_max!r}",
            f"scan.points = {self.points}",
            f"mode = {self.mode}",
        ]
        if self.t_int_gamma is not None:
            lines.append(f"t_int_gamma = {self.t_int_gamma!r}")
        lines.append("outputs = " + ", ".join(self.outputs))
        return "\n".join(lines) + "\n"


def _fmt_half(value: float) -> str:
    doubled = int(round(2 * value))
    if doubled % 2 == 0:
        return str(doubled // 2)
    return f"{doubled}/2"


def _parse_number(text: str, key: str, line: int) -> float:
    try:
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"value for {key!r} is not a number: {text!r}", line) from None


def _parse_bool(text: str, key: str, line: int) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ConfigError(f"value for {key!r} is not a boolean: {text!r}", line)


def parse_config(text: str) -> ScenarioConfig:
    """Strict parse of scenario text into a :class:`ScenarioConfig`."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0].strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        raw[key] = (value, lineno)

    def take(key, default=None):
        return raw.pop(key, (default, None))

    system, _ = take("system")
    if system is None:
        raise ConfigError("missing required key 'system'")
    custom = None
    if system == "custom":
        fields = {}
        for name in ("j_g", "j_e", "i", "f_g", "f_e", "g_g", "g_e"):
            value, lineno = take(f"custom.{name}")
            if value is None:
                raise ConfigError(f"system = custom requires key 'custom.{name}'")
            fields[name] = _parse_number(value, f"custom.{name}", lineno)
        closed_text, lineno = take("custom.force_closed", "false")
        fields["force_closed"] = _parse_bool(closed_text, "custom.force_closed", lineno)
        custom = CustomSystemSpec(**fields)
    else:
        if system not in preset_names():
            raise ConfigError(
                f"unknown system {system!r}; available presets: "
                + ", ".join(preset_names())
                + ", or 'custom'"
            )
        stray = [k for k in raw if k.startswith("custom.")]
        if stray:
            raise ConfigError(f"{stray[0]!r} is only valid with system = custom")

    polarization, lineno = take("polarization", "linear_x")
    try:
        Polarization.parse(polarization)
    except DomainError as exc:
        raise ConfigError(str(exc), lineno) from None

    rabi_text, rabi_line = take("rabi_over_gamma")
    intensity_text, int_line = take("intensity_mw_cm2")
    if rabi_text is not None and intensity_text is not None:
        raise ConfigError(
            "give exactly one intensity specification: both 'rabi_over_gamma' "
            "and 'intensity_mw_cm2' are present",
            int_line,
        )
    if rabi_text is None and intensity_text is None:
        raise ConfigError(
            "give exactly one intensity specification: 'rabi_over_gamma' or "
            "'intensity_mw_cm2'"
        )
    rabi = None
    intensity = None
    if rabi_text is not None:
        rabi = _parse_number(rabi_text, "rabi_over_gamma", rabi_line)
        if rabi < 0:
            raise ConfigError(f"rabi_over_gamma must be >= 0, got {rabi}", rabi_line)
    if intensity_text is not None:
        intensity = _parse_number(intensity_text, "intensity_mw_cm2", int_line)
        if intensity < 0:
            raise ConfigError(f"intensity_mw_cm2 must be >= 0, got {intensity}", int_line)

    isat_text, isat_line = take("saturation_intensity_mw_cm2")
    isat = None
    if isat_text is not None:
        isat = _parse_number(isat_text, "saturation_intensity_mw_cm2", isat_line)
        if isat <= 0:
            raise ConfigError(
                f"saturation_intensity_mw_cm2 must be > 0, got {isat}", isat_line
            )

    detuning_text, det_line = take("detuning_over_gamma", "0")
    detuning = _parse_number(detuning_text, "detuning_over_gamma", det_line)

    bmin_text, bmin_line = take("scan.min", "-0.5")
    bmax_text, bmax_line = take("scan.max", "0.5")
    b_min = _parse_number(bmin_text, "scan.min", bmin_line)
    b_max = _parse_number(bmax_text, "scan.max", bmax_line)
    if not b_min < b_max:
        raise ConfigError(f"scan.min must be < scan.max, got {b_min} >= {b_max}", bmax_line)

    points_text, pts_line = take("scan.points", "201")
    points_f = _parse_number(points_text, "scan.points", pts_line)
    points = int(points_f)
    if points != points_f or points < 3:
        raise ConfigError(f"scan.points must be an integer >= 3, got {points_text}", pts_line)

    mode, mode_line = take("mode", "steady")
    if mode not in ("steady", "integrated"):
        raise ConfigError(f"mode must be 'steady' or 'integrated', got {mode!r}", mode_line)
    t_text, t_line = take("t_int_gamma")
    t_int = None
    if mode == "integrated":
        if t_text is None:
            raise ConfigError("mode = integrated requires t_int_gamma")
        t_int = _parse_number(t_text, "t_int_gamma", t_line)
        if t_int <= 0:
            raise ConfigError(f"t_int_gamma must be > 0, got {t_int}", t_line)
    elif t_text is not None:
        raise ConfigError("t_int_gamma is only valid with mode = integrated", t_line)

    outputs_text, out_line = take("outputs", "pi_e, chi_im")
    outputs = tuple(part.strip() for part in outputs_text.split(",") if part.strip())
    if not outputs:
        raise ConfigError("outputs must name at least one column", out_line)
    for out in outputs:
        if out not in _OUTPUT_CHOICES:
            raise ConfigError(
                f"unknown output {out!r}; choices: " + ", ".join(_OUTPUT_CHOICES),
                out_line,
            )
    return ScenarioConfig(
        system=system,
        polarization=polarization,
        rabi_over_gamma=rabi,
        intensity_mw_cm2=intensity,
        saturation_intensity_mw_cm2=isat,
        detuning_over_gamma=detuning,
        b_min=b_min,
        b_max=b_max,
        points=points,
        mode=mode,
        t_int_gamma=t_int,
        outputs=outputs,
        custom=custom,
    )


def run_scenario(cfg: ScenarioConfig, *, workers: int | None = None) -> LineshapeScan:
    """Execute a configured scan; deterministic for a fixed configuration."""
    system = cfg.build_system()
    field_cfg = cfg.field_config()
    scan = scan_lineshape(
        system,
        field_cfg,
        cfg.b_grid(),
        mode=cfg.mode,
        t_int=cfg.t_int_gamma,
        workers=workers,
        system_key=cfg.system,
    )
    scan.meta.config = cfg
    return scan


def _fmt(value: float) -> str:
    return f"{value:.11e}"  # 12 significant digits


def _scan_columns(scan: LineshapeScan, cfg: ScenarioConfig):
    headers = ["b_larmor"]
    columns = [scan.b_larmor]
    if "pi_e" in cfg.outputs:
        headers.append("pi_e")
        columns.append(scan.pi_e)
    if "chi_im" in cfg.outputs:
        headers.append("chi_im")
        columns.append(scan.chi_im)
    if "ground_populations" in cfg.outputs:
        f_g = cfg.build_system().f_g
        for k, m in enumerate(f_g.projections()):
            headers.append(f"pop_g_{_fmt_half(m)}")
            columns.append(scan.ground_populations[:, k])
    if "coherence" in cfg.outputs:
        headers += ["coherence_re", "coherence_im", "coherence_abs"]
        columns += [scan.coherence.real, scan.coherence.imag, np.abs(scan.coherence)]
    return headers, columns


def write_csv(scan: LineshapeScan, destination) -> None:
    """Write a scan as CSV: '#'-prefixed config echo, a header row, then one
    row per field point with 12 significant digits.  The file appears only if
    writing completes; a failed write leaves nothing behind."""
    cfg = scan.meta.config if scan.meta is not None else None
    if cfg is None:
        raise ValueError("scan carries no configuration echo; run it through run_scenario")
    headers, columns = _scan_columns(scan, cfg)
    lines = ["# hanle-obe lineshape scan"]
    lines += ["# " + line for line in cfg.to_text().splitlines()]
    lines.append(",".join(headers))
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    payload = "\n".join(lines) + "\n"
    destination = os.fspath(destination)
    directory = os.path.dirname(destination) or "."
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".hanle-obe-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(payload)
        os.replace(tmp_path, destination)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def parse_csv_config(text: str) -> ScenarioConfig:
    """Recover the ScenarioConfig echoed in a CSV written by :func:`write_csv`."""
    lines = []
    for line in text.splitlines():
        if line.startswith("# ") and "=" in line:
            lines.append(line[2:])
    return parse_config("\n".join(lines))


def available_presets() -> list[str]:
    """Names of the bundled figure-scenario configuration files."""
    root = resources.files("hanle_obe").joinpath("presets")
    return sorted(p.name[: -len(".cfg")] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset_config(name: str) -> ScenarioConfig:
    """Load one bundled scenario by name (see :func:`available_presets`)."""
    path = resources.files("hanle_obe").joinpath("presets", f"{name}.cfg")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(
            f"unknown scenario preset {name!r}; available: "
            + ", ".join(available_presets())
        ) from None
    return parse_config(text)
