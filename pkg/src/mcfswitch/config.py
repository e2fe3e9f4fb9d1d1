"""Scenario configuration: typed sections, INI loading and hashing.

The file format is a flat INI file, one section per module. Every key is
optional; missing keys keep their defaults. Network links are declared as
``[link:<name>]`` sections.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import io
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import calibration as cal
from .field import ContractError


class ConfigError(ContractError):
    """Invalid configuration value or unknown key."""

    def __init__(self, message: str, section: str | None = None, key: str | None = None):
        super().__init__(message)
        self.section = section
        self.key = key


@dataclass
class DeviceSection:
    splitter: str = "dft"
    input_core: int = 0


@dataclass
class ImpairmentSection:
    loss_db: tuple = cal.CALIBRATED["loss_db"]
    delta_length: tuple = cal.CALIBRATED["delta_length"]
    group_index: float = 1.468
    splitter_loss_db: float = 2.2


@dataclass
class DriftSection:
    diffusion: float = cal.CALIBRATED["diffusion"]
    initial: str = "aligned"


@dataclass
class ActuatorSection:
    dac_bits: int = 12
    v_max: float = 10.0
    v_pi: float = 5.0
    sample_rate: float = 0.8e6
    rise_tau: float = cal.CALIBRATED["rise_tau"]


@dataclass
class ControllerSection:
    step: float = 0.05
    dwell: int = 2
    settle_samples: int = 1
    edge_drop: float = 0.25


@dataclass
class TransceiverSection:
    bit_rate: float = 1e9
    prbs_order: int = 15
    sensitivity_dbm: float = -24.0
    extinction_tx: float = 9.0
    q_ref: float = 6.0


@dataclass
class MonitorSection:
    bandwidth_hz: float = 150e6
    responsivity: float = 1.0
    tap_loss_db: float = 0.0


@dataclass
class ScenarioSection:
    seed: int = 1
    duration_s: float = 15.0
    free_running_s: float = 7.0
    settle_s: float = 0.5
    oversample: int = 10
    record_block: int = 800
    target_core: int = 0


@dataclass
class SwitchingSection:
    duration_s: float = 0.005
    lock_s: float = 0.002
    period_samples: int = 2
    oversample: int = 100
    record_samples: int = 200


@dataclass
class BerSection:
    power_min_dbm: float = -30.0
    power_max_dbm: float = -15.0
    power_step_db: float = 0.05
    stabilize_s: float = 0.05
    mc_bits: int = 10_000_000
    mc_targets: tuple = (1e-3, 1e-4, 1e-5, 1e-6)
    prbs_seed: int = 1


@dataclass
class WdmSection:
    lambda_ref_nm: float = 1550.0
    lambda_min_nm: float = 1527.0
    lambda_max_nm: float = 1569.0
    lambda_step_nm: float = 1.0
    stabilize_s: float = 0.05
    average_s: float = 0.01


@dataclass
class NetworkSection:
    duration_s: float = 16.0
    switch_time_s: float = 15.0
    window_s: float = 0.5
    launch_dbm: float = 0.0


@dataclass
class LinkSection:
    name: str = "link"
    length_m: float = 0.0
    fiber_loss_db_per_km: float = 0.22
    connector_loss_db: float = 0.5
    loopback: bool = True
    core: int = 0


def default_links() -> list[LinkSection]:
    return [
        LinkSection(name="internal", length_m=170.0, core=0),
        LinkSection(name="external", length_m=1305.0, core=1),
    ]


SECTIONS = {
    "device": DeviceSection,
    "impairments": ImpairmentSection,
    "drift": DriftSection,
    "actuator": ActuatorSection,
    "controller": ControllerSection,
    "transceiver": TransceiverSection,
    "monitor": MonitorSection,
    "scenario": ScenarioSection,
    "switching": SwitchingSection,
    "ber": BerSection,
    "wdm": WdmSection,
    "network": NetworkSection,
}


@dataclass
class ScenarioConfig:
    device: DeviceSection = field(default_factory=DeviceSection)
    impairments: ImpairmentSection = field(default_factory=ImpairmentSection)
    drift: DriftSection = field(default_factory=DriftSection)
    actuator: ActuatorSection = field(default_factory=ActuatorSection)
    controller: ControllerSection = field(default_factory=ControllerSection)
    transceiver: TransceiverSection = field(default_factory=TransceiverSection)
    monitor: MonitorSection = field(default_factory=MonitorSection)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    switching: SwitchingSection = field(default_factory=SwitchingSection)
    ber: BerSection = field(default_factory=BerSection)
    wdm: WdmSection = field(default_factory=WdmSection)
    network: NetworkSection = field(default_factory=NetworkSection)
    links: list = field(default_factory=default_links)

    def to_dict(self) -> dict:
        d = {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}
        d["links"] = [dataclasses.asdict(link) for link in self.links]
        return d

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, scenario=dataclasses.replace(self.scenario, seed=int(seed)))

    def validate(self) -> "ScenarioConfig":
        validate(self)
        return self


def _parse_value(raw: str, default, section: str, key: str):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.replace(",", " ").split())
        return raw
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r} for [{section}] {key}", section, key) from None


def _fill(obj, items: dict, section: str):
    known = {f.name for f in fields(obj)}
    for key, raw in items.items():
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{section}]", section, key)
        setattr(obj, key, _parse_value(raw, getattr(obj, key), section, key))
    return obj


def load_config(path=None, text: str | None = None) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from an INI file (or string) over defaults."""
    cfg = ScenarioConfig()
    if path is None and text is None:
        return cfg.validate()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        if text is not None:
            parser.read_string(text)
        else:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {p}")
            parser.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    links = []
    for name in parser.sections():
        items = dict(parser.items(name))
        if name.startswith("link:"):
            links.append(_fill(LinkSection(name=name.split(":", 1)[1]), items, name))
        elif name in SECTIONS:
            _fill(getattr(cfg, name), items, name)
        else:
            raise ConfigError(f"unknown section [{name}]", name)
    if links:
        cfg.links = links
    return cfg.validate()


def _check(cond, msg, section, key=None):
    if not cond:
        raise ConfigError(msg, section, key)


def validate(cfg: ScenarioConfig) -> None:
    d, imp, a, sc = cfg.device, cfg.impairments, cfg.actuator, cfg.scenario
    _check(d.splitter in ("dft", "hadamard"), f"unknown splitter {d.splitter!r}", "device", "splitter")
    _check(0 <= d.input_core < 4, "input_core must be 0..3", "device", "input_core")
    _check(len(imp.loss_db) == 4 and min(imp.loss_db) >= 0, "loss_db needs 4 values >= 0", "impairments", "loss_db")
    _check(len(imp.delta_length) == 4, "delta_length needs 4 values", "impairments", "delta_length")
    _check(1.0 <= imp.group_index <= 2.0, "group_index outside [1, 2]", "impairments", "group_index")
    _check(imp.splitter_loss_db >= 0, "splitter_loss_db must be >= 0", "impairments", "splitter_loss_db")
    _check(cfg.drift.diffusion >= 0, "diffusion must be >= 0", "drift", "diffusion")
    _check(cfg.drift.initial in ("aligned", "random"), "initial must be aligned or random", "drift", "initial")
    _check(8 <= a.dac_bits <= 16, "dac_bits outside [8, 16]", "actuator", "dac_bits")
    _check(a.v_pi > 0 and a.v_max > 0, "v_pi and v_max must be > 0", "actuator")
    _check(a.sample_rate > 0, "sample_rate must be > 0", "actuator", "sample_rate")
    _check(a.rise_tau >= 0, "rise_tau must be >= 0", "actuator", "rise_tau")
    c = cfg.controller
    _check(c.step > 0 and c.dwell >= 1 and c.settle_samples >= 0 and c.edge_drop >= 0,
           "invalid controller parameters", "controller")
    t = cfg.transceiver
    _check(t.bit_rate > 0, "bit_rate must be > 0", "transceiver", "bit_rate")
    _check(7 <= t.prbs_order <= 37, "prbs_order outside [7, 37]", "transceiver", "prbs_order")
    m = cfg.monitor
    _check(m.bandwidth_hz >= a.sample_rate, "monitor bandwidth below control rate", "monitor", "bandwidth_hz")
    _check(m.responsivity > 0 and m.tap_loss_db >= 0, "invalid monitor parameters", "monitor")
    _check(sc.oversample >= 10, "oversample must be >= 10 (timestep <= 1/(10 control rate))", "scenario", "oversample")
    _check(sc.duration_s > 0, "duration must be > 0", "scenario", "duration_s")
    _check(0 <= sc.free_running_s <= sc.duration_s, "free_running_s outside [0, duration]", "scenario", "free_running_s")
    _check(sc.settle_s >= 0, "settle_s must be >= 0", "scenario", "settle_s")
    _check(sc.record_block >= 1, "record_block must be >= 1", "scenario", "record_block")
    _check(0 <= sc.target_core < 4, "target_core must be 0..3", "scenario", "target_core")
    sw = cfg.switching
    _check(sw.period_samples >= 2, "switching period must be >= 2 control samples", "switching", "period_samples")
    _check(sw.oversample >= 10, "oversample must be >= 10", "switching", "oversample")
    _check(0 <= sw.lock_s < sw.duration_s, "lock_s must lie inside the duration", "switching", "lock_s")
    b = cfg.ber
    _check(b.power_max_dbm > b.power_min_dbm and b.power_step_db > 0, "empty BER power grid", "ber")
    _check(b.mc_bits >= 1, "mc_bits must be >= 1", "ber", "mc_bits")
    _check(all(0 < x < 0.5 for x in b.mc_targets), "mc_targets must lie in (0, 0.5)", "ber", "mc_targets")
    w = cfg.wdm
    _check(1527.0 <= w.lambda_min_nm < w.lambda_max_nm <= 1569.0, "WDM grid must lie in [1527, 1569] nm", "wdm")
    _check(w.lambda_min_nm <= w.lambda_ref_nm <= w.lambda_max_nm, "lambda_ref outside the grid", "wdm", "lambda_ref_nm")
    n = cfg.network
    _check(0 < n.switch_time_s < n.duration_s, "switch_time_s must lie inside the duration", "network", "switch_time_s")
    _check(n.window_s > 0, "window_s must be > 0", "network", "window_s")
    _check(len(cfg.links) >= 2, "network needs at least two links", "network")
    for link in cfg.links:
        sec = f"link:{link.name}"
        _check(link.length_m >= 0, "length_m must be >= 0", sec, "length_m")
        _check(link.fiber_loss_db_per_km >= 0 and link.connector_loss_db >= 0, "losses must be >= 0", sec)
        _check(0 <= link.core < 4, "link core must be 0..3", sec, "core")
    _check(len({link.core for link in cfg.links}) == len(cfg.links), "links must use distinct cores", "network")


def dump_config(cfg: ScenarioConfig) -> str:
    """Render a config back to INI text (round-trips through :func:`load_config`)."""
    parser = configparser.ConfigParser(interpolation=None)
    d = cfg.to_dict()
    for name in SECTIONS:
        parser[name] = {k: _fmt(v) for k, v in d[name].items()}
    for link in d["links"]:
        parser[f"link:{link['name']}"] = {k: _fmt(v) for k, v in link.items() if k != "name"}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)
