"""Monte Carlo harness: configs, seeding, sweeps, and data emission.

A run is described by an ExperimentConfig, loadable from a sectioned
key-value text file. Every grid point draws from its own counter-based
random stream derived from (master_seed, domain, scheme, point), so
results are reproducible bit for bit no matter how points are spread
across worker processes. Curves are written as CSV files with the full
resolved config embedded as a comment header, plus a gnuplot stub.

The SNR axis of both curve families is the warden-referenced level;
the intended receiver and the warden see it through fixed link-budget
offsets (`bob_gain_db`, `willie_gain_db`). The warden additionally
samples with a sub-chip timing skew (`willie_timing_offset`), since
nothing synchronizes its clock to the transmitter's chip boundaries.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import channel, modem, receivers, warden
from .divergence import kl_sweep
from .grassmann import Codebook, design_codebook, packaged_codebook

__all__ = [
    "ConfigError",
    "CurvePoint",
    "ExperimentConfig",
    "config_text",
    "emit_plot_data",
    "ensure_jb_threshold",
    "load_config",
    "parse_config",
    "preset_config",
    "run_ber_curve",
    "run_detection_curve",
    "run_kl_sweep",
    "save_config",
    "write_kl_csv",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    # link
    schemes: tuple = ("nc", "qpsk", "qam64")
    T: int = 4
    K: int = 64
    snr_grid_db: tuple = (-15.0, -10.0, -5.0)
    detect_snr_grid_db: tuple = (-15.0, -5.0, 5.0)
    trials_per_point: int = 1000
    frames_per_trial: int = 150
    bob_gain_db: float = 27.0
    master_seed: int = 1
    # modem
    pn_taps: tuple = (5, 2)
    pn_state: int = 1
    samples_per_chip: int = 1
    random_pilots: bool = False
    # warden
    cfo: float = 1e-5
    target_pfa: float = 0.05
    warden_sample_count: int = 50000
    willie_gain_db: float = -1.2
    willie_timing_offset: float = 0.235
    jb_calibration_trials: int = 20000
    # divergence
    kl_T_grid: tuple = (2, 4, 6, 8)
    kl_eta: float = 1.5
    kl_samples: int = 50000
    kl_k: int = 1
    # run
    workers: int = 1
    output_path: str = "out"

    def validate(self) -> None:
        if self.trials_per_point < 1:
            raise ConfigError("trials_per_point must be >= 1")
        if self.frames_per_trial < 1:
            raise ConfigError("frames_per_trial must be >= 1")
        for name in ("snr_grid_db", "detect_snr_grid_db"):
            grid = getattr(self, name)
            if len(grid) and any(b <= a for a, b in zip(grid, grid[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        for s in self.schemes:
            if s not in ("nc", "qpsk", "qam64"):
                raise ConfigError(f"schemes: unknown scheme {s!r}")
        if self.T < 2:
            raise ConfigError("T must be >= 2")
        if self.K < 2 or 2 ** int(round(math.log2(self.K))) != self.K:
            raise ConfigError("K must be a power of two >= 2")
        if self.samples_per_chip < 1:
            raise ConfigError("samples_per_chip must be >= 1")
        if not 0.0 < self.target_pfa < 1.0:
            raise ConfigError("target_pfa must be in (0, 1)")
        if not 0.0 <= self.willie_timing_offset < 1.0:
            raise ConfigError("willie_timing_offset must be in [0, 1)")
        if self.warden_sample_count < 1000:
            raise ConfigError("warden_sample_count must be >= 1000")
        if self.jb_calibration_trials < 100:
            raise ConfigError("jb_calibration_trials must be >= 100")
        if self.kl_samples < self.kl_k + 1:
            raise ConfigError("kl_samples must exceed kl_k")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


# field registry: section layout, ordering, and list-vs-scalar typing
_LAYOUT = (
    ("link", ("schemes", "T", "K", "snr_grid_db", "detect_snr_grid_db",
              "trials_per_point", "frames_per_trial", "bob_gain_db", "master_seed")),
    ("modem", ("pn_taps", "pn_state", "samples_per_chip", "random_pilots")),
    ("warden", ("cfo", "target_pfa", "warden_sample_count", "willie_gain_db",
                "willie_timing_offset", "jb_calibration_trials")),
    ("divergence", ("kl_T_grid", "kl_eta", "kl_samples", "kl_k")),
    ("run", ("workers", "output_path")),
)

_LIST_INT = {"pn_taps", "kl_T_grid"}
_LIST_FLOAT = {"snr_grid_db", "detect_snr_grid_db"}
_LIST_STR = {"schemes"}
_SCALAR_INT = {"T", "K", "trials_per_point", "frames_per_trial", "master_seed",
               "pn_state", "samples_per_chip", "warden_sample_count",
               "jb_calibration_trials", "kl_samples", "kl_k", "workers"}
_SCALAR_FLOAT = {"bob_gain_db", "cfo", "target_pfa", "willie_gain_db",
                 "willie_timing_offset", "kl_eta"}
_SCALAR_BOOL = {"random_pilots"}


def _format_value(name, value):
    if name in _LIST_STR:
        return " ".join(value)
    if name in _LIST_INT:
        return " ".join(str(v) for v in value)
    if name in _LIST_FLOAT:
        return " ".join(repr(float(v)) for v in value)
    if name in _SCALAR_FLOAT:
        return repr(float(value))
    if name in _SCALAR_BOOL:
        return "true" if value else "false"
    return str(value)


def _parse_value(name, text):
    try:
        if name in _LIST_STR:
            return tuple(text.split())
        if name in _LIST_INT:
            return tuple(int(v) for v in text.split())
        if name in _LIST_FLOAT:
            return tuple(float(v) for v in text.split())
        if name in _SCALAR_FLOAT:
            return float(text)
        if name in _SCALAR_INT:
            return int(text)
        if name in _SCALAR_BOOL:
            low = text.strip().lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(f"expected a boolean, got {text!r}")
        return text
    except ValueError as e:
        raise ConfigError(f"bad value for {name}: {text!r}") from e


def config_text(cfg: ExperimentConfig) -> str:
    """Canonical text form of a config; also the file format."""
    lines = []
    for section, names in _LAYOUT:
        lines.append(f"[{section}]")
        for name in names:
            lines.append(f"{name} = {_format_value(name, getattr(cfg, name))}")
        lines.append("")
    return "\n".join(lines)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as f:
        f.write(config_text(cfg))


def parse_config_values(text: str) -> dict:
    """Parse the sectioned key-value format into a {field: value} dict;
    unknown sections or keys are errors."""
    known = {name: section for section, names in _LAYOUT for name in names}
    sections = {section for section, _ in _LAYOUT}
    values = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in sections:
                raise ConfigError(f"line {lineno}: unknown section [{current}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if current is None:
            raise ConfigError(f"line {lineno}: key {key!r} appears before any section")
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current}]")
        if known[key] != current:
            raise ConfigError(
                f"line {lineno}: key {key!r} belongs in [{known[key]}], found in [{current}]"
            )
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, val.strip())
    return values


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from text, starting from `base` (or the defaults)."""
    values = parse_config_values(text)
    cfg = replace(base, **values) if base is not None else ExperimentConfig(**values)
    cfg.validate()
    return cfg


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path) as f:
        return parse_config(f.read(), base=base)


# Fig-scale sweep grids (warden-referenced dB). The two curve families
# use different, non-uniform point sets.
_BER_GRID = (-25.0458, -23.108, -21.0165, -19.1246, -17.023, -15.0351,
             -13.1297, -11.0599, -9.0479, -7.1615, -5.133, -2.9648,
             -1.0988, 0.9503, 2.9593, 4.9781)
_DETECT_GRID = (-22.9445, -20.9902, -19.0103, -16.826, -14.8384, -12.9001,
                -10.9993, -9.0029, -6.9405, -5.0077, -2.9026, -0.9073,
                1.0009, 2.9995, 4.9173, 7.1247)


def preset_config(name: str, **overrides) -> ExperimentConfig:
    """Named experiment presets.

    `desk` runs the full sweep grids at 1000 trials per point; `paper`
    is the same at 4000 trials per point.
    """
    if name == "desk":
        trials = 1000
    elif name == "paper":
        trials = 4000
    else:
        raise ConfigError(f"unknown preset {name!r}")
    params = dict(
        snr_grid_db=_BER_GRID,
        detect_snr_grid_db=_DETECT_GRID,
        trials_per_point=trials,
    )
    params.update(overrides)
    cfg = ExperimentConfig(**params)
    cfg.validate()
    return cfg


@dataclass(frozen=True)
class CurvePoint:
    """One point of a metric-vs-x curve with a binomial confidence bound."""

    x: float
    metric_name: str
    value: float
    ci95_halfwidth: float
    trials: int


def _stream(master_seed, *tags):
    # Counter-based stream per (domain, scheme, point): parallel-safe,
    # order-independent across workers.
    seq = np.random.SeedSequence((int(master_seed),) + tuple(int(t) for t in tags))
    return np.random.Generator(np.random.Philox(seq))


_DOMAIN_BER = 0
_DOMAIN_DETECT = 1
_DOMAIN_H0 = 2

_SCHEME_ID = {"nc": 0, "qpsk": 1, "qam64": 2}

_FRAME_CHUNK = 50000
_WINDOW_CHUNK = 64


def _resolve_codebook(cfg, codebook=None) -> np.ndarray:
    if codebook is not None:
        return codebook.points if hasattr(codebook, "points") else np.asarray(codebook)
    try:
        return packaged_codebook(cfg.T, cfg.K).points
    except FileNotFoundError:
        return design_codebook(cfg.T, cfg.K, iterations=1500, seed=42).points


def _binomial_ci(p, n):
    return 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / n) if n else 0.0


# ---------------------------------------------------------------- BER

def _ber_point(args):
    scheme, point_index, snr_db, cfg, X, pn = args
    rng = _stream(cfg.master_seed, _DOMAIN_BER, _SCHEME_ID[scheme], point_index)
    snr = snr_db + cfg.bob_gain_db
    sigma2 = 0.0 if math.isinf(snr) else 10.0 ** (-snr / 10.0)
    spec = modem.FrameSpec.for_scheme(scheme, cfg.T)
    n_frames = cfg.trials_per_point * cfg.frames_per_trial
    bits_per_frame = int(math.log2(cfg.K)) if scheme == "nc" else spec.bits_per_block
    errors = 0
    done = 0
    while done < n_frames:
        nf = min(_FRAME_CHUNK, n_frames - done)
        h = channel.block_fading(nf, rng)
        if scheme == "nc":
            idx = rng.integers(0, cfg.K, nf)
            phases = 2.0 * np.pi * rng.random(nf)
            S = modem.nc_blocks(X, idx, phases)
            Y = h[:, None] * S + channel.awgn((nf, cfg.T), sigma2, rng)
            khat = receivers.noncoherent_ml(Y, X)
            diff = np.bitwise_xor(idx, khat)
            errors += int(modem.index_to_bits(diff, bits_per_frame).sum())
        else:
            bits = rng.integers(0, 2, (nf, bits_per_frame), dtype=np.uint8)
            if scheme == "qpsk":
                S = modem.qpsk_blocks(bits, spec)
            else:
                S = modem.qam64_blocks(bits, spec)
            if cfg.random_pilots:
                pilots = np.exp(2j * np.pi * rng.random((nf, spec.n_pilots)))
                S[:, : spec.n_pilots] = pilots
            else:
                pilots = np.asarray(spec.pilot_values)
            Y = h[:, None] * S + channel.awgn((nf, cfg.T), sigma2, rng)
            hhat = receivers.ls_channel_estimate(Y[:, : spec.n_pilots], pilots)
            # unbiased scalar equalization ahead of the slicers
            z = np.conj(hhat)[:, None] * Y[:, spec.n_pilots :]
            z /= np.maximum(np.abs(hhat)[:, None] ** 2, 1e-300)
            if scheme == "qpsk":
                bhat = receivers.slice_qpsk(z).reshape(nf, -1)
            else:
                bhat = receivers.slice_qam64(z[:, 0])
            errors += int((bhat != bits).sum())
        done += nf
    total_bits = n_frames * bits_per_frame
    ber = errors / total_bits
    return CurvePoint(
        x=snr_db,
        metric_name=f"ber_{scheme}",
        value=ber,
        ci95_halfwidth=_binomial_ci(ber, total_bits),
        trials=cfg.trials_per_point,
    )


# ---------------------------------------------------------- detection

def _window_symbols(scheme, n_windows, n_frames, cfg, X, rng):
    spec = modem.FrameSpec.for_scheme(scheme, cfg.T)
    if scheme == "nc":
        idx = rng.integers(0, cfg.K, (n_windows, n_frames))
        phases = 2.0 * np.pi * rng.random((n_windows, n_frames))
        S = X[idx] * np.exp(1j * phases)[..., None] * np.sqrt(cfg.T)
        return S.reshape(n_windows, n_frames * cfg.T)
    bits = rng.integers(0, 2, (n_windows * n_frames, spec.bits_per_block), dtype=np.uint8)
    if scheme == "qpsk":
        S = modem.qpsk_blocks(bits, spec)
    else:
        S = modem.qam64_blocks(bits, spec)
    if cfg.random_pilots:
        S[:, : spec.n_pilots] = np.exp(
            2j * np.pi * rng.random((S.shape[0], spec.n_pilots))
        )
    return S.reshape(n_windows, n_frames * cfg.T)


def _detect_point(args):
    scheme, point_index, snr_db, cfg, X, pn, threshold = args
    rng = _stream(cfg.master_seed, _DOMAIN_DETECT, _SCHEME_ID[scheme], point_index)
    sigma2 = 10.0 ** (-(snr_db + cfg.willie_gain_db) / 10.0)
    n_obs = cfg.warden_sample_count
    chips_per_frame = cfg.T * pn.size
    # one spare chip feeds the sub-chip interpolation
    n_frames = math.ceil((n_obs + 1) / chips_per_frame)
    tau = cfg.willie_timing_offset
    ramp = np.exp(2j * np.pi * cfg.cfo * np.arange(n_obs))
    scale = np.sqrt(pn.size)  # unit average chip power
    detections = 0
    done = 0
    while done < cfg.trials_per_point:
        b = min(_WINDOW_CHUNK, cfg.trials_per_point - done)
        S = _window_symbols(scheme, b, n_frames, cfg, X, rng)
        chips = modem.spread(S, pn) * scale
        obs = channel.fractional_chip_offset(chips, tau)[:, :n_obs]
        h = channel.block_fading(b, rng)
        obs = obs * h[:, None] * ramp
        obs = obs + channel.awgn((b, n_obs), sigma2, rng)
        V = np.concatenate([obs.real, obs.imag], axis=1)
        stats = warden._jb_batch(V)
        detections += int((stats > threshold).sum())
        done += b
    pd = detections / cfg.trials_per_point
    return CurvePoint(
        x=snr_db,
        metric_name=f"pd_{scheme}",
        value=pd,
        ci95_halfwidth=_binomial_ci(pd, cfg.trials_per_point),
        trials=cfg.trials_per_point,
    )


def _h0_point(args):
    point_index, snr_db, cfg, threshold = args
    rng = _stream(cfg.master_seed, _DOMAIN_H0, 0, point_index)
    n_obs = cfg.warden_sample_count
    alarms = 0
    done = 0
    while done < cfg.trials_per_point:
        b = min(_WINDOW_CHUNK, cfg.trials_per_point - done)
        V = rng.standard_normal((b, 2 * n_obs))
        stats = warden._jb_batch(V)
        alarms += int((stats > threshold).sum())
        done += b
    pfa = alarms / cfg.trials_per_point
    return CurvePoint(
        x=snr_db,
        metric_name="pfa_noise",
        value=pfa,
        ci95_halfwidth=_binomial_ci(pfa, cfg.trials_per_point),
        trials=cfg.trials_per_point,
    )


_CALIBRATION_SEED = 20240


def ensure_jb_threshold(cfg: ExperimentConfig) -> float:
    """Calibrated JB threshold for the configured window, cached on disk.

    Lookup order: the run's output directory, the cache shipped with the
    package, fresh calibration (which is then stored in the output
    directory). The calibration seed is fixed so every run of a given
    configuration shares one threshold.
    """
    key = ("jarque_bera", cfg.warden_sample_count, cfg.target_pfa,
           cfg.jb_calibration_trials, _CALIBRATION_SEED)
    cache = os.path.join(cfg.output_path, "thresholds.json")
    value = warden.load_threshold(cache, *key)
    if value is not None:
        return value
    try:
        import importlib.resources

        ref = importlib.resources.files("grasslink.data").joinpath("thresholds.json")
        if ref.is_file():
            import json

            data = json.loads(ref.read_text())
            packaged = data.get(warden._key(*key))
            if packaged is not None:
                return packaged
    except Exception:
        pass
    value = warden.calibrate_jb_threshold(
        cfg.warden_sample_count,
        cfg.target_pfa,
        trials=cfg.jb_calibration_trials,
        seed=_CALIBRATION_SEED,
    )
    os.makedirs(cfg.output_path, exist_ok=True)
    warden.save_threshold(cache, *key, value)
    return value


# ------------------------------------------------------------- runners

def _map_tasks(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def run_ber_curve(cfg: ExperimentConfig, codebook=None) -> dict:
    """BER over the configured grid for every configured scheme.

    Returns {scheme: [CurvePoint, ...]} in grid order. Every scheme and
    point gets fresh fading, noise, and payloads from its own stream;
    the bit budget per point is identical across schemes.
    """
    cfg.validate()
    X = _resolve_codebook(cfg, codebook)
    pn = modem.msequence(cfg.pn_taps, cfg.pn_state)
    tasks = [
        (scheme, pi, x, cfg, X, pn)
        for scheme in cfg.schemes
        for pi, x in enumerate(cfg.snr_grid_db)
    ]
    points = _map_tasks(_ber_point, tasks, cfg.workers)
    out = {scheme: [] for scheme in cfg.schemes}
    for (scheme, _, _, _, _, _), pt in zip(tasks, points):
        out[scheme].append(pt)
    return out


def run_detection_curve(cfg: ExperimentConfig, codebook=None) -> dict:
    """Warden detection rates over the detect grid, plus the noise-only
    false alarm series, all at one calibrated JB threshold.

    Returns {scheme: [CurvePoint, ...], "noise": [CurvePoint, ...]}.
    """
    cfg.validate()
    X = _resolve_codebook(cfg, codebook)
    pn = modem.msequence(cfg.pn_taps, cfg.pn_state)
    threshold = ensure_jb_threshold(cfg)
    tasks = [
        (scheme, pi, x, cfg, X, pn, threshold)
        for scheme in cfg.schemes
        for pi, x in enumerate(cfg.detect_snr_grid_db)
    ]
    h0_tasks = [(pi, x, cfg, threshold) for pi, x in enumerate(cfg.detect_snr_grid_db)]
    points = _map_tasks(_detect_point, tasks, cfg.workers)
    h0_points = _map_tasks(_h0_point, h0_tasks, cfg.workers)
    out = {scheme: [] for scheme in cfg.schemes}
    for (scheme, *_), pt in zip(tasks, points):
        out[scheme].append(pt)
    out["noise"] = h0_points
    return out


def run_kl_sweep(cfg: ExperimentConfig, estimator: str = "smoothed") -> list:
    """Divergence sweep over the configured T grid at the configured
    spectral efficiency; see divergence.kl_sweep."""
    cfg.validate()
    return kl_sweep(
        cfg.kl_T_grid,
        [cfg.kl_eta],
        n=cfg.kl_samples,
        k=cfg.kl_k,
        seed=cfg.master_seed,
        estimator=estimator,
    )


# ------------------------------------------------------------ emission

def _fmt(v) -> str:
    return f"{v:.12g}"


def _comment_header(cfg) -> list:
    # the [run] section (worker count, output dir) is scheduling detail:
    # leaving it out keeps outputs byte-identical across parallel plans
    lines = ["# curve data"]
    for line in config_text(cfg).splitlines():
        if line == "[run]":
            break
        lines.append(f"# {line}" if line else "#")
    while lines and lines[-1] == "#":
        lines.pop()
    return lines


def emit_plot_data(series, path, cfg: ExperimentConfig | None = None) -> list:
    """Write one CSV per series plus a gnuplot script stub.

    `series` maps metric names to CurvePoint lists (a flat CurvePoint
    list is grouped by metric_name). Returns the written file paths.
    Output is deterministic: re-emitting identical data produces
    identical bytes. Error-rate series get a log-y hint in the script.
    """
    if not series:
        raise ValueError("no series to emit")
    if not isinstance(series, dict):
        grouped = {}
        for pt in series:
            grouped.setdefault(pt.metric_name, []).append(pt)
        series = grouped
    os.makedirs(path, exist_ok=True)
    written = []
    names = sorted(series)
    header = _comment_header(cfg) if cfg is not None else ["# curve data"]
    for name in names:
        pts = series[name]
        csv_path = os.path.join(path, f"{name}.csv")
        lines = list(header)
        lines.append(f"# metric = {name}")
        lines.append("x,value,ci95_halfwidth,trials")
        for pt in pts:
            lines.append(
                f"{_fmt(pt.x)},{_fmt(pt.value)},{_fmt(pt.ci95_halfwidth)},{pt.trials}"
            )
        with open(csv_path, "w") as f:
            f.write("\n".join(lines) + "\n")
        written.append(csv_path)
    logy = any(n.startswith("ber") for n in names)
    gp = [
        "# gnuplot script stub",
        "set datafile separator ','",
        "set key outside",
        "set xlabel 'SNR (dB)'",
    ]
    if logy:
        gp.append("set logscale y  # error-rate series")
    plots = ", ".join(
        f"'{name}.csv' using 1:2 with linespoints title '{name}'" for name in names
    )
    gp.append(f"plot {plots}")
    gp_path = os.path.join(path, "plot.gp")
    with open(gp_path, "w") as f:
        f.write("\n".join(gp) + "\n")
    written.append(gp_path)
    return written


def write_kl_csv(rows, path, cfg: ExperimentConfig | None = None) -> str:
    """Write divergence sweep rows with the standard header."""
    lines = _comment_header(cfg) if cfg is not None else ["# divergence sweep"]
    lines.append("T,eta,K,kl_nats,n,k,seed")
    for r in rows:
        lines.append(
            f"{r.T},{_fmt(r.eta)},{r.K},{_fmt(r.kl_nats)},{r.n},{r.k},{r.seed}"
        )
    text = "\n".join(lines) + "\n"
    with open(path, "w") as f:
        f.write(text)
    return path
