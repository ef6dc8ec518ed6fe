"""FER/BER sweeps over Eb/N0 with paired noise across decoders.

Every SNR point draws its frames in fixed-size blocks.  Block b of point i
uses the Philox stream keyed by (seed, i, b), so results depend only on the
config and never on the number of workers or on the order in which points
finish.  All decoders in the set see the same received vectors.
"""

from __future__ import annotations

import json
import logging
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import norm

from .channel import awgn, bpsk_map, ebn0_to_sigma, hard_decision, stream
from .decoders import (
    bdd_decode_batch,
    hd_decode_batch,
    map_decode_batch,
    ml_decode_batch,
    oracle_map_batch,
    oracle_ml_batch,
    trellis_map_batch,
    trellis_ml_batch,
)
from .gf2 import CodewordStream, GeneratorMatrix, encode, get_code, index_to_message
from .network import build_mlnn, build_slnn, fixed_alpha, forward_mlnn, forward_slnn

log = logging.getLogger(__name__)

DECODERS = ("slnn", "mlnn", "ml", "map", "ml-trellis", "map-trellis", "bdd", "hd", "oracle-ml", "oracle-map")
# decoders whose cost grows with 2^k (the trellis ones only with the state count)
HEAVY = {"slnn", "mlnn", "ml", "map", "ml-trellis", "map-trellis", "oracle-ml", "oracle-map"}
DAT_COLUMNS = ("ebn0_db", "fer", "ber", "frames", "frame_errors", "bit_errors")


def _names(value) -> tuple[str, ...]:
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    return tuple(value)


@dataclass(frozen=True)
class SimConfig:
    code: str
    decoders: tuple[str, ...]
    ebn0_start: float
    ebn0_stop: float
    ebn0_step: float = 1.0
    min_frame_errors: int = 100
    max_frames: int | None = None
    min_frames: int = 0
    seed: int = 0
    alpha: str = "matched"  # or "fixed@<dB>"
    block_frames: int | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "decoders", _names(self.decoders))
        unknown = [d for d in self.decoders if d not in DECODERS]
        if unknown:
            raise ValueError(f"unknown decoder(s) {', '.join(unknown)}; choose from {', '.join(DECODERS)}")
        if not self.ebn0_step > 0:
            raise ValueError("ebn0 step must be positive")
        if self.ebn0_stop < self.ebn0_start:
            raise ValueError("ebn0 stop must not be below start")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be at least 1")
        if self.max_frames is None:
            object.__setattr__(self, "max_frames", self.default_max_frames())
        if self.max_frames < self.min_frame_errors:
            raise ValueError("max_frames must be at least min_frame_errors")
        if self.min_frames > self.max_frames:
            raise ValueError("min_frames must not exceed max_frames")
        if self.block_frames is None:
            object.__setattr__(self, "block_frames", 10_000 if self.k <= 16 else 1_000)
        if self.block_frames < 1 or self.workers < 1:
            raise ValueError("block_frames and workers must be positive")
        parse_alpha(self.alpha)
        get_code(self.code)

    @property
    def k(self) -> int:
        return get_code(self.code).k

    def default_max_frames(self) -> int:
        if self.k > 16 and HEAVY.intersection(self.decoders):
            return 10**5
        return 10**7

    def grid(self) -> list[float]:
        count = int(math.floor((self.ebn0_stop - self.ebn0_start) / self.ebn0_step + 1e-9)) + 1
        return [round(self.ebn0_start + i * self.ebn0_step, 10) for i in range(count)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["decoders"] = list(self.decoders)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        names = {f.name for f in fields(cls)}
        extra = set(d) - names
        if extra:
            raise ValueError(f"unknown config key(s): {', '.join(sorted(extra))}")
        return cls(**d)


def parse_alpha(spec: str) -> float | None:
    """None for "matched", else the Eb/N0 (dB) whose matched alpha is frozen."""
    if spec == "matched":
        return None
    if spec.startswith("fixed@"):
        try:
            return float(spec[6:])
        except ValueError:
            pass
    raise ValueError(f"alpha must be 'matched' or 'fixed@<dB>', got {spec!r}")


@dataclass
class SimRecord:
    code: str
    decoder: str
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    k: int
    seed: int
    elapsed_seconds: float = 0.0
    fer: float = field(init=False)
    ber: float = field(init=False)

    def __post_init__(self):
        if not 0 <= self.frame_errors <= self.frames:
            raise ValueError("frame_errors must lie in [0, frames]")
        if not 0 <= self.bit_errors <= self.k * self.frame_errors:
            raise ValueError("bit_errors must lie in [0, k * frame_errors]")
        self.fer = self.frame_errors / self.frames if self.frames else 0.0
        self.ber = self.bit_errors / (self.frames * self.k) if self.frames else 0.0

    def dat_line(self) -> str:
        return f"{self.ebn0_db:.6g} {self.fer:.6g} {self.ber:.6g} {self.frames} {self.frame_errors} {self.bit_errors}"


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    z = norm.ppf(0.5 + confidence / 2.0)
    p = errors / trials
    z2n = z * z / trials
    center = (p + z2n / 2.0) / (1.0 + z2n)
    half = z * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials)) / (1.0 + z2n)
    # the closed form hits 0 and 1 exactly at the extremes; keep rounding out
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


def wilson_halfwidth(errors: int, trials: int, confidence: float = 0.95) -> float:
    lo, hi = wilson_interval(errors, trials, confidence)
    return (hi - lo) / 2.0


# ----------------------------------------------------------------------
# decoder registry
# ----------------------------------------------------------------------


def make_decoder(name: str, code: GeneratorMatrix, sigma: float, alpha: str = "matched") -> Callable[[np.ndarray], np.ndarray]:
    """Map a (B, n) batch of received rows to (B, k) decided message bits.

    sigma = 0 sends the soft bit-wise rules to their alpha -> inf limit,
    which is codeword-wise ML.
    """
    k = code.k
    cws = CodewordStream(code)

    def ml(R):
        return index_to_message(ml_decode_batch(code, R)[0], k)

    if name == "slnn":
        net = build_slnn(cws)
        return lambda R: index_to_message(forward_slnn(net, R, keep_scores=False).index, k)
    if name == "mlnn":
        at = parse_alpha(alpha)
        net = build_mlnn(cws, "matched" if at is None else fixed_alpha(at, code.rate))
        return lambda R: forward_mlnn(net, R, sigma).bits
    if name == "ml":
        return ml
    if name == "map":
        return ml if sigma == 0 else (lambda R: map_decode_batch(code, R, sigma)[0])
    if name == "ml-trellis":
        return lambda R: trellis_ml_batch(code, R)[0]
    if name == "map-trellis":
        return (lambda R: trellis_ml_batch(code, R)[0]) if sigma == 0 else (lambda R: trellis_map_batch(code, R, sigma)[0])
    if name == "bdd":
        return lambda R: bdd_decode_batch(code, hard_decision(R))[0]
    if name == "hd":
        return lambda R: hd_decode_batch(code, R)
    if name == "oracle-ml":
        return ml if sigma == 0 else (lambda R: index_to_message(oracle_ml_batch(code, R, sigma), k))
    if name == "oracle-map":
        return ml if sigma == 0 else (lambda R: oracle_map_batch(code, R, sigma)[0])
    raise ValueError(f"unknown decoder {name!r}")


# ----------------------------------------------------------------------
# one SNR point
# ----------------------------------------------------------------------


def draw_block(code: GeneratorMatrix, sigma: float, seed: int, snr_index: int, block: int, size: int):
    """Uniform messages and their received vectors for one block of frames."""
    rng = stream(seed, snr_index, block)
    msgs = rng.integers(0, 2, size=(size, code.k), dtype=np.uint8)
    R = awgn(bpsk_map(encode(code, msgs)), sigma, rng)
    return msgs, R


def run_point(config: SimConfig, ebn0_db: float, snr_index: int = 0) -> list[SimRecord]:
    if not config.decoders:
        return []
    code = get_code(config.code)
    sigma = ebn0_to_sigma(ebn0_db, code.rate)
    decoders = {d: make_decoder(d, code, sigma, config.alpha) for d in config.decoders}
    frames = 0
    fe = dict.fromkeys(decoders, 0)
    be = dict.fromkeys(decoders, 0)
    spent = dict.fromkeys(decoders, 0.0)
    block = 0
    while True:
        size = min(config.block_frames, config.max_frames - frames)
        msgs, R = draw_block(code, sigma, config.seed, snr_index, block, config.block_frames)
        msgs, R = msgs[:size], R[:size]
        for name, dec in decoders.items():
            t0 = time.perf_counter()
            wrong = dec(R) != msgs
            spent[name] += time.perf_counter() - t0
            be[name] += int(wrong.sum())
            fe[name] += int(wrong.any(axis=1).sum())
        frames += size
        block += 1
        if frames >= config.max_frames:
            break
        if frames >= config.min_frames and min(fe.values()) >= config.min_frame_errors:
            break
    return [
        SimRecord(config.code, d, ebn0_db, frames, fe[d], be[d], code.k, config.seed, spent[d])
        for d in decoders
    ]


# ----------------------------------------------------------------------
# sweeps
# ----------------------------------------------------------------------


def _point_job(cfg: dict, ebn0_db: float, snr_index: int) -> list[SimRecord]:
    return run_point(SimConfig.from_dict(cfg), ebn0_db, snr_index)


def write_dat(path: Path, records: list[SimRecord]) -> None:
    lines = ["# " + " ".join(DAT_COLUMNS)]
    lines += [r.dat_line() for r in sorted(records, key=lambda r: r.ebn0_db)]
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_dat(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, comments="#"))


def versions() -> dict:
    import numba
    import scipy

    from . import __version__

    return {
        "codebooknet": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def code_metadata(code: GeneratorMatrix) -> dict:
    meta = {"name": code.name, "n": code.n, "k": code.k, "rows": [format(r, f"0{code.n}b")[::-1] for r in code.rows]}
    for key, val in code.meta.items():
        meta[key] = list(val) if isinstance(val, tuple) else val
    return meta


def manifest(config: SimConfig, command: str | None = None) -> dict:
    return {
        "command": command,
        "config": config.to_dict(),
        "code": code_metadata(get_code(config.code)),
        "grid": config.grid(),
        "seeds": {"master": config.seed, "stream_key": "(seed, snr_index, block_index)", "block_frames": config.block_frames},
        "versions": versions(),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }


def write_config_text(path: Path, config: SimConfig) -> None:
    lines = []
    for key, val in config.to_dict().items():
        if isinstance(val, list):
            val = ",".join(val)
        lines.append(f"{key}={val}")
    path.write_text("\n".join(lines) + "\n")


def run_sweep(config: SimConfig, out_dir=None, command: str | None = None) -> list[SimRecord]:
    """Run every grid point; with ``out_dir``, rewrite the .dat files after each point.

    Returns records sorted by (decoder, ebn0).  A failing write is logged
    and the sweep carries on.
    """
    if not config.decoders:
        return []
    grid = config.grid()
    records: list[SimRecord] = []
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "manifest.json").write_text(json.dumps(manifest(config, command), indent=2) + "\n")
        write_config_text(out / "config.txt", config)
    io_errors = []

    def collect(point_records):
        records.extend(point_records)
        if out is None:
            return
        for dec in config.decoders:
            path = out / f"{config.code}_{dec}.dat"
            try:
                write_dat(path, [r for r in records if r.decoder == dec])
            except OSError as exc:
                log.error("could not write %s at %s dB: %s", path, point_records[0].ebn0_db, exc)
                io_errors.append(str(path))

    if config.workers > 1 and len(grid) > 1:
        cfg = config.to_dict()
        with ProcessPoolExecutor(max_workers=min(config.workers, len(grid))) as pool:
            futures = [pool.submit(_point_job, cfg, e, i) for i, e in enumerate(grid)]
            for fut in futures:
                collect(fut.result())
    else:
        for i, e in enumerate(grid):
            collect(run_point(config, e, i))
            log.info("%s %s dB done", config.code, e)
    records.sort(key=lambda r: (r.decoder, r.ebn0_db))
    return records
