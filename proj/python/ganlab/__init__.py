"""Python front end for the GAN lab engine.

The heavy lifting happens in the compiled ``_ganlab`` module; this package
adds dict-based wrappers over its JSON protocol.
"""

from __future__ import annotations

import json
import os
from typing import Any, Dict, List, Optional

from ._ganlab import (
    ConfigError,
    ContractError,
    DecodeError,
    GanlabError,
    NumericalError,
    ShapeError,
    TransitionError,
    decode_frame,
    density_grid,
    js_divergence,
    kl_divergence,
    quad_area,
    run_cli,
    sample,
)
from ._ganlab import Session as _Session

__all__ = [
    "ConfigError",
    "ContractError",
    "DecodeError",
    "GanlabError",
    "NumericalError",
    "ShapeError",
    "TransitionError",
    "Session",
    "decode_frame",
    "density_grid",
    "js_divergence",
    "kl_divergence",
    "quad_area",
    "run",
    "run_cli",
    "sample",
]

Frame = Dict[str, Any]


def _decode(frames: List[str]) -> List[Frame]:
    return [json.loads(f) for f in frames]


class Session:
    """One interactive session. Commands go in as dicts, frames come back as dicts."""

    def __init__(
        self,
        seed: int = 0,
        distribution: str = "two_gaussians",
        frame_interval: int = 1,
        config: Optional[Dict[str, Any]] = None,
        points=None,
    ) -> None:
        self._s = _Session(
            seed=seed,
            distribution=distribution,
            frame_interval=frame_interval,
            config_json=json.dumps(config) if config else "",
            points=points,
        )

    def command(self, name: str, **args: Any) -> List[Frame]:
        msg = {"kind": "command", "name": name, "args": args}
        return _decode(self._s.handle(json.dumps(msg)))

    def send(self, message: Dict[str, Any]) -> List[Frame]:
        return _decode(self._s.handle(json.dumps(message)))

    def tick(self, n: int = 1) -> List[Frame]:
        out: List[Frame] = []
        for _ in range(n):
            out.extend(_decode(self._s.tick()))
        return out

    def snapshot(self) -> Dict[str, Any]:
        return json.loads(self._s.snapshot())["payload"]

    def metrics_csv(self) -> str:
        return self._s.metrics_csv()

    @property
    def mode(self) -> str:
        return self._s.mode

    @property
    def epoch(self) -> int:
        return self._s.epoch


def run(out_dir: str, **flags: Any) -> Dict[str, Any]:
    """Headless training run. Keyword flags map onto CLI options
    (``lr_d=0.01`` becomes ``--lr-d 0.01``). Returns the parsed summary."""
    args = []
    for key, value in flags.items():
        args += ["--" + key.replace("_", "-"), str(value)]
    args += ["--out-dir", os.fspath(out_dir)]
    code, out, err = run_cli(args)
    if code == 2:
        raise ConfigError(err.strip() or out.strip())
    with open(os.path.join(out_dir, "summary.json")) as fh:
        summary = json.load(fh)
    summary["exit_code"] = code
    return summary
