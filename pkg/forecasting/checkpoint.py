"""Self-describing text checkpoints for CdfmState.

Layout: one ``key value`` header line per scalar, then one block per tensor::

    tensor <name> <dim> <dim> ...
    <row-major values, space separated, round-trip decimal>

Floats are written with ``repr`` so a save/load cycle is exact and two saves
of the same state are byte-identical.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from config.settings import CHECKPOINT_FORMAT, CHECKPOINT_VERSION
from exceptions.forecast_exceptions import CheckpointError
from forecasting.backbone import DenseLayer, DLinearParams
from forecasting.cdfm import CdfmState

logger = logging.getLogger(__name__)

_DLINEAR_TENSORS = ("W_seasonal", "b_seasonal", "W_trend", "b_trend")


def _format_values(values: np.ndarray) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(values, dtype=np.float64).ravel())


def dumps_checkpoint(state: CdfmState) -> str:
    lines: List[str] = [
        f"format {CHECKPOINT_FORMAT}",
        f"version {CHECKPOINT_VERSION}",
        f"L {state.L}",
        f"H {state.H}",
        f"N {state.N}",
        f"kernel {state.stationary.kernel}",
        f"individual {'true' if state.stationary.individual else 'false'}",
        f"fusion {state.fusion}",
        f"alpha {state.alpha!r}",
        f"rho {state.rho!r}",
        f"epsilon {state.epsilon!r}",
        f"channels {json.dumps(list(state.channel_names))}",
        f"mask {' '.join(str(int(m)) for m in state.mask)}",
    ]
    for name, tensor in state.parameters().items():
        shape = " ".join(str(d) for d in tensor.shape)
        lines.append(f"tensor {name} {shape}".rstrip())
        lines.append(_format_values(tensor))
    return "\n".join(lines) + "\n"


def save_checkpoint(state: CdfmState, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_checkpoint(state))
    logger.info(f"Saved checkpoint to {path}")
    return path


def _parse_header(lines: List[str]):
    header: Dict[str, str] = {}
    index = 0
    while index < len(lines) and not lines[index].startswith("tensor "):
        line = lines[index]
        index += 1
        if not line.strip():
            continue
        key, _, value = line.partition(" ")
        header[key] = value
    return header, index


def _parse_tensors(lines: List[str], index: int) -> Dict[str, np.ndarray]:
    tensors: Dict[str, np.ndarray] = {}
    while index < len(lines):
        line = lines[index]
        if not line.strip():
            index += 1
            continue
        parts = line.split()
        if parts[0] != "tensor" or len(parts) < 2:
            raise CheckpointError(f"line {index + 1}: expected 'tensor <name> <shape>', got {line[:60]!r}")
        name = parts[1]
        try:
            shape = tuple(int(d) for d in parts[2:])
        except ValueError as e:
            raise CheckpointError(f"line {index + 1}: bad shape for tensor '{name}'") from e
        if index + 1 >= len(lines):
            raise CheckpointError(f"tensor '{name}' has no value line")
        raw = lines[index + 1].split()
        try:
            values = np.array([float(v) for v in raw], dtype=np.float64)
        except ValueError as e:
            raise CheckpointError(f"tensor '{name}' holds a non-numeric value") from e
        expected = int(np.prod(shape)) if shape else 1
        if values.size != expected:
            raise CheckpointError(
                f"tensor '{name}' declares shape {shape} but holds {values.size} values"
            )
        tensors[name] = values.reshape(shape)
        index += 2
    return tensors


def loads_checkpoint(text: str) -> CdfmState:
    lines = text.splitlines()
    header, index = _parse_header(lines)

    if header.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"not a {CHECKPOINT_FORMAT} document")
    if header.get("version") != str(CHECKPOINT_VERSION):
        raise CheckpointError(
            f"unsupported checkpoint version {header.get('version')!r}, expected {CHECKPOINT_VERSION}"
        )
    try:
        L, H, N = int(header["L"]), int(header["H"]), int(header["N"])
        kernel = int(header["kernel"])
        individual = header["individual"] == "true"
        fusion = header["fusion"]
        alpha, rho = float(header["alpha"]), float(header["rho"])
        epsilon = float(header["epsilon"])
        channel_names = tuple(json.loads(header["channels"]))
        mask = np.array([float(m) for m in header["mask"].split()], dtype=np.float64)
    except KeyError as e:
        raise CheckpointError(f"checkpoint header is missing '{e.args[0]}'") from e
    except ValueError as e:
        raise CheckpointError(f"malformed checkpoint header: {e}") from e

    if len(channel_names) != N or mask.shape != (N,):
        raise CheckpointError(f"header declares N={N} but lists {len(channel_names)} channels / {mask.size} mask entries")

    tensors = _parse_tensors(lines, index)
    C = N if individual else 1
    expected_shapes = {}
    for prefix in ("stationary", "nonstationary"):
        expected_shapes[f"{prefix}.W_seasonal"] = (C, H, L)
        expected_shapes[f"{prefix}.b_seasonal"] = (C, H)
        expected_shapes[f"{prefix}.W_trend"] = (C, H, L)
        expected_shapes[f"{prefix}.b_trend"] = (C, H)
    expected_shapes["sigma_predictor.W"] = (1, L + 1)
    expected_shapes["sigma_predictor.b"] = (1,)
    expected_shapes["lambda"] = (N,)

    missing = sorted(set(expected_shapes) - set(tensors))
    if missing:
        raise CheckpointError(f"checkpoint is missing tensors {missing}")
    for name, shape in expected_shapes.items():
        if tensors[name].shape != shape:
            raise CheckpointError(f"tensor '{name}' has shape {tensors[name].shape}, expected {shape}")

    def dlinear(prefix: str) -> DLinearParams:
        return DLinearParams(
            **{name: tensors[f"{prefix}.{name}"] for name in _DLINEAR_TENSORS}, kernel=kernel
        )

    return CdfmState(
        stationary=dlinear("stationary"),
        nonstationary=dlinear("nonstationary"),
        sigma_predictor=DenseLayer(W=tensors["sigma_predictor.W"], b=tensors["sigma_predictor.b"]),
        lam=tensors["lambda"],
        mask=mask,
        alpha=alpha,
        rho=rho,
        fusion=fusion,
        epsilon=epsilon,
        channel_names=channel_names,
    )


def load_checkpoint(path) -> CdfmState:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    state = loads_checkpoint(path.read_text(encoding="utf-8"))
    logger.info(f"Loaded checkpoint {path.name}: L={state.L}, H={state.H}, N={state.N}")
    return state
