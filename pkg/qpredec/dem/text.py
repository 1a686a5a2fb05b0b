"""Reading and writing the detector error model text format.

Text is parsed and flattened by ``stim.DetectorErrorModel``: repeat blocks are
unrolled, detector and coordinate shifts applied, and the components of an
``error`` separated by ``^`` are XOR-combined into one mechanism. On top of the
Stim grammar the model is held to stricter rules: probabilities lie in (0, 1),
repeat counts are positive and no mechanism flips an observable without a detector.
"""
import logging
import os
import warnings
from typing import List, Optional, Sequence, Tuple, Union

import stim

from qpredec.dem.model import (
    DetectorErrorModel,
    DetectorInfo,
    Mechanism,
    UndetectableMechanismError,
)

logger = logging.getLogger(__name__)


class DemSyntaxError(ValueError):
    """Malformed detector error model text.

    Parameters
    ----------
    message : str
    line, column : int
        1-based position of the offending instruction.
    """

    def __init__(self, message: str, line: int, column: int):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


def _check_repeat_counts(model: stim.DetectorErrorModel):
    for item in model:
        if isinstance(item, stim.DemRepeatBlock):
            if item.repeat_count < 1:
                raise ValueError(f"`repeat` count must be >= 1, got {item.repeat_count}.")
            _check_repeat_counts(item.body_copy())


def _error_targets(instruction: stim.DemInstruction) -> Tuple[List[int], List[int]]:
    detectors, observables = set(), set()
    for target in instruction.targets_copy():
        if target.is_relative_detector_id():
            detectors ^= {target.val}
        elif target.is_logical_observable_id():
            observables ^= {target.val}
    return sorted(detectors), sorted(observables)


def dem_from_stim(model: stim.DetectorErrorModel) -> DetectorErrorModel:
    """Convert a Stim detector error model.

    Parameters
    ----------
    model : stim.DetectorErrorModel

    Returns
    -------
    dem : DetectorErrorModel
        Indices absolute; ``rounds`` is set only when every detector carries
        coordinates, the final coordinate being the round.

    Raises
    ------
    ValueError
        On a probability outside (0, 1) or a repeat count below 1.
    UndetectableMechanismError
        On an error flipping observables without any detector.
    """
    _check_repeat_counts(model)
    mechanisms = []
    coords = {}
    for instruction in model.flattened():
        if instruction.type == "error":
            [probability] = instruction.args_copy()
            if not 0. < probability < 1.:
                raise ValueError(f"probability must be in (0, 1), got {probability}.")
            detectors, observables = _error_targets(instruction)
            if not detectors:
                if observables:
                    raise UndetectableMechanismError(
                        f"undetectable logical error channel flipping observables {observables}."
                    )
                logger.debug("dropping error(%s) with no targets", probability)
                continue
            if probability >= 0.5:
                warnings.warn(
                    f"mechanism {len(mechanisms)} has probability {probability} >= 0.5.",
                    UserWarning,
                )
            mechanisms.append(Mechanism(
                probability=probability,
                detectors=detectors,
                observables=observables,
                source_ids=(len(mechanisms),),
            ))
        elif instruction.type == "detector":
            args = instruction.args_copy()
            for target in instruction.targets_copy():
                coords[target.val] = tuple(args) if args else None

    detectors = tuple(
        DetectorInfo(index=i, coords=coords.get(i)) for i in range(model.num_detectors)
    )
    rounds = None
    if detectors and all(d.round is not None for d in detectors):
        rounds = max(d.round for d in detectors) + 1
    return DetectorErrorModel(
        mechanisms=tuple(mechanisms),
        detectors=detectors,
        num_detectors=model.num_detectors,
        num_observables=model.num_observables,
        rounds=rounds,
    )


def _closed_prefix(lines: Sequence[str], end: int) -> str:
    depth = 0
    for line in lines[:end]:
        code = line.split("#", 1)[0]
        depth += code.count("{") - code.count("}")
    text = "\n".join(lines[:end])
    if depth > 0:
        text += "\nshift_detectors 0" + "\n}" * depth
    return text


def _prefix_fails(lines: Sequence[str], end: int) -> bool:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            dem_from_stim(stim.DetectorErrorModel(_closed_prefix(lines, end)))
        except ValueError:
            return True
    return False


def _locate(text: str) -> Optional[Tuple[int, int]]:
    """1-based line and column of the first instruction the text cannot get past.

    Open repeat blocks of a prefix are closed before it is checked, so a failing
    prefix pins the line. Returns None when every prefix succeeds.
    """
    lines = text.split("\n")
    low, high = 1, len(lines)
    if not _prefix_fails(lines, high):
        return None
    while low < high:
        middle = (low + high) // 2
        if _prefix_fails(lines, middle):
            high = middle
        else:
            low = middle + 1
    line = lines[low - 1]
    return low, len(line) - len(line.lstrip()) + 1


def _last_instruction(text: str) -> Tuple[int, int]:
    lines = text.split("\n")
    for number in range(len(lines), 0, -1):
        line = lines[number - 1]
        if line.split("#", 1)[0].strip():
            return number, len(line) - len(line.lstrip()) + 1
    return 1, 1


def parse_dem(text: str) -> DetectorErrorModel:
    """Parse detector error model text into a flattened model.

    Parameters
    ----------
    text : str

    Returns
    -------
    dem : DetectorErrorModel
        See :func:`dem_from_stim`.

    Raises
    ------
    DemSyntaxError
        On malformed text, a probability outside (0, 1) or a repeat count below 1.
    UndetectableMechanismError
        On an error instruction flipping observables without any detector.
    """
    try:
        dem = dem_from_stim(stim.DetectorErrorModel(text))
    except UndetectableMechanismError as error:
        line, _ = _locate(text) or _last_instruction(text)
        raise UndetectableMechanismError(f"line {line}: {error}") from None
    except ValueError as error:
        message = str(error).strip().splitlines()[0] if str(error).strip() else "invalid text"
        position = _locate(text)
        if position is None:
            position = _last_instruction(text)
            message = f"unterminated repeat block ({message})"
        raise DemSyntaxError(message, *position) from None
    logger.debug("parsed %d mechanisms over %d detectors", dem.num_mechanisms,
                 dem.num_detectors)
    return dem


def dem_to_stim(dem: DetectorErrorModel) -> stim.DetectorErrorModel:
    """Flattened Stim model with declarations, observables and mechanisms in order."""
    model = stim.DetectorErrorModel()
    for info in dem.detectors:
        model.append("detector", list(info.coords or ()),
                     [stim.target_relative_detector_id(info.index)])
    for j in range(dem.num_observables):
        model.append("logical_observable", [], [stim.target_logical_observable_id(j)])
    for mechanism in dem.mechanisms:
        targets = [stim.target_relative_detector_id(d) for d in mechanism.detectors]
        targets += [stim.target_logical_observable_id(o) for o in mechanism.observables]
        model.append("error", [mechanism.probability], targets)
    return model


def serialize_dem(dem: DetectorErrorModel, comments: Sequence[str] = ()) -> str:
    """Write a model as flattened detector error model text.

    Parameters
    ----------
    dem : DetectorErrorModel
    comments : sequence of str, optional
        Extra header comment lines.

    Returns
    -------
    text : str
        Parses back to a model with the same structure.
    """
    rounds = dem.rounds if dem.rounds is not None else "unknown"
    lines = [
        "# qpredec detector error model",
        f"# detectors: {dem.num_detectors} observables: {dem.num_observables} "
        f"mechanisms: {dem.num_mechanisms} rounds: {rounds}",
    ]
    lines.extend(f"# {comment}" for comment in comments)
    body = str(dem_to_stim(dem)).strip()
    if body:
        lines.append(body)
    return "\n".join(lines) + "\n"


def load_dem(path: Union[str, os.PathLike]) -> DetectorErrorModel:
    with open(path, "r", encoding="utf-8") as f:
        return parse_dem(f.read())


def save_dem(dem: DetectorErrorModel, path: Union[str, os.PathLike]):
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_dem(dem))
