"""
Self-contained JSON fixtures: channel, sounding matrices, measurements and
(optionally) the ground-truth blockage. Complex numbers are [re, im] pairs;
tau and Psi are decimal strings with 17 significant digits.
"""

import os
import json
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

import config
from diagnosis import numerics
from diagnosis.errors import FixtureError
from processing.utils import create_dir, format_param, from_pairs, to_pairs
from simulation.blockage import (
    BlockagePattern,
    JointBlockagePattern,
    pattern_from_params,
)
from simulation.channel import ArrayGeometry
from simulation.sounding import SoundingSet, build_joint_operator

logger = logging.getLogger(__name__)


@dataclass
class Fixture:
    scenario: str
    seed: int
    mode: str
    geometry: Union[ArrayGeometry, tuple]
    H: np.ndarray
    sounding: SoundingSet
    pattern: Optional[Union[BlockagePattern, JointBlockagePattern]] = None
    p_b: Optional[float] = None
    snr_db: Optional[float] = None

    @property
    def h(self):
        return numerics.vec(self.H)


def _pattern_to_dict(pattern):
    return {
        "mode": pattern.mode,
        "b": to_pairs(pattern.b),
        "support": [int(n) for n in pattern.support],
        "tau": [format_param(t) for t in pattern.tau],
        "psi": [format_param(p) for p in pattern.psi],
    }


def _pattern_from_dict(d, n_antennas):
    pattern = pattern_from_params(
        n_antennas,
        d["support"],
        [float(t) for t in d["tau"]],
        [float(p) for p in d["psi"]],
        d["mode"],
    )
    if "b" in d:
        b = from_pairs(d["b"], "truth.b")
        if b.shape != pattern.b.shape:
            raise FixtureError("truth.b has length {} for {} antennas".format(
                len(b), n_antennas))
        if not np.allclose(b, pattern.b, rtol=0, atol=1e-9):
            raise FixtureError("truth.b contradicts the stored tau and psi")
        pattern = BlockagePattern(
            mode=pattern.mode, b=b, support=pattern.support,
            tau=pattern.tau, psi=pattern.psi,
        )
    return pattern


def fixture_to_dict(fixture):
    if fixture.scenario == "joint":
        geom_r, geom_t = fixture.geometry
        geometry = {"rx": geom_r.to_dict(), "tx": geom_t.to_dict()}
    else:
        geometry = fixture.geometry.to_dict()
    sounding = {
        "precoders": to_pairs(fixture.sounding.precoders),
        "y": to_pairs(fixture.sounding.y),
    }
    if fixture.sounding.is_joint:
        sounding["combiners"] = to_pairs(fixture.sounding.combiners)
    d = {
        "format": config.FIXTURE_FORMAT,
        "scenario": fixture.scenario,
        "seed": fixture.seed,
        "mode": fixture.mode,
        "p_b": fixture.p_b,
        "snr_db": fixture.snr_db,
        "noise_var": fixture.sounding.noise_var,
        "geometry": geometry,
        "channel": {"H": to_pairs(fixture.H)},
        "sounding": sounding,
    }
    if fixture.pattern is not None:
        if isinstance(fixture.pattern, JointBlockagePattern):
            d["truth"] = {
                "tx": _pattern_to_dict(fixture.pattern.tx),
                "rx": _pattern_to_dict(fixture.pattern.rx),
            }
        else:
            d["truth"] = _pattern_to_dict(fixture.pattern)
    return d


def write_fixture(fixture, path):
    create_dir(os.path.dirname(path))
    try:
        with open(path, "w") as json_file:
            json.dump(fixture_to_dict(fixture), json_file, indent=2, sort_keys=False)
            json_file.write("\n")
    except OSError as e:
        raise OSError("cannot write fixture {}: {}".format(path, e)) from e
    logger.info("fixture written to {}".format(path))


def _read_json(path):
    try:
        with open(path, "r") as read_file:
            text = read_file.read()
    except OSError as e:
        raise FixtureError("cannot read {}: {}".format(path, e)) from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FixtureError(
            "{}: line {} column {}: {}".format(path, e.lineno, e.colno, e.msg)
        ) from e


def _geometry_from_dict(d, scenario):
    if scenario == "joint":
        return (ArrayGeometry.from_dict(d["rx"]), ArrayGeometry.from_dict(d["tx"]))
    return ArrayGeometry.from_dict(d)


def _channel_from_dict(d, scenario):
    geometry = _geometry_from_dict(d["geometry"], scenario)
    H = numerics.as_cmat(from_pairs(d["channel"]["H"], "channel.H"), "channel.H")
    if scenario == "joint":
        expected = (geometry[0].n_antennas, geometry[1].n_antennas)
    else:
        expected = geometry.shape
    if H.shape != expected:
        raise FixtureError(
            "channel.H is {} but the geometry needs {}".format(H.shape, expected)
        )
    return geometry, H


def fixture_from_dict(d, path="<fixture>", channel_doc=None):
    try:
        if d.get("format") != config.FIXTURE_FORMAT:
            raise FixtureError(
                "{}: field 'format' must be {!r}".format(path, config.FIXTURE_FORMAT)
            )
        scenario = d["scenario"]
        if scenario not in config.SCENARIOS:
            raise FixtureError("{}: field 'scenario' must be one of {}".format(
                path, config.SCENARIOS))
        geometry, H = _channel_from_dict(channel_doc or d, scenario)

        s = d["sounding"]
        F = numerics.as_cmat(from_pairs(s["precoders"], "sounding.precoders"))
        y = numerics.as_cvec(from_pairs(s["y"], "sounding.y"))
        noise_var = float(d.get("noise_var", 0.0))
        n_r, n_t = H.shape if scenario == "joint" else (1, H.size)
        if F.shape != (len(y), n_t):
            raise FixtureError(
                "{}: field 'sounding.precoders' is {} but needs ({}, {})".format(
                    path, F.shape, len(y), n_t)
            )
        if scenario == "joint":
            W = numerics.as_cmat(from_pairs(s["combiners"], "sounding.combiners"))
            if W.shape != (len(y), n_r):
                raise FixtureError(
                    "{}: field 'sounding.combiners' is {} but needs ({}, {})".format(
                        path, W.shape, len(y), n_r)
                )
            sounding = SoundingSet(precoders=F, y=y, noise_var=noise_var,
                                   operator=build_joint_operator(F, W), combiners=W)
        else:
            sounding = SoundingSet(precoders=F, y=y, noise_var=noise_var, operator=F)

        pattern = None
        if d.get("truth") is not None:
            t = d["truth"]
            if scenario == "joint":
                pattern = JointBlockagePattern(
                    tx=_pattern_from_dict(t["tx"], n_t),
                    rx=_pattern_from_dict(t["rx"], n_r),
                )
            else:
                pattern = _pattern_from_dict(t, n_t)
    except KeyError as e:
        raise FixtureError("{}: missing field {}".format(path, e)) from e
    except (TypeError, ValueError) as e:
        if isinstance(e, FixtureError):
            raise
        raise FixtureError("{}: {}".format(path, e)) from e

    return Fixture(
        scenario=scenario,
        seed=int(d.get("seed", 0)),
        mode=d.get("mode", "partial"),
        geometry=geometry,
        H=H,
        sounding=sounding,
        pattern=pattern,
        p_b=d.get("p_b"),
        snr_db=d.get("snr_db"),
    )


def load_fixture(path, channel_path=None):
    """
    Load a fixture; `channel_path` optionally supplies the geometry and
    channel sections from another file.
    """
    d = _read_json(path)
    channel_doc = _read_json(channel_path) if channel_path else None
    if not isinstance(d, dict) or (channel_doc is not None and not isinstance(channel_doc, dict)):
        raise FixtureError("{}: top-level JSON value must be an object".format(path))
    return fixture_from_dict(d, path=path, channel_doc=channel_doc)
