"""Access to the shipped fixture of the published four-agent example."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np


def _load(name: str) -> dict:
    return json.loads(resources.files("budget_pds").joinpath("fixtures").joinpath(name).read_text())


def example_fixture() -> dict:
    return _load("four_agent.json")


def example_run_config(run: str = "run1") -> dict:
    return _load(f"four_agent_{run}.json")


def example_influence(fx: dict | None = None) -> np.ndarray:
    fx = fx or example_fixture()
    A = np.zeros((fx["n"], fx["n"]))
    for key, val in fx["influence_upper"].items():
        i, k = (int(s) - 1 for s in key.split("-"))
        A[i, k] = A[k, i] = val
    return A
