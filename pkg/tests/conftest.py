from __future__ import annotations

from pathlib import Path

import pytest

from normative import specfmt

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
TRADING = FIXTURES / "trading"
GAME = FIXTURES / "game"


@pytest.fixture(scope="session")
def trading():
    dom = specfmt.load_domain(TRADING / "shop.dom")
    return {
        "inst": specfmt.load_institution(TRADING / "trading.inst"),
        "cyclic": specfmt.load_institution(TRADING / "cyclic.inst"),
        "dom": dom,
        "g": specfmt.load_grounding(TRADING / "g.grd"),
        "tau_a": specfmt.load_trajectory(TRADING / "tau_a.trj", dom),
        "tau_b": specfmt.load_trajectory(TRADING / "tau_b.trj", dom),
    }


@pytest.fixture(scope="session")
def game():
    return {
        "inst": specfmt.load_institution(GAME / "game.inst"),
        "dom": specfmt.load_domain(GAME / "peis.dom"),
        "G": specfmt.load_grounding(GAME / "G.grd"),
        "G_prime": specfmt.load_grounding(GAME / "G_prime.grd"),
        "swapped": specfmt.load_grounding(GAME / "swapped.grd"),
    }
