"""Regenerate the canonical-form and plan golden files under fixtures/."""
from __future__ import annotations

from pathlib import Path

from normative import specfmt
from normative.planner import PlanRequest, plan

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

# (directory, domain file, plan requests: name -> (grounding, horizon, segment bound))
SETS = {
    "trading": ("trading.inst", "shop.dom", {"plan_G.trj": ("g.grd", (1, 4), 4)}),
    "game": ("game.inst", "peis.dom", {"plan_G.trj": ("G.grd", (1, 8), 8),
                                       "plan_G_prime.trj": ("G_prime.grd", (1, 8), 8)}),
}


def main() -> None:
    for name, (inst_file, dom_file, plans) in SETS.items():
        src = ROOT / name
        out = src / "golden"
        out.mkdir(exist_ok=True)
        dom = specfmt.load_domain(src / dom_file)
        for path in sorted(src.iterdir()):
            if path.suffix not in specfmt.EXTENSIONS:
                continue
            kw = {"domain": dom} if path.suffix == ".trj" else {}
            value = specfmt.load(path, **kw)
            (out / path.name).write_text(specfmt.serialize(value, dom), encoding="utf-8")
        inst = specfmt.load_institution(src / inst_file)
        for target, (grd, horizon, bound) in plans.items():
            g = specfmt.load_grounding(src / grd)
            result = plan(PlanRequest(inst, dom, g, horizon, bound))
            assert result is not None, target
            (out / target).write_text(specfmt.serialize_trajectory(result.trajectory, dom),
                                      encoding="utf-8")


if __name__ == "__main__":
    main()
