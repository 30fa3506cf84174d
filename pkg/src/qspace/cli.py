"""Command-line entry point.

Exit status: 0 on success, 1 when a check fails, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import math
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import clouds, io as qio, nqm, qset, topology, wells
from .errors import DomainError, ResourceError, SchemaError

COMMANDS = ("qset-demo", "cloud-lattice", "topology-check", "wells-interference", "wells-sweep", "nqm-validate")
TOLERANCE_KEYS = {"hermitian", "unitary"}
CSV_HEADER = ("separation", "depth", "interference", "residual")


class CheckFailed(Exception):
    """The run completed but a verified property did not hold."""


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    sample: int | None = None
    mode: str | None = None
    bound: int = clouds.DEFAULT_BOUND

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError("command", f"unknown command {self.command!r}")
        unknown = set(self.tolerances) - TOLERANCE_KEYS
        if unknown:
            raise SchemaError("--tol", f"unknown tolerance(s) {sorted(unknown)}")


def _num(x: float):
    # JSON has no infinity literal
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def qset_demo(cfg: RunConfig) -> tuple[dict, bool]:
    S = qset.Species
    u = qset.Universe.declare(
        [S("e", qset.Kind.M_SMALL_ATOM), S("Na2p_e", qset.Kind.M_SMALL_ATOM), S("person", qset.Kind.M_ATOM)],
        {"e": 3, "Na2p_e": 6, "person": ["John", "Paul", "Peter"]},
    )
    helium = u.qset(e=2)
    sodium = u.qset(Na2p_e=6)
    b, c, d = qset.disjoint_partition(sodium, [2, 2, 2])
    cb, cc = clouds.cloud(sodium, b), clouds.cloud(sodium, c)
    people = u.qset(person=["Paul", "Peter"])
    report = {
        "helium_qcard": qset.qcard(helium),
        "sodium_qcard": qset.qcard(sodium),
        "sodium_partition": [p.to_spec() for p in (b, c, d)],
        "partition_pairwise_disjoint": all(x.isdisjoint(y) for x, y in ((b, c), (b, d), (c, d))),
        "partition_parts_indiscernible": qset.indiscernible(b, c) and qset.indiscernible(c, d),
        "cloud_of_part": cb.extent.to_spec(),
        "cloud_is_whole_ambient": cb.extent == sodium,
        "clouds_of_disjoint_parts_intersect": clouds.clouds_intersect(cb, cc),
        "swap_electron_indiscernible": qset.swap_indiscernibility_check(helium, "e"),
        "swap_person_indiscernible": qset.swap_indiscernibility_check(people, "person", "Peter", "John"),
        "cloud_collapse_exhaustive": all(
            clouds.cloud(sodium, B).extent == sodium
            for eta in range(1, qset.qcard(sodium) + 1)
            for B in qset.subqsets_of_qcard(sodium, eta)
        ),
    }
    ok = (
        report["helium_qcard"] == 2
        and report["sodium_qcard"] == 6
        and report["partition_pairwise_disjoint"]
        and report["cloud_is_whole_ambient"]
        and report["cloud_collapse_exhaustive"]
        and report["clouds_of_disjoint_parts_intersect"]
        and report["swap_electron_indiscernible"]
        and not report["swap_person_indiscernible"]
    )
    return report, ok


def cloud_lattice(cfg: RunConfig) -> tuple[dict, bool]:
    doc = qio.load_json(cfg.input_path)
    if "covers" in doc:
        try:
            L = clouds.FiniteLattice.from_json(doc)
        except (DomainError, KeyError, TypeError, ValueError) as exc:
            raise SchemaError("covers", str(exc)) from None
    else:
        universe, _ = qio.parse_universe(doc)
        L = clouds.build_cloud_lattice(universe.ambient, cfg.bound)
    laws = clouds.lattice_law_violations(L)
    report = {"elements": list(L.elements), "lattice_law_violations": laws, **clouds.lattice_report(L)}
    return report, not laws


RELABEL_LIMIT = 4  # species with more members are not permuted


def _topology_outputs(cfg: RunConfig, carrier: qset.Qset, T: topology.QTopology | None) -> dict:
    if T is None:
        T = topology.generate_cloud_topology(carrier, cfg.bound)
    return {
        "carrier": carrier.to_spec(),
        "opens": [U.to_spec() for U in T.opens],
        "axioms": topology.verify_axioms(T, sample=cfg.sample, seed=cfg.seed).to_json(),
        **topology.hausdorff_report(T).to_json(),
    }


def topology_check(cfg: RunConfig) -> tuple[dict, bool]:
    _, carrier, T = qio.parse_topology(qio.load_json(cfg.input_path))
    report = _topology_outputs(cfg, carrier, T)
    # rerun under every reordering of the internal handles of small m-atom species
    names = [n for n, c in carrier.composition.items() if 2 <= c <= RELABEL_LIMIT]
    reference, checked, stable = qio.dumps(report), 0, True
    for perms in itertools.product(*(itertools.permutations(range(carrier.count(n))) for n in names)):
        X = carrier
        for name, perm in zip(names, perms):
            X = qset.permute_internal_labels(X, name, perm)
        relabelled = T if T is None else topology.QTopology(X, T.opens)
        stable &= qio.dumps(_topology_outputs(cfg, X, relabelled)) == reference
        checked += 1
    report["relabel_invariance"] = {"ok": stable, "permuted_species": names, "relabellings": checked}
    return report, report["axioms"]["ok"] and stable


def _pair_states(cfg: RunConfig):
    doc = qio.load_json(cfg.input_path)
    ws, n = qio.parse_wells(doc)
    if cfg.mode == "infinite":
        ws = [wells.WellSpec(w.center, w.half_width, math.inf, w.mass, w.hbar) for w in ws]
    elif cfg.mode == "finite":
        for i, w in enumerate(ws):
            if w.infinite:
                raise SchemaError(f"wells[{i}].depth", "finite mode needs a numeric depth")
    try:
        left, right = sorted(ws, key=lambda w: w.center)
        return doc, (left, right), n, wells.TwoParticleState(wells.eigenstate(left, n), wells.eigenstate(right, n))
    except DomainError as exc:
        raise SchemaError("n", str(exc)) from None


def wells_interference(cfg: RunConfig) -> tuple[dict, bool]:
    _, (left, right), n, s = _pair_states(cfg)
    interference = wells.interference_term(s.left, s.right)
    uncertainty = [wells.uncertainty_product(e) for e in (s.left, s.right)]
    separated = wells.non_overlapping(left, right)
    x = wells.default_grid(s).axis()
    A, B = np.meshgrid(x, x, indexing="ij")
    limit = [wells.infinite_well_eigenstate(wells.WellSpec(w.center, w.half_width), n).energy for w in (left, right)]
    report = {
        "antisymmetry_max": float(np.max(np.abs(s.evaluate(A, B) + s.evaluate(B, A)))),
        "density_symmetry_max": float(np.max(np.abs(s.density(A, B) - s.density(B, A)))),
        "infinite_wall_energies": limit,
        "energy_rel_gap": [abs(e.energy - E) / E for e, E in zip((s.left, s.right), limit)],
        "mode": cfg.mode,
        "n": n,
        "non_overlapping": separated,
        "energies": [s.left.energy, s.right.energy],
        "overlap": wells.overlap(s.left, s.right),
        "interference": interference,
        "residual": wells.probability_decomposition_residual(s),
        "uncertainty_products": uncertainty,
        "wells": [{"center": w.center, "half_width": w.half_width, "depth": _num(w.depth)} for w in (left, right)],
    }
    ok = all(u >= 0.5 for u in uncertainty)
    if cfg.mode == "infinite" and separated:
        ok = ok and interference == 0.0
    return report, ok


def wells_sweep(cfg: RunConfig) -> tuple[str, bool, list[str]]:
    doc = qio.load_json(cfg.input_path)
    ws, n = qio.parse_wells(doc)
    seps = qio._require(doc, "separations")
    depths = [qio.parse_depth(d, f"depths[{i}]") for i, d in enumerate(qio._require(doc, "depths"))]
    try:
        rows = wells.separation_sweep(tuple(ws), [float(x) for x in seps], depths, n)
    except DomainError as exc:
        raise SchemaError("separations", str(exc)) from None
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([repr(r.separation), _num(r.depth), repr(r.interference), repr(r.residual)])
    problems = wells.sweep_monotonicity_violations(rows)
    return buf.getvalue(), not problems, problems


def nqm_validate(cfg: RunConfig) -> tuple[dict, bool]:
    structure = qio.parse_structure(qio.load_json(cfg.input_path))
    kw = {f"{k}_tol": v for k, v in cfg.tolerances.items()}
    report = nqm.validate_structure(structure, **kw)
    if report["ok"]:
        rng = np.random.default_rng(cfg.seed)
        checks = [nqm.born_self_check(nqm.Observable(m), rng) for ops in structure.observables for m in ops]
        born = {k: max((c[k] for c in checks), default=0.0) for k in nqm.BORN_LIMITS}
        born["ok"] = all(born[k] <= lim for k, lim in nqm.BORN_LIMITS.items())
        report["born"] = born
        report["ok"] = born["ok"]
    return report, report["ok"]


HANDLERS = {
    "qset-demo": qset_demo,
    "cloud-lattice": cloud_lattice,
    "topology-check": topology_check,
    "wells-interference": wells_interference,
    "nqm-validate": nqm_validate,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if cfg.command == "wells-sweep":
            text, ok, problems = wells_sweep(cfg)
            for p in problems:
                print(f"check failed: {p}", file=stderr)
        else:
            report, ok = HANDLERS[cfg.command](cfg)
            text = qio.dumps(report)
    except (SchemaError, ResourceError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    if cfg.output_path:
        with open(cfg.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not ok:
        print(f"{cfg.command}: check failed", file=stderr)
    return 0 if ok else 1


def _tolerance(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return key, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qspace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, needs_input=True, help=None):
        p = sub.add_parser(name, help=help)
        p.add_argument("--input", dest="input_path", required=needs_input, metavar="JSON")
        p.add_argument("--output", dest="output_path", metavar="FILE")
        p.add_argument("--tol", action="append", type=_tolerance, default=[], metavar="NAME=VALUE")
        p.add_argument("--seed", type=int, default=0)
        return p

    add("qset-demo", needs_input=False, help="quasi-cardinals, partitions, clouds and swap checks")
    add("cloud-lattice", help="cloud lattice of a universe (or a lattice given by covers) and law checks")
    p = add("topology-check", help="q-topology axioms and Hausdorff separation")
    p.add_argument("--sample", type=int, default=None, metavar="N")
    p = add("wells-interference", help="interference term for a pair of wells")
    p.add_argument("--mode", choices=("infinite", "finite"), required=True)
    p = add("wells-sweep", help="interference over separations and depths, as CSV")
    p = add("nqm-validate", help="check the components of a finite NQM structure")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            input_path=args.input_path,
            output_path=args.output_path,
            tolerances=dict(args.tol),
            seed=args.seed,
            sample=getattr(args, "sample", None),
            mode=getattr(args, "mode", None),
        )
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


def fixture_path(name: str) -> str:
    """Filesystem path of a shipped fixture, e.g. ``wells_disjoint.json``."""
    return str(resources.files("qspace.fixtures").joinpath(name))


if __name__ == "__main__":
    sys.exit(main())
