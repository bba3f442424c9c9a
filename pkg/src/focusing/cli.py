"""Command-line front end: ``focusing analyze|sweep|design|field|verify``.

Angles are given in degrees and frequencies in Hz. Exit codes: 0 success,
1 check failure (infeasible design, failed verification), 2 configuration
error.
"""

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .acoustics import SPEED_OF_SOUND, AcousticModel, Wavenumber, build_plant
from .analysis import EQUAL_TOL, IDEAL_TOL, FocusingState, analyze_gram
from .conditions import (
    ConstraintError,
    ExcludedBranchError,
    asymmetric_design,
    osd_design,
    ula_design,
    ula_symmetric_limits,
    upda_zeros,
)
from .fields import export, sample_arc, sample_plane
from .geometry import UPDA, ULA, GeometryError, TwoChannelSymmetric, build_geometry, geometry_from_dict, geometry_to_dict
from .linalg import SINGULAR_TOL, SingularGramError, pseudoinverse, svd_underdetermined
from .presets import HEAD_RADIUS, PRESETS, get_preset
from .verify import run_checks

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Resolved inputs shared by the geometry-driven subcommands."""

    geometry: object
    model: str
    frequencies: tuple
    c: float
    a: float | None
    focus: int
    ideal_tol: float
    equal_tol: float
    singular_tol: float
    label: str

    def layout(self):
        return build_geometry(self.geometry)

    def acoustic_model(self, f):
        lay = self.layout()
        return AcousticModel(self.model, Wavenumber.from_frequency(f, self.c), R=lay.R, far_side=lay.far_side)


def _finite(x):
    """JSON-safe float: non-finite values become null."""
    x = float(x)
    return x if math.isfinite(x) else None


def _dumps(doc):
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def _emit(data, out):
    if isinstance(data, str):
        data = data.encode()
    if out in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(data)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _load_geometry_file(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    schema = json.loads(resources.files("focusing").joinpath("schemas/geometry.schema.json").read_text())
    branch = _variant_branch(schema, doc.get("variant") if isinstance(doc, dict) else None)
    if branch is not None:
        # validate against the matching variant so messages name the bad field
        schema = {**schema["oneOf"][branch], "$defs": schema["$defs"]}
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = [f"{path}: field '{'/'.join(map(str, e.absolute_path)) or '<root>'}': {e.message}" for e in errors]
        raise ConfigError("\n".join(msgs))
    try:
        return geometry_from_dict(doc)
    except (GeometryError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _variant_branch(schema, variant):
    for i, branch in enumerate(schema["oneOf"]):
        if branch["properties"]["variant"].get("const") == variant:
            return i
    return None


def _frequencies(args, a, c):
    chosen = [x is not None for x in (args.freq, args.mu, args.sweep)]
    if sum(chosen) > 1:
        raise ConfigError("give only one of --freq, --mu, --sweep")
    if args.freq is not None:
        f = list(args.freq)
    elif args.mu is not None:
        if a is None:
            raise ConfigError("--mu needs a control-point radius; pass --a")
        f = [Wavenumber.from_mu(m, a, c).frequency for m in args.mu]
    elif args.sweep is not None:
        start, stop, n = args.sweep
        n = int(n)
        if not 0 < start < stop:
            raise ConfigError(f"sweep needs 0 < start < end, got {start}, {stop}")
        if n < 2:
            raise ConfigError(f"sweep needs at least 2 points, got {n}")
        f = np.linspace(start, stop, n).tolist()
        if args.sweep_mu:
            if a is None:
                raise ConfigError("--sweep-mu needs a control-point radius; pass --a")
            f = [Wavenumber.from_mu(m, a, c).frequency for m in f]
    else:
        f = []
    if any(not (v > 0 and math.isfinite(v)) for v in f):
        raise ConfigError("frequencies must be positive and finite")
    return tuple(float(v) for v in f)


def _config(args):
    for name in ("ideal_tol", "equal_tol", "singular_tol"):
        if not getattr(args, name) > 0:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    if (args.preset is None) == (args.geometry is None):
        raise ConfigError("give exactly one of --preset or --geometry")
    if args.preset is not None:
        try:
            p = get_preset(args.preset)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from None
        geo, model, a, focus, label = p.geometry, p.model, p.a, p.focus, p.name
        default_f = (p.frequency,)
    else:
        geo = _load_geometry_file(args.geometry)
        model, a, focus, label = "planewave", getattr(geo, "a", None), 0, args.geometry
        default_f = ()
    if args.a is not None:
        a = args.a
    if args.model is not None:
        model = args.model
    if getattr(args, "focus", None) is not None:
        focus = args.focus
    freqs = _frequencies(args, a, args.c) or default_f
    if not freqs:
        raise ConfigError("no frequency given; use --freq, --mu or --sweep")
    return RunConfig(geo, model, freqs, args.c, a, focus, args.ideal_tol, args.equal_tol, args.singular_tol, label)


def _report(cfg, f):
    """Per-frequency analysis record."""
    lay = cfg.layout()
    model = cfg.acoustic_model(f)
    plant = build_plant(model, lay.sources, lay.points)
    an = analyze_gram(plant, ideal_tol=cfg.ideal_tol, equal_tol=cfg.equal_tol)
    svd = svd_underdetermined(plant.G)
    rec = {
        "frequency": f,
        "k": model.k.k,
        "mu": None if cfg.a is None else model.k.mu(cfg.a),
        **an.to_dict(),
        "gramian_ratio": an.gramian_ratio,
        "singular_values": svd.singular_values.tolist(),
        "rank": svd.rank,
        "kappa": _finite(svd.condition_number),
        "pinv_norm": None,
        "warnings": [],
    }
    try:
        F = pseudoinverse(plant.G, cfg.singular_tol)
        rec["pinv_norm"] = _finite(np.linalg.norm(F, 2))
    except SingularGramError as exc:
        rec["warnings"].append(f"SingularGram: {exc}")
    rec["diag_spread"] = _finite(rec["diag_spread"])
    return rec


def _reports(cfg, workers):
    # executor.map keeps frequency order regardless of completion order
    if workers > 1 and len(cfg.frequencies) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda f: _report(cfg, f), cfg.frequencies))
    return [_report(cfg, f) for f in cfg.frequencies]


def cmd_analyze(args):
    cfg = _config(args)
    doc = {
        "source": cfg.label,
        "geometry": geometry_to_dict(cfg.geometry),
        "model": cfg.model,
        "c": cfg.c,
        "a": cfg.a,
        "tolerances": {"ideal": cfg.ideal_tol, "equal": cfg.equal_tol, "singular": cfg.singular_tol},
        "reports": _reports(cfg, args.workers),
    }
    _emit(_dumps(doc), args.out)
    return EXIT_OK


SWEEP_COLUMNS = ("frequency", "k", "mu", "state", "kappa", "gramian_ratio", "normalized_offdiag", "pinv_norm")


def cmd_sweep(args):
    cfg = _config(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for rec in _reports(cfg, args.workers):
        w.writerow(["" if rec[c] is None else (rec[c] if isinstance(rec[c], str) else format(rec[c], ".17g"))
                    for c in SWEEP_COLUMNS])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _wavelength(args):
    given = [x for x in (args.f, args.wavelength, args.mu) if x is not None]
    if len(given) != 1:
        raise ConfigError("give exactly one of --f, --wavelength, --mu")
    if args.f is not None:
        lam = args.c / args.f
    elif args.wavelength is not None:
        lam = args.wavelength
    else:
        lam = 2 * np.pi * args.a / args.mu
    if not lam > 0:
        raise ConfigError("frequency / wavelength must be positive")
    return lam


def _verify_plant(sources, points, far_side, R, wavelength, c, tol):
    model = AcousticModel("planewave", Wavenumber.from_wavelength(wavelength, c), R=R, far_side=far_side)
    G = build_plant(model, sources, points).G
    an = analyze_gram(G, ideal_tol=tol, equal_tol=tol)
    kappa = svd_underdetermined(G).condition_number
    return {
        "state": an.state.value,
        "normalized_offdiag": an.normalized_offdiag,
        "kappa": _finite(kappa),
        "passed": an.state is FocusingState.SUPER_IDEAL and abs(kappa - 1) <= tol,
    }


def cmd_design(args):
    kind = args.variant
    tol = args.verify_tol
    verification = None
    if kind == "osd":
        d = osd_design(_wavelength(args), args.a, args.n, args.c)
        out = d.to_dict()
        if args.verify and d.feasible:
            lay = build_geometry(TwoChannelSymmetric(args.a, d.gamma_opt, 1.0))
            verification = _verify_plant(lay.sources, lay.points, "sources", 1.0, d.wavelength, args.c, tol)
    elif kind == "asym":
        geo = TwoChannelSymmetric(args.a, np.radians(args.gamma), 1.0, np.radians(args.rotation))
        lay = build_geometry(geo)
        n1, n2 = lay.sources / np.linalg.norm(lay.sources, axis=1, keepdims=True)
        lam = None if args.f is None else args.c / args.f
        d = asymmetric_design(n1, n2, lay.points[0], args.n, lam, args.c)
        out = d.to_dict()
        if args.verify and d.feasible and lam is None:
            verification = _verify_plant(lay.sources, lay.points, "sources", 1.0, d.wavelength, args.c, tol)
    elif kind == "upda":
        try:
            d = upda_zeros(args.L, args.a, np.radians(args.span) / 2, args.n, args.c)
        except ExcludedBranchError as exc:
            out = {"variant": "upda", "feasible": False, "violated": str(exc)}
            _emit(_dumps(out), args.out)
            return EXIT_CHECK
        out = d.to_dict()
        if args.verify:
            lay = build_geometry(UPDA(args.L, np.radians(args.span), args.a, 1.0))
            verification = _verify_plant(lay.sources, lay.points, "sources", 1.0, d.wavelength, args.c, tol)
    elif kind == "ula":
        lam = args.c / args.f
        try:
            d = ula_design(args.L, args.dx, lam, args.offsets, args.c)
        except ConstraintError as exc:
            _emit(_dumps({"variant": "ula", "feasible": False, "violated": str(exc)}), args.out)
            return EXIT_CHECK
        out = d.to_dict()
        if args.verify:
            lay = build_geometry(ULA(args.L, args.dx, d.angles))
            verification = _verify_plant(lay.sources, lay.points, "points", lay.R, lam, args.c, tol)
    else:
        lim = ula_symmetric_limits(args.L, args.dx, args.c / args.f)
        out = {
            "variant": "ula_symmetric",
            "feasible": lim.feasible_three,
            "M_max": lim.M_max,
            "alpha": lim.alpha,
            "angles": list(lim.angles),
            "angles_deg": [float(np.degrees(t)) for t in lim.angles],
            "wavelength_low": lim.wavelength_low,
            "frequency": args.f,
        }
        if not lim.feasible_three:
            out["violated"] = "fewer than three symmetric control directions fit: wavelength > L dx"
        if args.verify and lim.M_max > 1:
            lay = build_geometry(ULA(args.L, args.dx, lim.angles))
            verification = _verify_plant(lay.sources, lay.points, "points", lay.R, args.c / args.f, args.c, tol)
    if verification is not None:
        out["verification"] = verification
    _emit(_dumps(out), args.out)
    failed = not out.get("feasible", True) or (verification is not None and not verification["passed"])
    return EXIT_CHECK if failed else EXIT_OK


def cmd_field(args):
    cfg = _config(args)
    if len(cfg.frequencies) != 1:
        raise ConfigError("field maps take a single frequency")
    lay = cfg.layout()
    if not 0 <= cfg.focus < lay.M:
        raise ConfigError(f"--focus {cfg.focus} out of range for {lay.M} control points")
    model = cfg.acoustic_model(cfg.frequencies[0])
    x0 = lay.points[cfg.focus]
    if args.shape == "arc":
        start, stop, n = args.angles
        if int(n) < 1:
            raise ConfigError("--angles needs at least one sample")
        angles = np.radians(np.linspace(start, stop, int(n)))
        fmap = sample_arc(lay.sources, model, x0, args.radius, angles, cfg.a, args.workers)
    else:
        if not args.extent > 0:
            raise ConfigError("--extent must be positive")
        fmap = sample_plane(lay.sources, model, x0, args.extent, args.resolution, cfg.a, args.workers)
    _emit(export(fmap, args.format), args.out)
    return EXIT_OK


def cmd_verify(args):
    results = run_checks(seed=args.seed, quick=args.quick, perturb=args.perturb)
    lines = [r.line() for r in results]
    ok = all(r.passed for r in results)
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_CHECK


def _offsets(text):
    return tuple(_floats(text))


def _source_options(p, default_model=None):
    p.add_argument("--preset", choices=sorted(PRESETS), help="bundled reference layout")
    p.add_argument("--geometry", metavar="PATH", help="geometry JSON file")
    p.add_argument("--model", choices=("monopole", "planewave"), default=default_model)
    p.add_argument("--freq", type=float, nargs="+", metavar="HZ")
    p.add_argument("--mu", type=float, nargs="+", help="non-dimensional frequencies k a")
    p.add_argument("--sweep", type=float, nargs=3, metavar=("START", "END", "N"), help="linear sweep in Hz")
    p.add_argument("--sweep-mu", action="store_true", help="interpret --sweep bounds as k a")
    p.add_argument("--a", type=float, help="control-point radius in metres")
    p.add_argument("--c", type=float, default=SPEED_OF_SOUND, help="speed of sound in m/s")
    p.add_argument("--ideal-tol", type=float, default=IDEAL_TOL)
    p.add_argument("--equal-tol", type=float, default=EQUAL_TOL)
    p.add_argument("--singular-tol", type=float, default=SINGULAR_TOL)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="focusing", description="Multichannel acoustic focusing analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="JSON report per frequency")
    _source_options(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="CSV of state and conditioning over frequency")
    _source_options(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("design", help="closed-form super-ideal designs")
    dsub = p.add_subparsers(dest="variant", required=True)
    for name in ("osd", "asym", "upda", "ula", "ula-symmetric"):
        d = dsub.add_parser(name)
        d.add_argument("--f", "--freq", dest="f", type=float, metavar="HZ")
        d.add_argument("--c", type=float, default=SPEED_OF_SOUND)
        d.add_argument("--verify", action="store_true", help="rebuild the plant and confirm SuperIdeal")
        d.add_argument("--verify-tol", type=float, default=1e-9)
        d.add_argument("--out", metavar="PATH")
        if name in ("osd", "asym", "upda"):
            d.add_argument("--a", type=float, default=HEAD_RADIUS)
            d.add_argument("--n", type=int, default=1, help="branch index")
        if name == "osd":
            d.add_argument("--wavelength", type=float)
            d.add_argument("--mu", type=float)
        if name == "asym":
            d.add_argument("--gamma", type=float, default=30.0, help="source half-span in degrees")
            d.add_argument("--rotation", type=float, required=True, help="head rotation in degrees")
        if name == "upda":
            d.add_argument("--L", type=int, required=True)
            d.add_argument("--span", type=float, required=True, help="total span in degrees")
        if name in ("ula", "ula-symmetric"):
            d.add_argument("--L", type=int, required=True)
            d.add_argument("--dx", type=float, required=True)
        if name == "ula":
            d.add_argument("--offsets", type=_offsets, required=True, help="e.g. -2,0,2")
        d.set_defaults(func=cmd_design)

    p = sub.add_parser("field", help="beamforming-gain field map")
    fsub = p.add_subparsers(dest="shape", required=True)
    for name in ("arc", "plane"):
        f = fsub.add_parser(name)
        _source_options(f, default_model="monopole")
        f.add_argument("--focus", type=int, help="index of the focus control point")
        f.add_argument("--format", choices=("csv", "json"), default="csv")
        if name == "arc":
            f.add_argument("--radius", type=float, default=1.0)
            f.add_argument("--angles", type=float, nargs=3, default=(-180.0, 180.0, 361),
                           metavar=("START", "END", "N"), help="degrees from +x")
        else:
            f.add_argument("--extent", type=float, default=1.5)
            f.add_argument("--resolution", type=int, default=201)
        f.set_defaults(func=cmd_field)

    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0, help="radians added to every design angle")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_verify)
    return parser


def _join_negative_values(argv):
    # argparse reads "-2,0,2" as an option flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "--offsets":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--offsets={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    argv = _join_negative_values(sys.argv[1:] if argv is None else list(argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, GeometryError, ConstraintError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
