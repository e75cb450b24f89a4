"""Command-line surface: barcode emission, verification suites, and
non-squeezing certificates.

Exit codes: 0 success (for nonsqueeze: certificate found), 1 verification
failure / no certificate, 2 flag validation, 3 computation error, 4 search
bound exceeded.  All JSON output carries schema "gfs/1" with fixed key
order; outputs are bit-identical for fixed flags and seed.  The environment
variable GFS_WORKERS overrides --workers; config files are line-based
key=value with precedence flags > config > defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import GfsError, SearchBoundExceeded
from .sympl import (Ambient, RadialMap, RadialProfile, lift_contact,
                    ref_profile, shells, translated_chains, verify_chain)
from .genfun import (contact_lift_gf, contact_p, fibre_critical_config,
                     gf_time_one, graph_of, sharp_k)
from .crit import chain_scan, seed_from_chain, sharp_critical_seed
from .equivar import (GroupRing, ball_complex, barcode, circle_complex,
                      is_prime, lens_complex, limit_barcode, rank_mod_p)
from .squeeze import (SqueezeQuery, certificate_json, evidence,
                      find_obstruction)


def parse_scalar(text):
    """Float literal with an optional 'pi' suffix: '-0.9pi' -> -0.9*pi."""
    text = text.strip()
    if text.lower().endswith("pi"):
        return float(text[:-2]) * math.pi
    return float(text)


def parse_profile(text):
    """'REF:c,delta' builds the reference profile; anything else is read as
    a JSON profile file."""
    if text.startswith("REF:"):
        parts = text[4:].split(",")
        if len(parts) != 2:
            raise GfsError("profile must be REF:c,delta or a JSON profile file")
        return ref_profile(parse_scalar(parts[0]), parse_scalar(parts[1]))
    with open(text, "r", encoding="utf-8") as fh:
        return RadialProfile.from_json(fh.read())


def read_config(path):
    """Line-based key=value file; '#' starts a comment."""
    conf = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise GfsError("config line without '=': %r" % line)
            key, value = line.split("=", 1)
            conf[key.strip()] = value.strip()
    return conf


_BOOL_TRUE = {"1", "true", "yes", "on"}


def resolve(args, spec):
    """Merge flag values, config-file values, and defaults (in that
    precedence) into a plain namespace-like dict.

    spec maps option name -> (coercion, default); a flag left at None falls
    through to the config file, then the default.
    """
    conf = {}
    if getattr(args, "config", None):
        conf = read_config(args.config)
    out = {}
    for name, (coerce, default) in spec.items():
        flag = getattr(args, name, None)
        if flag is not None:
            out[name] = flag
        elif name in conf:
            raw = conf[name]
            if coerce is bool:
                out[name] = raw.lower() in _BOOL_TRUE
            else:
                try:
                    out[name] = coerce(raw)
                except ValueError:
                    raise GfsError("config value for %s is not a valid %s: %r"
                                   % (name, coerce.__name__, raw))
        else:
            out[name] = default
    workers = os.environ.get("GFS_WORKERS")
    if workers is not None and "workers" in out:
        try:
            out["workers"] = int(workers)
        except ValueError:
            raise GfsError("GFS_WORKERS must be an integer, got %r" % workers)
    return out


# ---------------------------------------------------------------------------
# barcode


def cmd_barcode(args):
    opts = resolve(args, {
        "n": (int, 1),
        "R": (float, 1.0),
        "k": (int, None),
        "profile": (str, "REF:-0.9pi,0.1"),
        "mode": (str, "equivariant"),
        "limit": (bool, False),
        "lmax": (int, 4),
        "out": (str, "."),
        "workers": (int, 1),
        "seed": (int, 0),
    })
    if opts["k"] is None:
        print("error: --k is required", file=sys.stderr)
        return 2
    k = opts["k"]
    if k != 1 and (k % 2 == 0 or not is_prime(k)):
        print("error: k must be 1 or an odd prime, got %d" % k,
              file=sys.stderr)
        return 2
    if opts["mode"] not in ("equivariant", "plain"):
        print("error: mode must be equivariant or plain", file=sys.stderr)
        return 2
    if opts["workers"] < 1:
        print("error: workers must be >= 1", file=sys.stderr)
        return 2

    try:
        amb = Ambient(n=opts["n"], R=opts["R"])
        if opts["limit"]:
            bc = limit_barcode(amb, k, opts["mode"], lmax=opts["lmax"])
        else:
            rho = parse_profile(opts["profile"])
            cx = ball_complex(amb, rho, k)
            bc = barcode(cx, opts["mode"])
    except (GfsError, OSError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3

    os.makedirs(opts["out"], exist_ok=True)
    json_path = os.path.join(opts["out"], "barcode.json")
    tsv_path = os.path.join(opts["out"], "barcode.tsv")
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(bc.to_json())
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write(bc.to_tsv())
    print("wrote %s (%d bars over F_%d) and %s"
          % (json_path, len(bc), bc.field, tsv_path))
    return 0


# ---------------------------------------------------------------------------
# verify


def _suite_generation(seed):
    amb = Ambient(n=1, R=1.0)
    rho = ref_profile(-0.9 * math.pi, 0.1)
    F = gf_time_one(amb, rho)
    phi = F.map_handle
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        zbar = rng.normal(0.0, 0.55, 2)
        base, zeta = fibre_critical_config(F, zbar)
        w = np.concatenate([base, zeta])
        g = F.grad(w)
        gp = graph_of(phi, zbar)
        worst = max(worst,
                    float(np.max(np.abs(g[2:]))) if len(g) > 2 else 0.0,
                    float(np.max(np.abs(base - gp.base))),
                    float(np.max(np.abs(g[:2] - gp.covector))))
    return [("fibre-critical embedding matches the graph (100 samples)",
             worst < 1e-8, worst)]


def _suite_values(seed):
    amb = Ambient(n=1, R=1.0)
    rho = ref_profile(-0.9 * math.pi, 0.1)
    F = gf_time_one(amb, rho)
    F3 = sharp_k(F, 3)
    sh = shells(amb, rho, 3)
    m1 = [s for s in sh if s.l == 1][0].m
    w = sharp_critical_seed(F, 3, np.array([math.sqrt(m1) * amb.R, 0.0]))
    v = float(F3.value(w))
    phi = RadialMap(amb, rho, 1.0)
    z = np.array([math.sqrt(m1) * amb.R, 0.0])
    ssum = 0.0
    for _ in range(3):
        ssum += float(phi.S(z))
        z = phi(z)
    r1 = abs(v - 5 * math.pi / 6)
    r2 = abs(v - ssum)
    r3 = abs(float(F3.value(np.zeros(F3.total_dim))) - 3 * rho.rho(0.0))
    return [
        ("l=1 shell value = 5pi/6", r1 < 1e-6, r1),
        ("l=1 shell value = sum of primitives", r2 < 1e-6, r2),
        ("origin value = k*rho(0)", r3 < 1e-9, r3),
    ]


def _index_case(n, k):
    amb = Ambient(n=n, R=1.0)
    rho = ref_profile(-0.9 * math.pi, 0.1)
    F = gf_time_one(amb, rho)
    Fk = sharp_k(F, k)
    iota = F.quad_index
    checks = []
    for s in shells(amb, rho, k):
        if s.kind != "sphereShell" or s.l >= k:
            continue
        z = np.zeros(2 * n)
        z[0] = math.sqrt(s.m) * amb.R
        w = sharp_critical_seed(F, k, z)
        evals = np.linalg.eigvalsh(Fk.hess(w))
        radius = float(np.max(np.abs(evals)))
        ztol = 1e-8 * radius
        index = int(np.sum(evals < -ztol))
        nullity = int(np.sum(np.abs(evals) <= ztol))
        nonzero = np.abs(evals)[np.abs(evals) > ztol]
        gap = float(np.min(nonzero) / radius)
        nu = index - k * iota - n * (k - 1)
        ok = (nu == 2 * n * s.l and nullity == 2 * n - 1 and gap >= 1e-4)
        checks.append(("index (n=%d,k=%d,l=%d): maslov %d nullity %d gap %.2g"
                       % (n, k, s.l, nu, nullity, gap), ok,
                       abs(nu - 2 * n * s.l)))
    return checks


def _suite_index(seed):
    out = []
    for n, k in ((1, 3), (1, 5), (2, 3)):
        out.extend(_index_case(n, k))
    return out


def _suite_chains(seed):
    amb = Ambient(n=1, R=1.0)
    rho = ref_profile(-0.9 * math.pi, 0.1)
    chains = translated_chains(amb, rho, 3)
    lift = lift_contact(amb, rho)
    checks = []
    for ch in chains:
        diag = []
        ok = verify_chain(lift, ch, 1e-9, diag)
        checks.append(("chain %s verifies" % ch.orbit_id, ok, 0.0))
    F = gf_time_one(amb, rho)
    P = contact_p(contact_lift_gf(F), 3)
    seeds = [seed_from_chain(P, ch) for ch in chains]
    fams = chain_scan(P, 3, seeds, chains=chains)
    checks.append(("chain_scan finds %d families (expect %d)"
                   % (len(fams), len(chains)), len(fams) == len(chains), 0.0))
    hit = [f for f in fams if f.linked_orbit_id == "shell-l1"]
    res = abs(hit[0].value - 5 * math.pi / 6) if hit else math.inf
    checks.append(("l=1 family action = 5pi/6", res < 1e-6, res))
    free = sum(1 for f in fams
               if f.zk_orbit == "free" and abs(f.value - 5 * math.pi / 6) < 1e-3)
    checks.append(("one free Z_3 family at the l=1 action", free == 1, 0.0))
    return checks


def _suite_invariance(seed):
    amb = Ambient(n=1, R=1.0)
    rho = ref_profile(-0.9 * math.pi, 0.1)
    F = gf_time_one(amb, rho)
    F3 = sharp_k(F, 3)
    P = contact_p(contact_lift_gf(F), 3)
    rng = np.random.default_rng(seed)
    worst_c = 0.0
    for _ in range(1000):
        w = rng.normal(0.0, 0.5, F3.total_dim)
        worst_c = max(worst_c, abs(F3.value(F3.sym_ops["cyclic"](w))
                                   - F3.value(w)))
    worst = {"cyclic": 0.0, "r_action": 0.0, "z_shift": 0.0}
    ops = P.sym_ops
    for _ in range(1000):
        w = rng.normal(0.0, 0.5, P.total_dim)
        v = P.value(w)
        worst["cyclic"] = max(worst["cyclic"],
                              abs(P.value(ops["cyclic"](w)) - v))
        worst["r_action"] = max(worst["r_action"],
                                abs(P.value(ops["r_action"](w, 0.7)) - v))
        worst["z_shift"] = max(worst["z_shift"],
                               abs(P.value(ops["z_shift"](w)) - v))
    return [
        ("sharp cyclic invariance (1000 pts)", worst_c < 1e-12, worst_c),
        ("P cyclic invariance", worst["cyclic"] < 1e-12, worst["cyclic"]),
        ("P scale invariance (a=0.7)", worst["r_action"] < 1e-12,
         worst["r_action"]),
        ("P integer theta-shift invariance", worst["z_shift"] < 1e-12,
         worst["z_shift"]),
    ]


def _suite_algebra(seed):
    checks = []
    ring = GroupRing(5)
    prod = ring.mul(ring.N, ring.T_minus_1)
    checks.append(("(T-1)N = 0 in Z_5[T]/(T^5-1)", ring.is_zero(prod), 0.0))
    for k in (3, 5):
        cx = circle_complex(k)
        ok = (cx.homology_ranks("plain") == {0: 1, 1: 1}
              and cx.homology_ranks("equivariant") == {0: 1, 1: 1}
              and not cx.check_d2())
        checks.append(("circle complex k=%d" % k, ok, 0.0))
    lens = lens_complex(2, 5)
    ok = lens.homology_ranks("plain") == {0: 1, 1: 0, 2: 0, 3: 1}
    checks.append(("lens(2,5) plain ranks (1,0,0,1)", ok, 0.0))
    ok = lens.homology_ranks("equivariant") == {0: 1, 1: 1, 2: 1, 3: 1}
    checks.append(("lens(2,5) coinvariant rank 1 everywhere", ok, 0.0))
    amb = Ambient(n=1, R=1.0)
    rho = ref_profile(-0.9 * math.pi, 0.1)
    cx = ball_complex(amb, rho, 3)
    checks.append(("ball complex d^2 = 0 and filtered",
                   not cx.check_d2() and not cx.check_filtration(), 0.0))
    # Plain two-shell relative homology vanishes between the shells, which
    # pins the connecting map to the norm element.
    alive = [g.value > 0 for g in cx.generators]
    ranks = cx.homology_ranks("plain", alive)
    ok = ranks.get(3, -1) == 0 and ranks.get(4, -1) == 0
    checks.append(("two-shell vanishing forces the norm connector", ok, 0.0))
    return checks


SUITES = {
    "generation": _suite_generation,
    "values": _suite_values,
    "index": _suite_index,
    "chains": _suite_chains,
    "invariance": _suite_invariance,
    "algebra": _suite_algebra,
}


def cmd_verify(args):
    opts = resolve(args, {
        "suite": (str, None),
        "workers": (int, 1),
        "seed": (int, 0),
    })
    suite = opts["suite"]
    if suite is None:
        print("error: --suite is required", file=sys.stderr)
        return 2
    if suite not in SUITES:
        print("error: unknown suite %r (choose from %s)"
              % (suite, ", ".join(sorted(SUITES))), file=sys.stderr)
        return 2
    workers = opts["workers"]
    if workers < 1:
        print("error: workers must be >= 1", file=sys.stderr)
        return 2
    try:
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                future = pool.submit(SUITES[suite], opts["seed"])
                checks = future.result()
        else:
            checks = SUITES[suite](opts["seed"])
    except GfsError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    all_ok = True
    for name, ok, residual in checks:
        all_ok = all_ok and ok
        print("[%s] %s (residual %.3e)" % ("PASS" if ok else "FAIL",
                                           name, residual))
    print("suite %s: %d/%d checks passed"
          % (suite, sum(1 for _, ok, _ in checks if ok), len(checks)))
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# nonsqueeze


def cmd_nonsqueeze(args):
    opts = resolve(args, {
        "A1": (float, None),
        "A2": (float, None),
        "A3": (float, None),
        "max_prime": (int, 10 ** 4),
        "evidence": (bool, False),
        "n": (int, 1),
        "out": (str, None),
    })
    if opts["A1"] is None or opts["A2"] is None:
        print("error: --A1 and --A2 are required", file=sys.stderr)
        return 2
    try:
        q = SqueezeQuery(opts["A1"], opts["A2"], opts["A3"],
                         max_prime=opts["max_prime"])
    except GfsError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    try:
        cert = find_obstruction(q)
        report = None
        if opts["evidence"] and cert.found():
            report = evidence(cert, Ambient(n=opts["n"], R=1.0))
        text = certificate_json(cert, report)
    except SearchBoundExceeded as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 4
    except GfsError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    sys.stdout.write(text)
    if opts["out"]:
        os.makedirs(opts["out"], exist_ok=True)
        path = os.path.join(opts["out"], "certificate.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if cert.found() else 1


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gfs",
        description="Generating-function homology toolkit: barcodes, "
                    "verification suites, and non-squeezing certificates.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("barcode", help="emit barcode JSON and TSV step plot")
    p.add_argument("--n", type=int)
    p.add_argument("--R", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--profile", type=str,
                   help="REF:c,delta (scalars may end in 'pi') or a JSON "
                        "profile file")
    p.add_argument("--mode", choices=["equivariant", "plain"])
    p.add_argument("--limit", action="store_true", default=None,
                   help="emit the idealized steep-profile limit barcode")
    p.add_argument("--lmax", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", type=str)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", type=str,
                   help="one of: %s" % ", ".join(sorted(SUITES)))
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", type=str)

    p = sub.add_parser("nonsqueeze", help="search for a non-squeezing "
                                          "obstruction certificate")
    p.add_argument("--A1", type=float)
    p.add_argument("--A2", type=float)
    p.add_argument("--A3", type=float)
    p.add_argument("--max-prime", dest="max_prime", type=int)
    p.add_argument("--evidence", action="store_true", default=None)
    p.add_argument("--n", type=int)
    p.add_argument("--out", type=str)
    p.add_argument("--config", type=str)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if args.command is None:
        parser.print_help()
        return 2
    try:
        if args.command == "barcode":
            return cmd_barcode(args)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "nonsqueeze":
            return cmd_nonsqueeze(args)
    except GfsError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3
    parser.print_help()
    return 2


if __name__ == "__main__":
    sys.exit(main())
