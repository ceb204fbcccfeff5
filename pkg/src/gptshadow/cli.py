"""Command-line front end.

Fragment-producing commands (``zoo``, ``holevo``, ``shadow``, ``tomography``,
``hyperdec``) print the fragment JSON on stdout unless ``-o`` is given, so
they can feed the analysis commands through a pipe.  Under ``--json`` the
single report document is printed instead and carries the fragment under
``output``; the loaders accept either form.

Exit status: 2 for unreadable or invalid input and failed preconditions,
1 for a negative verdict of ``validate``, ``simplex``, ``equiv`` and
``verify-embedding``, 0 otherwise.
"""

from __future__ import annotations

import argparse
import inspect
import json
import sys
from typing import List, Optional, Tuple

import numpy as np

from . import constructions
from .classify import classify_fragment
from .embedding import check_equivalence, simplex_embed, verify_embedding
from .errors import BadParams, GptError, ValidationFailed
from .fragment import Strictness, data_table, is_tomographic, validate
from .io import (
    dump_fragment,
    load_fragment,
    load_maps,
    load_matrix,
    load_table,
    table_to_csv,
    write_text,
)
from .numerics import Tolerance
from .shadow import quotient_shadow, tomography

__all__ = ["main", "run", "build_parser"]


class Report:
    def __init__(self, command: str):
        self.command = command
        self.inputs: List[str] = []
        self.verdicts: dict = {}
        self.artifacts: List[str] = []
        self.output: Optional[dict] = None
        self.lines: List[str] = []
        self.exit_status = 0

    def say(self, line: str = ""):
        self.lines.append(line)

    def to_dict(self):
        d = {
            "command": self.command,
            "inputs": self.inputs,
            "verdicts": self.verdicts,
            "artifacts": self.artifacts,
            "exit_status": self.exit_status,
        }
        if self.output is not None:
            d["output"] = self.output
        return d


def _fmt(v) -> str:
    return np.array2string(np.asarray(v), precision=6, suppress_small=True)


def _src(path):
    return path if path not in (None, "-") else "<stdin>"


def _emit_fragment(frag, args, rep: Report):
    """Write to -o, or hand the fragment to stdout."""
    if args.output:
        dump_fragment(frag, args.output)
        rep.artifacts.append(args.output)
        rep.say(f"wrote {args.output}")
    else:
        rep.output = frag.to_dict()


# ----------------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------------


def cmd_validate(args, tol, rep):
    rep.inputs.append(_src(args.fragment))
    f = load_fragment(args.fragment)
    strict = Strictness.LENIENT if args.lenient else Strictness.STRICT
    r = validate(f, tol, strict)
    rep.verdicts["validation"] = r.to_dict()
    rep.verdicts["tomographic"] = is_tomographic(f, tol)
    rep.say(f"{f.name}: {'passed' if r.passed else 'FAILED'} ({strict.value})")
    for x in r.findings:
        rep.say(f"  [{x.severity.value}] {x.check}: {x.message}")
    rep.say(f"tomographic: {rep.verdicts['tomographic']}")
    return 0 if r.passed else 1


def cmd_table(args, tol, rep):
    rep.inputs.append(_src(args.fragment))
    f = load_fragment(args.fragment)
    t = data_table(f)
    text = table_to_csv(t)
    rep.verdicts["shape"] = list(t.shape)
    if args.output:
        write_text(args.output, text)
        rep.artifacts.append(args.output)
        rep.say(f"wrote {args.output} ({t.shape[0]} effects x {t.shape[1]} states)")
    else:
        rep.verdicts["table"] = t.entries.tolist()
        rep.lines.append(text.rstrip("\n"))
    return 0


def cmd_shadow(args, tol, rep):
    rep.inputs.append(_src(args.fragment))
    f = load_fragment(args.fragment)
    sh = quotient_shadow(f, tol)
    g = sh.shadow.inner
    rep.verdicts["shadow"] = {
        "k": sh.k,
        "n_states": g.n_states,
        "n_effects": g.n_effects,
        "states_faithful": sh.states_faithful,
        "effects_faithful": sh.effects_faithful,
    }
    rep.say(f"shadow of {f.name}: dimension {sh.k}, {g.n_states} extremal states, {g.n_effects} effects")
    rep.say(f"faithful: states {sh.states_faithful}, effects {sh.effects_faithful}")
    if args.maps:
        write_text(args.maps, json.dumps({"iota": sh.sigma.tolist(), "kappa": sh.tau.tolist()}, indent=2) + "\n")
        rep.artifacts.append(args.maps)
        rep.say(f"wrote shadow maps to {args.maps}")
    _emit_fragment(g, args, rep)
    return 0


def cmd_tomography(args, tol, rep):
    rep.inputs.append(_src(args.table))
    t = load_table(args.table)
    res = tomography(t, tol)
    g = res.gpt.inner
    rep.verdicts["tomography"] = {"k": res.k, "n_states": g.n_states, "n_effects": g.n_effects}
    rep.say(f"rank {res.k}: {g.n_states} extremal states, {g.n_effects} effects")
    _emit_fragment(g, args, rep)
    return 0


def cmd_simplex(args, tol, rep):
    rep.inputs.append(_src(args.gpt))
    f = load_fragment(args.gpt)
    cert = simplex_embed(f, tol)
    rep.verdicts["simplex"] = cert.to_dict()
    rep.say(f"{f.name}: {cert.verdict.value}")
    if cert.embeddable:
        rep.say(f"witness into the simplex of dimension {cert.dimension}")
        rep.say("iota =\n" + _fmt(cert.witness_maps.iota))
        rep.say("kappa =\n" + _fmt(cert.witness_maps.kappa))
    else:
        rep.say("Farkas vector y (y.A <= 0, y.b > 0):")
        rep.say(_fmt(cert.farkas))
    if args.output:
        write_text(args.output, json.dumps(cert.to_dict(), indent=2) + "\n")
        rep.artifacts.append(args.output)
    return 0 if cert.embeddable else 1


def cmd_classify(args, tol, rep):
    rep.inputs.append(_src(args.fragment))
    f = load_fragment(args.fragment)
    r = classify_fragment(f, args.ambient_simplicial, tol, direct=args.direct)
    rep.verdicts["classification"] = r.to_dict()
    rep.say(f"{f.name}: case {r.case.value if r.case else 'undetermined'}")
    rep.say(f"  fragment tomographic: {r.fragment_tomographic}")
    rep.say(f"  shadow embeddable:    {r.shadow_embeddable}")
    rep.say(f"  fragment verdict:     {r.fragment_verdict.value}")
    if r.warning:
        rep.say(f"warning: {r.warning}")
    return 0


def cmd_equiv(args, tol, rep):
    rep.inputs += [_src(args.a), _src(args.b)]
    a, b = load_fragment(args.a), load_fragment(args.b)
    maps = check_equivalence(a, b, tol)
    rep.verdicts["equivalent"] = maps is not None
    if maps is None:
        rep.say(f"{a.name} and {b.name} are not equivalent")
        return 1
    rep.verdicts["witness"] = maps.to_dict()
    rep.say(f"{a.name} and {b.name} are equivalent")
    rep.say("iota =\n" + _fmt(maps.iota))
    rep.say("kappa =\n" + _fmt(maps.kappa))
    if args.output:
        write_text(args.output, json.dumps(maps.to_dict(), indent=2) + "\n")
        rep.artifacts.append(args.output)
    return 0


def cmd_verify_embedding(args, tol, rep):
    rep.inputs += [_src(args.src), _src(args.dst), _src(args.maps)]
    src, dst = load_fragment(args.src), load_fragment(args.dst)
    maps = load_maps(args.maps)
    r = verify_embedding(src, dst, maps, tol)
    rep.verdicts["embedding"] = r.to_dict()
    rep.say(f"{src.name} -> {dst.name}: {'verified' if r.passed else 'FAILED'}")
    for x in r.findings:
        rep.say(f"  [{x.severity.value}] {x.check}: {x.message}")
    return 0 if r.passed else 1


def cmd_holevo(args, tol, rep):
    rep.inputs.append(_src(args.gpt))
    f = load_fragment(args.gpt)
    hb = constructions.holevo(f, tol)
    rep.verdicts["holevo"] = {"L": hb.L.tolist(), "L_r_inv": hb.L_r_inv.tolist()}
    rep.say("L =\n" + _fmt(hb.L))
    rep.say("right inverse =\n" + _fmt(hb.L_r_inv))
    _emit_fragment(hb.fragment, args, rep)
    return 0


def cmd_hyperdec(args, tol, rep):
    rep.inputs += [_src(args.gpt), _src(args.H)]
    f = load_fragment(args.gpt)
    H = load_matrix(args.H, "H")
    hb = constructions.hyperdecohere(f, H, tol)
    g = hb.decohered.inner
    rep.verdicts["hyperdecoherence"] = {
        "n_states": g.n_states,
        "n_effects": g.n_effects,
        "subsystem_witness_verified": True,
    }
    rep.say(f"decohered {f.name}: {g.n_states} extremal states, {g.n_effects} effects")
    _emit_fragment(g, args, rep)
    return 0


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def cmd_zoo(args, tol, rep):
    name = args.name
    ctor = constructions._ZOO.get(name)
    params = {}
    positional = []
    for tok in args.params:
        if "=" in tok:
            k, v = tok.split("=", 1)
            params[k.strip()] = _parse_value(v.strip())
        else:
            positional.append(_parse_value(tok))
    if ctor is not None and positional:
        names = list(inspect.signature(ctor).parameters)
        if len(positional) > len(names):
            raise BadParams(f"{name} takes at most {len(names)} parameters")
        for k, v in zip(names, positional):
            params.setdefault(k, v)
    if name == "random" and "seed" not in params:
        params["seed"] = args.seed if args.seed is not None else 0
    f = constructions.zoo(name, **params)
    rep.verdicts["zoo"] = {"name": f.name, "n_states": f.n_states, "n_effects": f.n_effects}
    rep.say(f"{f.name}: {f.n_states} states in R^{f.state_dim}, {f.n_effects} effects in R^{f.effect_dim}")
    _emit_fragment(f, args, rep)
    return 0


# ----------------------------------------------------------------------------
# Parser and dispatch
# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="comparison tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for random constructions")
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print one JSON report only")

    p = argparse.ArgumentParser(
        prog="gptshadow",
        description="Shadows, tomography and simplex embeddability of GPT fragments.",
        parents=[common],
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check a fragment file")
    sp.add_argument("fragment", nargs="?", default="-")
    sp.add_argument("--lenient", action="store_true", help="complement closure only warns")

    sp = add("table", cmd_table, "print or write the data table as CSV")
    sp.add_argument("fragment", nargs="?", default="-")
    sp.add_argument("-o", "--output")

    sp = add("shadow", cmd_shadow, "compute the quotient shadow")
    sp.add_argument("fragment", nargs="?", default="-")
    sp.add_argument("-o", "--output")
    sp.add_argument("--maps", help="write the shadow maps as iota/kappa JSON")

    sp = add("tomography", cmd_tomography, "reconstruct a GPT from a CSV table")
    sp.add_argument("table", nargs="?", default="-")
    sp.add_argument("-o", "--output")

    sp = add("simplex", cmd_simplex, "decide simplex embeddability of a GPT")
    sp.add_argument("gpt", nargs="?", default="-")
    sp.add_argument("-o", "--output", help="write the certificate as JSON")

    sp = add("classify", cmd_classify, "four-case classification of a fragment")
    sp.add_argument("fragment", nargs="?", default="-")
    sp.add_argument("--ambient-simplicial", action="store_true")
    sp.add_argument("--direct", action="store_true", help="decide the fragment itself when the shadow is silent")

    sp = add("equiv", cmd_equiv, "decide equivalence of two GPTs")
    sp.add_argument("a")
    sp.add_argument("b")
    sp.add_argument("-o", "--output", help="write the witness maps")

    sp = add("verify-embedding", cmd_verify_embedding, "check an embedding witness")
    sp.add_argument("src")
    sp.add_argument("dst")
    sp.add_argument("maps")

    sp = add("holevo", cmd_holevo, "Holevo fragment of a GPT")
    sp.add_argument("gpt", nargs="?", default="-")
    sp.add_argument("-o", "--output")

    sp = add("hyperdec", cmd_hyperdec, "hyperdecohere a GPT with a matrix H")
    sp.add_argument("gpt")
    sp.add_argument("H")
    sp.add_argument("-o", "--output")

    sp = add("zoo", cmd_zoo, f"named constructions: {', '.join(constructions.ZOO_NAMES)}")
    sp.add_argument("name")
    sp.add_argument("params", nargs="*", help="key=value or positional parameters")
    sp.add_argument("-o", "--output")
    return p


def run(argv=None) -> Tuple[int, Report]:
    """Execute one command; returns the exit status and the report."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        rep = Report("?")
        rep.exit_status = 2 if exc.code else 0
        return rep.exit_status, rep
    for k, v in (("tol", None), ("seed", None), ("json", False)):
        if not hasattr(args, k):
            setattr(args, k, v)
    rep = Report(args.command)
    try:
        tol = Tolerance() if args.tol is None else Tolerance(args.tol, args.tol)
        status = args.func(args, tol, rep)
    except ValidationFailed as exc:
        status = 2
        rep.verdicts["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if exc.report is not None:
            rep.verdicts["validation"] = exc.report.to_dict()
        rep.say(f"error: {exc}")
    except (GptError, ValueError, KeyError, OSError) as exc:
        status = 2
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        rep.verdicts["error"] = {"type": type(exc).__name__, "message": str(msg)}
        rep.verdicts.setdefault("findings", []).append(
            {"check": type(exc).__name__, "severity": "Error", "message": str(msg)}
        )
        rep.say(f"error: {type(exc).__name__}: {msg}")
    rep.exit_status = status
    rep.json = args.json
    return status, rep


def main(argv=None) -> int:
    status, rep = run(argv)
    if rep.command == "?":
        return status
    if getattr(rep, "json", False):
        print(json.dumps(rep.to_dict(), indent=2))
        return status
    out = sys.stdout
    if rep.output is not None:
        # fragment JSON on stdout for pipelines; commentary on stderr
        print(json.dumps(rep.output, indent=2))
        out = sys.stderr
    stream = sys.stderr if status == 2 else out
    for line in rep.lines:
        print(line, file=stream)
    return status


if __name__ == "__main__":
    sys.exit(main())
