"""Command-line entry point: ``ergodic-alignment <command> [flags]``.

Commands: simulate-ff, region, sweep, pairing-stats.  Parameters come from
flags or a JSON ``--config`` file, flags winning.  Every output embeds the
resolved config so a run can be repeated from its own output.

Exit codes: 0 success, 2 validation error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import analysis, channels, codec, scheduler, typicality
from .finite_field import check_modulus

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

DEFAULTS = {
    "simulate-ff": dict(q=5, K=3, rho=0.0, n=10000, seed=0, m=1, block_length=1,
                        offline=False),
    "region": dict(q=5, K=None, rho=0.0, rates=None),
    "sweep": dict(snr_db="-10:30:1", samples=100000, seed=0, K=2, threads=1),
    "pairing-stats": dict(model="ff", q=3, K=2, n=10000, seed=0, gamma=0.5, tau=None,
                          delta=0.05, trials=100, offline=False),
}


class ValidationError(ValueError):
    pass


def parse_grid(spec) -> list:
    """SNR grid from "start:stop:step" (inclusive), a comma list, or a list."""
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    spec = str(spec).strip()
    if not spec:
        raise ValidationError("empty SNR grid")
    if ":" in spec:
        parts = [float(x) for x in spec.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValidationError(f"bad grid {spec!r}, expected start:stop:step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ValidationError("empty SNR grid")
        return [round(start + i * step, 10) for i in range(count)]
    return [float(x) for x in spec.split(",") if x.strip()]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters; flags override it")
    common.add_argument("--output", help="output path; format from extension (.json/.csv)")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)

    p = argparse.ArgumentParser(prog="ergodic-alignment", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate-ff", parents=[common], help="run the finite-field protocol")
    s.add_argument("--q", type=int)
    s.add_argument("--k", dest="K", type=int)
    s.add_argument("--rho", type=float)
    s.add_argument("--n", type=int)
    s.add_argument("--m", type=int, help="message symbols per codeword")
    s.add_argument("--block-length", dest="block_length", type=int,
                   help="channel uses per fading block (codeword length)")
    s.add_argument("--offline", action="store_const", const=True,
                   help="pair first/second halves of each state's occurrences")

    r = sub.add_parser("region", parents=[common], help="capacity-region membership")
    r.add_argument("--q", type=int)
    r.add_argument("--k", dest="K", type=int)
    r.add_argument("--rho", type=float)
    r.add_argument("--rates", help="JSON list of rates in bits per channel use")

    w = sub.add_parser("sweep", parents=[common], help="Gaussian rate vs outer bound sweep")
    w.add_argument("--snr-db", dest="snr_db", help='grid "start:stop:step" or comma list')
    w.add_argument("--samples", type=int)
    w.add_argument("--k", dest="K", type=int)

    g = sub.add_parser("pairing-stats", parents=[common], help="pairing and typicality stats")
    g.add_argument("--model", choices=["ff", "gauss"])
    g.add_argument("--q", type=int)
    g.add_argument("--k", dest="K", type=int)
    g.add_argument("--n", type=int)
    g.add_argument("--gamma", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--trials", type=int, help="independent sequences for the typicality rate")
    g.add_argument("--offline", action="store_const", const=True)
    return p


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        doc = dict(doc.get("config", doc))
        if "k" in doc:
            doc["K"] = doc.pop("k")
        if "snr" in doc and "snr_db" not in doc:
            doc["snr_db"] = [10 * math.log10(s) for s in doc.pop("snr")]
        doc.pop("command", None)
        cfg.update({k: v for k, v in doc.items() if k in cfg})
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if "seed" in cfg or args.seed is not None:
        cfg["seed"] = args.seed if args.seed is not None else cfg.get("seed", 0)
    if args.command == "sweep" and args.threads is not None:
        cfg["threads"] = args.threads
    return cfg


def cmd_simulate_ff(cfg: dict):
    pc = codec.ProtocolConfig(cfg["q"], cfg["K"], cfg["rho"], cfg["m"], cfg["block_length"],
                              causal=not cfg["offline"])
    report = codec.run_protocol(pc, cfg["n"], cfg["seed"], trace=True)
    return {"report": report.to_dict()}, report.trace_csv()


def cmd_region(cfg: dict):
    if cfg["rates"] is None:
        raise ValidationError("--rates is required")
    rates = cfg["rates"]
    if isinstance(rates, str):
        try:
            rates = json.loads(rates)
        except json.JSONDecodeError:
            raise ValidationError(f"malformed rates {cfg['rates']!r}") from None
    if not isinstance(rates, list) or len(rates) < 2 or \
            not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in rates):
        raise ValidationError("rates must be a JSON list of at least two numbers")
    cfg["rates"] = rates
    K = cfg["K"] if cfg["K"] is not None else len(rates)
    cfg["K"] = K
    check_modulus(cfg["q"])
    region = analysis.RateRegion.from_noise(cfg["q"], cfg["rho"], K)
    member = analysis.region_contains(region, rates)
    doc = {"verdict": "member" if member else "non-member", "member": member,
           "cap": region.cap, **analysis.binding_pairs(region, rates)}
    csv_text = "member,cap,binding_pair\n{},{},{}-{}\n".format(
        int(member), repr(region.cap), *doc["binding_pair"])
    return doc, csv_text


def cmd_sweep(cfg: dict):
    grid = parse_grid(cfg["snr_db"])
    if cfg["samples"] < 1:
        raise ValidationError("samples must be positive")
    rows = analysis.sweep_figure(grid, cfg["samples"], cfg["seed"], K=cfg["K"],
                                 threads=cfg["threads"])
    doc = {"header": list(analysis.SWEEP_HEADER), "rows": [list(r) for r in rows]}
    return doc, analysis.sweep_csv(rows)


def _typical_rate(cfg: dict, law, key_fn, alphabet_size: int):
    hits = 0
    for i in range(cfg["trials"]):
        keys = key_fn(channels.stream(cfg["seed"], "typicality", i))
        keys = [k for k in keys if k is not None]
        if keys and typicality.is_delta_typical(typicality.count_types(keys), law,
                                                cfg["delta"]):
            hits += 1
    return hits / cfg["trials"] if cfg["trials"] else None


def cmd_pairing_stats(cfg: dict):
    K, n, seed = cfg["K"], cfg["n"], cfg["seed"]
    if n < 1:
        raise ValidationError("n must be positive")
    if cfg["delta"] <= 0:
        raise ValidationError("delta must be positive")
    if cfg["model"] == "ff":
        q = check_modulus(cfg["q"])
        H = channels.sample_ff_states(channels.stream(seed, "states"), q, K, n)
        plan = scheduler.build_pairing(H, "ff", q=q, causal=not cfg["offline"])
        law = typicality.UniformLaw(q, K)
        size = len(law)

        def keys_of(rng):
            return typicality.state_keys(channels.sample_ff_states(rng, q, K, n))
    else:
        if cfg["tau"] is None:
            cfg["tau"] = scheduler.default_tau(K)
        quant = scheduler.Quantizer(cfg["gamma"], cfg["tau"])
        H = channels.sample_gauss_states(channels.stream(seed, "states"), K, n)
        plan = scheduler.build_pairing(H, "gauss", quantizer=quant, causal=not cfg["offline"])
        law = typicality.ProductLaw(scheduler.quantized_entry_law(quant), K)
        size = len(law)

        def keys_of(rng):
            return scheduler.gauss_keys(channels.sample_gauss_states(rng, K, n), quant)[0]

    own = [k for k in plan.keys if k is not None]
    doc = {**plan.summary(), "alphabet_size": size,
           "sequence_typical": bool(own) and typicality.is_delta_typical(
               typicality.count_types(own), law, cfg["delta"]),
           "typical_frequency": _typical_rate(cfg, law, keys_of, size),
           "lemma1_bound": typicality.lemma1_bound(n, cfg["delta"], size)}
    return doc, plan.to_csv()


COMMANDS = {"simulate-ff": cmd_simulate_ff, "region": cmd_region, "sweep": cmd_sweep,
            "pairing-stats": cmd_pairing_stats}


def _render(command: str, cfg: dict, doc: dict, csv_text: str | None, fmt: str) -> str:
    header = {"command": command, "config": cfg}
    if fmt == "csv":
        if csv_text is None:
            raise ValidationError(f"{command} has no CSV output")
        return f"# {json.dumps(header, sort_keys=True)}\n" + csv_text
    return json.dumps({**header, **doc}, sort_keys=True, indent=2,
                      default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not serialisable: {type(o)}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = resolve(args)
        doc, csv_text = COMMANDS[args.command](cfg)
        out = args.output
        default_fmt = "csv" if args.command == "sweep" else "json"
        fmt = default_fmt
        if out:
            if out.endswith(".csv"):
                fmt = "csv"
            elif out.endswith(".json"):
                fmt = "json"
        text = _render(args.command, cfg, doc, csv_text, fmt)
    except (ValidationError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
