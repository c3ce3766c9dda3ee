"""Command-line interface: experiment runs, presets, verification, decoding."""

from __future__ import annotations

import argparse
import sys

from . import decoder as dec
from . import harness
from .pauli import CODES, classify_neighboring_blocks
from .circuits import synthesize_benchmark_two_ancilla, synthesize_cycle
from .surface import layout_code, paper_layout, synthesize_surface_schedule
from .tableau import verify_measurement_circuit


def _cmd_run(args) -> int:
    with open(args.config) as fh:
        cfg = harness.ExperimentConfig.from_json(fh.read())
    rows = harness.run_experiment(cfg)
    out_csv = args.out or cfg.out_csv
    if out_csv:
        harness.emit_csv(rows, out_csv)
        print(f"wrote {out_csv} ({len(rows)} rows)")
    baseline = None
    if cfg.memory_baseline:
        baseline = harness.memory_baseline_rows(cfg)
        if cfg.out_baseline_csv:
            harness.emit_csv(baseline, cfg.out_baseline_csv)
            print(f"wrote {cfg.out_baseline_csv} ({len(baseline)} rows)")
    if cfg.out_svg:
        harness.emit_svg_plot(rows, cfg.out_svg, title=f"{cfg.code} ({cfg.scheme})",
                              baseline=baseline)
        print(f"wrote {cfg.out_svg}")
    if not out_csv:
        for r in rows:
            print(f"cycles={r.cycles} p2={r.p2:g} raw={r.fid_raw:.4f}"
                  f"±{r.fid_raw_err:.4f} corr={r.fid_corr:.4f}±{r.fid_corr_err:.4f}")
    return 0


def _cmd_preset(args) -> int:
    cfg = harness.PRESETS[args.name]()
    with open(args.out, "w") as fh:
        fh.write(cfg.to_json() + "\n")
    print(f"wrote {args.out}")
    return 0


def _verify_one(name: str) -> list:
    reports = []
    if name == "surface":
        layout = paper_layout()
        circ, report = synthesize_surface_schedule(layout)
        code = layout_code(layout)
        counts = report["coverage"][1]
        if sorted(counts.values()) != [1] * len(code.generators):
            raise ValueError("surface schedule does not cover every generator once")
        reports.append(verify_measurement_circuit(circ, code))
        return reports
    if name == "benchmark-2anc":
        reports.append(verify_measurement_circuit(
            synthesize_benchmark_two_ancilla(cycles=1), CODES["rep3"]))
        return reports
    code = CODES[name]
    schemes = ["forward-backward"]
    if name == "rep3":
        schemes += ["half-cycle", "reduced-connectivity"]
    for scheme in schemes:
        circ = synthesize_cycle(code, scheme=scheme, cycles=1)
        reports.append(verify_measurement_circuit(circ, code))
    return reports


def _cmd_verify(args) -> int:
    names = ([args.code] if args.code != "all"
             else ["rep3", "rep5", "laflamme5", "shor9", "benchmark-2anc", "surface"])
    ok = True
    for name in names:
        for rep in _verify_one(name):
            print(rep.render())
            ok = ok and rep.passed
    return 0 if ok else 1


def _cmd_decode(args) -> int:
    records = dec.read_syndromes_csv(args.syndromes, mode=args.mode)
    if args.code == "benchmark-2anc":
        circ = synthesize_benchmark_two_ancilla(cycles=args.cycles, mode=args.mode)
    else:
        circ = synthesize_cycle(CODES[args.code], scheme=args.scheme,
                                cycles=args.cycles, mode=args.mode)
    sched = [(m.t, m.generator.letters) for m in circ.schedule]
    n = CODES[args.code].n if args.code != "benchmark-2anc" else 3
    include_y = args.code == "laflamme5"
    graph = dec.build_graph(sched, n, args.p, include_y=include_y)
    corrections = [dec.decode(graph, rec, canonical_ties=True) for rec in records]
    dec.write_corrections_csv(args.out, corrections)
    print(f"decoded {len(corrections)} shots -> {args.out}")
    return 0


def _cmd_classify(args) -> int:
    code = CODES[args.code]
    cls = classify_neighboring_blocks(code)
    if not cls.ok:
        print(f"{code.name}: rejected ({cls.rejected})")
        return 1
    names = {1: "adjacent", 2: "overlap-1", 3: "overlap-2"}
    order = [code.generators[i].letters for i in cls.order]
    print(f"{code.name}: order {' '.join(order)}")
    for (a, b), c in zip(zip(order, order[1:]), cls.conditions):
        print(f"  {a} -> {b}: condition {c} ({names[c]})")
    print(f"  alternative valid orderings: {cls.alternatives}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ringqec",
        description="Single-ancilla ring-connectivity stabilizer-code toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", help="override the CSV output path")
    p_run.set_defaults(func=_cmd_run)

    p_pre = sub.add_parser("preset", help="write a bundled experiment config")
    p_pre.add_argument("name", choices=sorted(harness.PRESETS))
    p_pre.add_argument("--out", required=True)
    p_pre.set_defaults(func=_cmd_preset)

    p_ver = sub.add_parser("verify", help="tableau-verify synthesized circuits")
    p_ver.add_argument("code", choices=["rep3", "rep5", "laflamme5", "shor9",
                                        "benchmark-2anc", "surface", "all"])
    p_ver.set_defaults(func=_cmd_verify)

    p_dec = sub.add_parser("decode", help="decode a syndrome CSV")
    p_dec.add_argument("--syndromes", required=True)
    p_dec.add_argument("--code", required=True,
                       choices=["rep3", "rep5", "laflamme5", "benchmark-2anc"])
    p_dec.add_argument("--cycles", type=int, required=True)
    p_dec.add_argument("--scheme", default="forward-backward")
    p_dec.add_argument("--mode", default="QND", choices=["QND", "reinit"])
    p_dec.add_argument("--p", type=float, default=0.01)
    p_dec.add_argument("--out", required=True)
    p_dec.set_defaults(func=_cmd_decode)

    p_cls = sub.add_parser("classify", help="show the neighboring-blocks ordering")
    p_cls.add_argument("code", choices=sorted(CODES))
    p_cls.set_defaults(func=_cmd_classify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
