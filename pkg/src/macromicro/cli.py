"""Command-line front end.

    macromicro run      --scenario square --out trace.ndjson
    macromicro replay   --trace trace.ndjson
    macromicro evaluate --trace trace.ndjson --module macro --format json
    macromicro export   --trace trace.ndjson --csv paths.csv
    macromicro serve    --port 8765

Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import signal
import sys
import time
from importlib import resources
from pathlib import Path

from .config import (SystemConfig, config_digest, config_to_dict,
                     default_config, load_config)
from .errors import MacroMicroError
from .metrics import evaluate as evaluate_trace
from .metrics import report_csv
from .scenario import Scenario, load_scenario, scenario_from_dict
from .sim import RunResult, run as run_scenario
from .trace import export_csv, load_frames, read_header, replay, write_trace

log = logging.getLogger("macromicro")

BUNDLED_SCENARIOS = {
    "square": "square_scenario.json",
    "micro_line": "micro_line_scenario.json",
    "dual": "dual_scenario.json",
    "hold": "hold_scenario.json",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; this artifact reserves 2 for
    data errors, so remap usage failures to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_cfg(path: str | None) -> SystemConfig:
    return load_config(path) if path else default_config()


def _load_scenario(name_or_path: str) -> Scenario:
    if name_or_path in BUNDLED_SCENARIOS:
        text = resources.files("macromicro").joinpath(
            "data", BUNDLED_SCENARIOS[name_or_path]).read_text()
        return scenario_from_dict(json.loads(text))
    return load_scenario(name_or_path)


def _cmd_run(args) -> int:
    cfg = _load_cfg(args.config)
    scenario = _load_scenario(args.scenario)
    t0 = time.monotonic()
    result = run_scenario(cfg, scenario, seed=args.seed)
    rates = config_to_dict(cfg)["rates"]
    write_trace(args.out, result, config_digest(cfg), rates=rates)
    log.info("ran %s: %d ticks, %d frames recorded in %.2fs -> %s",
             scenario.name, result.ticks, len(result.frames),
             time.monotonic() - t0, args.out)
    return 0


def _cmd_replay(args) -> int:
    count = 0
    t_last = 0.0
    for frame in replay(args.trace):
        if args.print:
            print(json.dumps({"t": frame.t,
                              "tip": [float(v) for v in frame.tip_pose.t],
                              "clutches": [frame.macro_engaged,
                                           frame.micro_engaged]}))
        count += 1
        t_last = frame.t
    header = read_header(args.trace)
    log.info("replayed %d frames (%.2fs of %s)", count, t_last,
             header.get("scenario", "?"))
    return 0


def _cmd_evaluate(args) -> int:
    frames = load_frames(args.trace)
    header = read_header(args.trace)
    report = evaluate_trace(frames, args.module,
                            stylus_samples=header.get("stylus_samples", 0))
    if args.format == "json":
        text = json.dumps(report.as_dict(), indent=2) + "\n"
    else:
        text = report_csv(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.figures:
        from .plotting import render_report_figures
        paths = render_report_figures(frames, args.module, report,
                                      args.figures)
        log.info("figures: %s", ", ".join(str(p) for p in paths))
    return 0


def _cmd_export(args) -> int:
    frames = load_frames(args.trace)
    rows = export_csv(frames, args.csv)
    log.info("exported %d rows -> %s", rows, args.csv)
    return 0


def _cmd_serve(args) -> int:
    from .live import LiveSim
    from .telemetry import TelemetryServer

    cfg = _load_cfg(args.config)
    live = LiveSim(cfg)
    live.start()
    server = TelemetryServer(live, host=args.host, port=args.port)
    server.start()
    host, port = server.address[:2]
    print(f"telemetry listening on ws://{host}:{port}", flush=True)

    stop = {"flag": False}

    def _sig(_signum, _frame):
        stop["flag"] = True

    signal.signal(signal.SIGTERM, _sig)
    signal.signal(signal.SIGINT, _sig)
    started = time.monotonic()
    try:
        while not stop["flag"]:
            if args.duration and time.monotonic() - started >= args.duration:
                break
            time.sleep(0.05)
    finally:
        server.stop()
        live.stop()
        if args.out:
            frames = live.frames()
            result = RunResult(frames=frames, ticks=live.sim.tick,
                               stylus_samples=live.sim.tick,
                               ik_rejections_macro=live.sim.ik_rejections_macro,
                               ik_rejections_micro=live.sim.ik_rejections_micro,
                               scenario_name="live", seed=0)
            write_trace(args.out, result, config_digest(cfg))
            log.info("live trace: %d frames -> %s", len(frames), args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="macromicro",
                     description="macro-micro teleoperation simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("run", help="execute a scripted scenario")
    p.add_argument("--scenario", required=True,
                   help="bundled name (%s) or a JSON/CSV path"
                   % ", ".join(sorted(BUNDLED_SCENARIOS)))
    p.add_argument("--config", help="config JSON (default: built-in)")
    p.add_argument("--out", required=True, help="output trace path")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("replay", help="validate and stream a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--print", action="store_true",
                   help="print one summary line per frame")
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("evaluate", help="tracking report for one module")
    p.add_argument("--trace", required=True)
    p.add_argument("--module", required=True, choices=("macro", "micro"))
    p.add_argument("--format", default="json", choices=("json", "csv"))
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--figures", help="directory for rendered figures")
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("export", help="dump pose streams as CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--csv", required=True, help="output CSV path")
    p.set_defaults(fn=_cmd_export)

    p = sub.add_parser("serve", help="live mode with WebSocket telemetry")
    p.add_argument("--config", help="config JSON (default: built-in)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--out", help="write the live trace here on shutdown")
    p.add_argument("--duration", type=float, default=0.0,
                   help="stop after this many seconds (0 = run until signal)")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except MacroMicroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
