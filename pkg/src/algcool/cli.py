"""Command-line front end: ``algcool {compile,run,tables,sweep,verify}``.

Exit codes: 0 success, 2 configuration error, 3 invariant violation,
4 register too large for the dense simulator.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import gates
from . import programs as P
from .analysis import FAMILIES, FINITE, IDEAL, R_WARN, build_program, check_shannon, run, sweep, comparison_tables
from .state import RepresentationCapError, ThermalConfig

log = logging.getLogger("algcool")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_CAP = 4

OUT_ENV = "ALGCOOL_OUT"
COMP3_FORMS = {"perm": gates.COMP3_PERM, "two-gate": gates.COMP3_TWO_GATE}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    algorithm: str = "pac1"
    jf: int = 1
    j: int | None = None
    k: int | None = None
    m: int = 1
    eps0: float = 0.01
    eps_comp: float | None = None
    mode: str = IDEAL
    t1_comp: float | None = None
    t1_reset: float | None = None
    compute_duration: float = 1.0
    reset_duration: float = 5.0
    comp3: str = "perm"
    backend: str = "auto"
    out: str | None = None
    seed: int = 0

    def validate(self) -> list[str]:
        """Raise on bad settings; return warnings."""
        warnings = []
        if self.algorithm not in FAMILIES:
            raise ConfigError(f"--algorithm must be one of {FAMILIES}")
        if self.mode not in (IDEAL, FINITE):
            raise ConfigError("--mode must be ideal or finite")
        if self.comp3 not in COMP3_FORMS:
            raise ConfigError(f"--comp3 must be one of {sorted(COMP3_FORMS)}")
        if self.algorithm in ("pac1", "pac2") and self.jf < 1:
            raise ConfigError("--jf must be >= 1")
        if self.m < 1:
            raise ConfigError("--m must be >= 1")
        if self.algorithm == "mj":
            j = self.jf if self.j is None else self.j
            k = 2 * j + 1 if self.k is None else self.k
            if j >= 1 and k < 2 * j + 1:
                raise ConfigError(f"M_j(k) needs k >= 2j+1: got j={j}, k={k}")
        if self.mode == FINITE:
            if self.t1_comp is None or self.t1_reset is None:
                raise ConfigError("finite mode needs both --t1-comp and --t1-reset")
            r = self.t1_comp / self.t1_reset
            if r <= 1:
                raise ConfigError(f"R_relax-times = T1_comp/T1_reset must exceed 1, got {r:g}")
            if r < R_WARN:
                warnings.append(f"R_relax-times = {r:g} is below {R_WARN:g}; cooled bits will rethermalize")
        return warnings

    def thermal(self, eps0: float | None = None, r: float | None = None) -> ThermalConfig:
        t1_reset = self.t1_reset or 1.0
        if r is not None:
            t1_comp = r * t1_reset
        else:
            t1_comp = self.t1_comp if (self.mode == FINITE and self.t1_comp) else float("inf")
        return ThermalConfig(eps0=self.eps0 if eps0 is None else eps0, eps_comp=self.eps_comp,
                             t1_comp=t1_comp, t1_reset=t1_reset,
                             compute_duration=self.compute_duration, reset_duration=self.reset_duration)

    def program(self) -> P.Program:
        return build_program(self.algorithm, self.jf, self.m, self.j, self.k, COMP3_FORMS[self.comp3])

    def stem(self) -> str:
        if self.algorithm == "demo":
            return "demo"
        if self.algorithm == "mj":
            j = self.jf if self.j is None else self.j
            return f"mj_j{j}_k{2 * j + 1 if self.k is None else self.k}"
        s = f"{self.algorithm}_jf{self.jf}"
        return s + (f"_m{self.m}" if self.m > 1 else "")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _out_dir(cfg: RunConfig) -> Path:
    return Path(os.environ.get(OUT_ENV) or cfg.out or ".")


def cmd_compile(cfg: RunConfig) -> int:
    prog = cfg.program()
    out = _out_dir(cfg)
    write_atomic(out / f"{cfg.stem()}.program.jsonl", prog.to_jsonl())
    write_atomic(out / f"{cfg.stem()}.listing.txt", prog.notation + "\n" + prog.listing())
    c = prog.cost
    print(f"{prog.name}: {prog.n_bits} bits")
    print(prog.notation)
    print(f"compute ops {c.compute_steps}, time steps {c.total_time_steps}, reset steps {c.reset_steps}")
    if cfg.algorithm in ("pac1", "pac2") and cfg.m == 1:
        cf = P.closed_form_costs(cfg.jf)
        print("closed forms: " + ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                                           for k, v in cf.items()))
    return EXIT_OK


def cmd_run(cfg: RunConfig, dump_state: str | None = None) -> int:
    prog = cfg.program()
    rep = run(prog, cfg.thermal(), cfg.mode, cfg.backend)
    verdict = check_shannon(rep, prog)
    rep.summary["shannon"] = {
        "closed": verdict.closed,
        "entropy_floor": verdict.entropy_floor,
        "min_single_bit_entropy": verdict.min_single_bit_entropy,
        "bypass": verdict.bypass,
        "violations": list(verdict.violations),
    }
    out = _out_dir(cfg)
    write_atomic(out / f"{cfg.stem()}.ledger.csv", rep.to_csv())
    write_atomic(out / f"{cfg.stem()}.summary.json", rep.to_json())
    if dump_state:
        if rep.final_state is None:
            raise ConfigError("--dump-state needs the exact backend")
        write_atomic(Path(dump_state), rep.final_state.to_json() + "\n")
    s = rep.summary
    names = prog.names
    print(f"{prog.name} ({cfg.mode}, eps0={cfg.eps0:g}): {prog.n_bits} bits")
    print("final biases: " + ", ".join(f"{names[i]}={b:.6g}" for i, b in enumerate(rep.final.biases)))
    print(f"target {names[s['target_bit']]} = {s['target_bias']:.10g}"
          + (f" (predicted {s['predicted_bias']:.10g})" if s["predicted_bias"] is not None else ""))
    print(f"bound eps0*sqrt(n) = {s['shannon_bound']:.6g}, bypass_margin = {s['bypass_margin']:.6g}")
    problems = rep.violations + list(verdict.violations)
    for p in problems:
        print(f"VIOLATION: {p}", file=sys.stderr)
    return EXIT_INVARIANT if problems else EXIT_OK


def cmd_tables(cfg: RunConfig) -> int:
    t = comparison_tables()
    out = _out_dir(cfg)
    write_atomic(out / "tables.csv", t.to_csv())
    write_atomic(out / "tables.txt", t.to_text())
    sys.stdout.write(t.to_text())
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, eps0s, ratios, compute_durations, reset_durations) -> int:
    if not eps0s or not ratios:
        raise ConfigError("sweep needs at least one --eps0 value and one --ratio value")
    if any(r <= 1 for r in ratios):
        raise ConfigError("every --ratio must exceed 1")
    prog = cfg.program()
    rep = sweep(prog, eps0s, ratios, compute_durations or [cfg.compute_duration],
                reset_durations or [cfg.reset_duration], t1_reset=cfg.t1_reset or 1.0, backend=cfg.backend)
    write_atomic(_out_dir(cfg) / f"{cfg.stem()}.sweep.csv", rep.to_csv())
    sys.stdout.write(rep.to_csv())
    for r in ratios:
        if r < R_WARN:
            log.warning("R_relax-times = %g is below %g", r, R_WARN)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, trials: int) -> int:
    from .verify import verify_all

    results = verify_all(seed=cfg.seed, trials=trials)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_INVARIANT


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with RunConfig fields (flags override it)")
    p.add_argument("--algorithm", choices=FAMILIES)
    p.add_argument("--jf", type=int, help="target purification level J_f")
    p.add_argument("--j", type=int, help="level j for --algorithm mj (defaults to --jf)")
    p.add_argument("--k", type=int, help="top bit index k for --algorithm mj")
    p.add_argument("--m", type=int, help="number of cooled bits (pac1 only)")
    p.add_argument("--comp3", choices=sorted(COMP3_FORMS), help="3B-Comp construction")
    p.add_argument("--out", help=f"output directory (env {OUT_ENV} overrides)")


def _add_physics(p: argparse.ArgumentParser, multi: bool = False) -> None:
    if multi:
        p.add_argument("--eps0", type=float, nargs="+", dest="eps0_list")
    else:
        p.add_argument("--eps0", type=float)
    p.add_argument("--eps-comp", type=float, dest="eps_comp")
    p.add_argument("--t1-comp", type=float, dest="t1_comp")
    p.add_argument("--t1-reset", type=float, dest="t1_reset")
    p.add_argument("--backend", choices=("auto", "exact", "tracker"))
    if multi:
        p.add_argument("--ratio", type=float, nargs="+", dest="ratios", help="R_relax-times values")
        p.add_argument("--compute-duration", type=float, nargs="+", dest="compute_durations")
        p.add_argument("--reset-duration", type=float, nargs="+", dest="reset_durations")
    else:
        p.add_argument("--mode", choices=(IDEAL, FINITE))
        p.add_argument("--compute-duration", type=float, dest="compute_duration")
        p.add_argument("--reset-duration", type=float, dest="reset_duration")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="algcool", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("compile", help="compile a cooling program to JSON lines and a listing")
    _add_common(p)
    p = sub.add_parser("run", help="execute a program and write the ledger CSV and summary JSON")
    _add_common(p)
    _add_physics(p)
    p.add_argument("--dump-state", help="write the final exact state as JSON")
    p = sub.add_parser("tables", help="spin-count and cost comparison tables")
    p.add_argument("--out")
    p = sub.add_parser("sweep", help="finite-relaxation grid of final biases")
    _add_common(p)
    _add_physics(p, multi=True)
    p = sub.add_parser("verify", help="run the built-in invariant suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=1000)
    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            base = json.load(f)
        unknown = set(base) - {f.name for f in fields(RunConfig)}
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            base[f.name] = val
    if args.command == "sweep":
        base["mode"] = FINITE
        if base.get("t1_reset") is None:
            base["t1_reset"] = 1.0
    return RunConfig(**base)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = _load_config(args)
        if args.command == "sweep":
            eps0s = args.eps0_list or [cfg.eps0]
            ratios = args.ratios or []
            if not ratios:
                raise ConfigError("sweep needs --ratio")
            for w in RunConfig(**{**asdict(cfg), "t1_comp": max(ratios) * (cfg.t1_reset or 1.0)}).validate():
                log.warning(w)
            return cmd_sweep(cfg, eps0s, ratios, args.compute_durations, args.reset_durations)
        for w in cfg.validate():
            log.warning(w)
        if args.command == "compile":
            return cmd_compile(cfg)
        if args.command == "run":
            return cmd_run(cfg, args.dump_state)
        if args.command == "tables":
            return cmd_tables(cfg)
        return cmd_verify(cfg, args.trials)
    except RepresentationCapError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (ConfigError, P.CompileError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
