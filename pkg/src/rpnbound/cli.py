"""rpnbound command line.

    rpnbound {check-hls,bound,scaling,qec,curve,simulate,compare} --config run.toml [--out out.csv] [--seed N]

CSV goes to --out (or stdout); reports are plain text. Exit codes: 0 ok,
2 configuration error, 3 infeasible bound.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys

import numpy as np

from .algebra import SPAN_TOL
from .bec import TrapKind, TrapSpec, point_bound, qfi_vs_n_curve, rb87_placeholder_trap
from .bounds import model_scaling, sampled_bound, scaling_exponent, sdp_rate, solve_sdp
from .bounds.sdp import Status
from .config import ConfigError, RunConfig, load_config
from .model import TwoModeLossModel, build_two_mode_model, check_hls, qubit_model
from .qec import CodeVariant, build_paper_code, code_qfi, impossibility_certificate, two_mode_ops, verify_code
from .rpn import assemble_two_mode
from .trajectory import (
    LossRates,
    OptimizationMode,
    ProtocolSpec,
    StageParams,
    number_sectors,
    optimize_protocol,
    prepare,
    ramsey,
    simulate_qfi,
)

log = logging.getLogger("rpnbound")

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3


class Infeasible(RuntimeError):
    pass


def _num(x):
    """Full-precision decimal text; repr of a Python float round-trips exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_num(r[c]) for c in columns])
    return buf.getvalue()


def _two_mode_spec(cfg: RunConfig, N=None) -> TwoModeLossModel:
    m = cfg["model"]
    return TwoModeLossModel(
        m["gamma1_per_s"], m["gamma2_per_s"], m["gamma11_per_s"], m["gamma12_per_s"], m["gamma22_per_s"],
        m["N"] if N is None else N,
    )


# --- commands -------------------------------------------------------------


def cmd_check_hls(cfg: RunConfig, seed: int) -> str:
    sysc = cfg["system"]
    if sysc["kind"] == "qubit":
        model = qubit_model(sysc["noise"], sysc["rate_per_s"])
        head = f"system: qubit, noise: {sysc['noise']}, rate_per_s: {_num(sysc['rate_per_s'])}"
    elif sysc["kind"] == "two_mode":
        if not cfg.has("model"):
            raise ConfigError(f"{cfg.path}: [system] kind = 'two_mode' needs a [model] section")
        rpn = cfg["rpn"]
        model = build_two_mode_model(_two_mode_spec(cfg), rpn["superselect"], rpn["n_particles"])
        head = f"system: two_mode, n_particles: {rpn['n_particles']}, superselect: {_num(rpn['superselect'])}"
    else:
        raise ConfigError(f"{cfg.path}: [system] kind must be 'qubit' or 'two_mode'")
    r = check_hls(model)
    lines = [head, f"residual: {_num(r.residual)}", f"tolerance: {_num(SPAN_TOL)}"]
    if r.satisfied:
        lines.append("HLS satisfied; QFI grows at most linearly in T")
        lines += [f"  {k}: {_num(v)}" for k, v in r.witness.items()]
    else:
        lines.append("HLS not satisfied; T² regime reachable")
    return "\n".join(lines) + "\n"


BOUND_COLUMNS = [
    "N", "gamma1_per_s", "gamma2_per_s", "gamma11_per_s", "gamma12_per_s", "gamma22_per_s",
    "n_particles", "superselect", "method", "lambda_star", "fq_per_time", "status",
    "duality_gap", "constraint_residual",
]


def cmd_bound(cfg: RunConfig, seed: int) -> str:
    rpn, solver, opts = cfg["rpn"], cfg["solver"], cfg["bound"]
    Ns = opts["N_values"] or [cfg["model"]["N"]]
    rows = []
    for N in Ns:
        spec = _two_mode_spec(cfg, float(N))
        row = {
            "N": float(N), "gamma1_per_s": spec.gamma1, "gamma2_per_s": spec.gamma2,
            "gamma11_per_s": spec.gamma11, "gamma12_per_s": spec.gamma12, "gamma22_per_s": spec.gamma22,
            "n_particles": rpn["n_particles"], "superselect": rpn["superselect"], "method": opts["method"],
        }
        if opts["method"] == "analytic":
            fq = point_bound(spec, method="analytic")
            row.update(lambda_star=fq / 4, fq_per_time=fq, status="closed_form", duality_gap=0.0, constraint_residual=0.0)
        elif opts["method"] == "sdp":
            ch = assemble_two_mode(spec, rpn["n_particles"], rpn["superselect"])
            res = solve_sdp(ch.model, ch.subchannel_count, solver["gap_tol"], solver["max_iter"])
            if res.status is Status.INFEASIBLE:
                hls = check_hls(ch.model)
                raise Infeasible(
                    f"bound infeasible at N={_num(float(N))}: HLS residual {_num(hls.residual)} "
                    f"(tolerance {_num(SPAN_TOL)}), constraint residual {_num(res.constraint_residual)}"
                )
            row.update(
                lambda_star=res.lambda_star, fq_per_time=res.fq_per_time, status=res.status.value,
                duality_gap=res.duality_gap, constraint_residual=res.constraint_residual,
            )
        else:
            raise ConfigError(f"{cfg.path}: [bound] method must be 'sdp' or 'analytic'")
        log.info("N=%s fq_per_time=%s", N, row["fq_per_time"])
        rows.append(row)
    return write_csv(rows, BOUND_COLUMNS)


def cmd_scaling(cfg: RunConfig, seed: int) -> str:
    sc = cfg["scaling"]
    if sc["source"] == "orders":
        if sc["k_body"] is None or sc["l_body"] is None:
            raise ConfigError(f"{cfg.path}: [scaling] source = 'orders' needs k_body and l_body")
        res = scaling_exponent([sc["k_body"]], {sc["k_body"]: [sc["l_body"]]})
        head = f"orders: k={sc['k_body']} l={sc['l_body']}"
    elif sc["source"] == "model":
        if not cfg.has("model"):
            raise ConfigError(f"{cfg.path}: [scaling] source = 'model' needs a [model] section")
        rpn = cfg["rpn"]
        spec = _two_mode_spec(cfg)
        res = model_scaling(build_two_mode_model(spec, rpn["superselect"], rpn["n_particles"]))
        head = f"model: n_particles={rpn['n_particles']} superselect={_num(rpn['superselect'])}"
    else:
        raise ConfigError(f"{cfg.path}: [scaling] source must be 'model' or 'orders'")
    lines = [
        head,
        f"k_star: {res.k_star}",
        f"l_star: {res.l_star if res.l_star is not None else 'none'}",
        f"exponent: {res.exponent}",
        f"bound scales as N^{res.exponent}",
    ]
    for k, l in res.l_per_k.items():
        lines.append(f"  k={k}: l*={l if l is not None else 'none'}")
    if res.heisenberg:
        lines.append(f"Heisenberg scaling possible for k in {list(res.heisenberg_orders)} (HLS fails)")
    return "\n".join(lines) + "\n"


def cmd_qec(cfg: RunConfig, seed: int) -> str:
    q = cfg["qec"]
    lines = ["code checks (KL violation, nontrivial logical generator):"]
    ok_all = True
    for N in q["N_values"]:
        for variant in CodeVariant:
            code = build_paper_code(int(N), variant)
            ops = two_mode_ops(code.basis)
            loss = [ops["a1a1"]] if variant is CodeVariant.GAMMA11_ONLY else [ops["a1a1"], ops["a2a2"], ops["a1a2"]]
            chk = verify_code(code, loss, ops["H"])
            ok = chk.correctable and chk.nontrivial
            ok_all &= ok
            lines.append(
                f"  N={N} {variant.value}: violation={_num(chk.worst_violation)} "
                f"nontrivial={_num(chk.nontrivial)} {'PASS' if ok else 'FAIL'}"
            )
        lines.append(f"  N={N} code_qfi(T={_num(q['T_s'])})={_num(code_qfi(int(N), q['T_s']))}")
    lines.append(f"impossibility at N={q['certificate_N']} (trials={q['trials']}, seed={seed}):")
    for triple in q["rate_triples_per_s"]:
        g11, g22, g12 = (float(x) for x in triple)
        cert = impossibility_certificate(g11, g22, g12, q["certificate_N"], trials=q["trials"], seed=seed)
        s = cert.evidence.get("search", {})
        lines.append(
            f"  (g11,g22,g12)=({_num(g11)},{_num(g22)},{_num(g12)}): forced_trivial={_num(cert.forced_trivial)} "
            f"identity: {cert.evidence.get('identity', 'none')} counterexamples={s.get('counterexamples', 'n/a')}"
        )
    lines.append("all codes pass" if ok_all else "some codes FAIL")
    return "\n".join(lines) + "\n"


CURVE_RATES = ["gamma1", "gamma2", "gamma11", "gamma12", "gamma22"]
CURVE_COLUMNS = ["N"] + [f"{g}_per_s" for g in CURVE_RATES] + ["fq_per_time"]


def _trap(cfg: RunConfig) -> TrapSpec | None:
    t = cfg["trap"] if cfg.has("trap") else {"kind": "none", "preset": None}
    if t["kind"] == "none":
        return None
    if t["preset"] is not None:
        if t["preset"] != "rb87_placeholder":
            raise ConfigError(f"{cfg.path}: unknown trap preset {t['preset']!r}")
        return rb87_placeholder_trap(t["kind"])
    if t["K_m3_per_s"] is None:
        raise ConfigError(f"{cfg.path}: [trap] needs K_m3_per_s or a preset")
    return TrapSpec(
        TrapKind(t["kind"]), np.array(t["K_m3_per_s"], dtype=float), omega=t["omega_rad_per_s"],
        volume=t["volume_m3"], scattering_length=t["scattering_length_m"], mass=t["mass_kg"],
    )


def cmd_curve(cfg: RunConfig, seed: int) -> str:
    c, rpn = cfg["curve"], cfg["rpn"]
    if not (0 < c["N_min"] <= c["N_max"]) or c["points"] < 1:
        raise ConfigError(f"{cfg.path}: [curve] needs 0 < N_min <= N_max and points >= 1")
    Ns = np.geomspace(c["N_min"], c["N_max"], c["points"])
    try:
        trap = _trap(cfg)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"{cfg.path}: [trap] {e}") from None
    table = qfi_vs_n_curve(
        trap, (c["gamma1_per_s"], c["gamma2_per_s"]), Ns, rpn["n_particles"], rpn["superselect"], c["method"],
    )
    rows = [{**{f"{g}_per_s": r[g] for g in CURVE_RATES}, "N": r["N"], "fq_per_time": r["fq_per_time"]} for r in table.rows()]
    return write_csv(rows, CURVE_COLUMNS)


def protocol_from_config(cfg: RunConfig) -> ProtocolSpec:
    p = cfg["protocol"]

    def stage(name):
        s = cfg[name] if cfg.has(name) else None
        if s is None:
            return StageParams()
        rates = LossRates(**{k[: -len("_per_s")]: v for k, v in s.items() if k.startswith("gamma")})
        return StageParams(s["chi_rad_per_s"], s["chi_tilde_rad_per_s"], rates)

    rot = p["rotation_rad"]
    if not (rot == "auto" or isinstance(rot, (int, float)) and not isinstance(rot, bool)):
        raise ConfigError(f"{cfg.path}: [protocol] rotation_rad must be a number or 'auto'")
    try:
        return ProtocolSpec(
            N_mean=p["N_mean"], omega=p["omega_rad_per_s"], prep=stage("protocol.prep"),
            ramsey=stage("protocol.ramsey"), distribution=p["distribution"],
            rotation=rot if rot == "auto" else float(rot),
        )
    except ValueError as e:
        raise ConfigError(f"{cfg.path}: [protocol] {e}") from None


SIM_COLUMNS = ["T_s", "T_prep_s", "t_s", "F_s", "F_s_error", "delta_omega", "fq_segment", "mean_N_final", "fd_step"]


def simulate_rows(cfg: RunConfig, seed: int) -> tuple[ProtocolSpec, list[dict]]:
    spec = protocol_from_config(cfg)
    s = cfg["simulation"]
    try:
        mode = OptimizationMode(s["mode"])
    except ValueError:
        raise ConfigError(f"{cfg.path}: [simulation] mode must be 'short_segments' or 'single_shot'") from None
    count = s["trajectories"]
    rows = []
    for T in s["T_values_s"]:
        T = float(T)
        t_grid = T * np.arange(1, s["t_grid_points"] + 1) / s["t_grid_points"]
        opt = optimize_protocol(spec, T, mode, s["prep_grid_s"], t_grid, count, seed, s["refine"])
        best = spec.replace(T_prep=opt.T_prep)
        prepared = prepare(best, count, seed)
        est = simulate_qfi(best, count, seed, t=opt.t, prepared=prepared, bootstrap=s["bootstrap"])
        reps = T / opt.t if mode is OptimizationMode.SHORT_SEGMENTS else 1.0
        final = ramsey(prepared, best, opt.t)
        rows.append({
            "T_s": T, "T_prep_s": opt.T_prep, "t_s": opt.t, "F_s": reps * est.value,
            "F_s_error": reps * est.statistical_error,
            "delta_omega": 1 / math.sqrt(reps * est.value) if est.value > 0 else math.inf,
            "fq_segment": est.value, "mean_N_final": final.mean_atom_number(), "fd_step": est.fd_step,
            "_prepared": prepared, "_best": best, "_reps": reps,
        })
        log.info("T=%s T_prep=%s t=%s F_s=%s", T, opt.T_prep, opt.t, rows[-1]["F_s"])
    return spec, rows


def cmd_simulate(cfg: RunConfig, seed: int) -> str:
    _, rows = simulate_rows(cfg, seed)
    return write_csv(rows, SIM_COLUMNS)


COMPARE_COLUMNS = SIM_COLUMNS + [
    "bound_fq_const", "bound_fq_decay", "delta_omega_bound_const", "delta_omega_bound_decay", "above_bound",
]


def bound_rate(spec: ProtocolSpec, cfg: RunConfig):
    """Per-time bound for the Ramsey-stage rates; three-body terms are dropped (looser, still valid)."""
    r = spec.ramsey.rates
    rpn = cfg["rpn"]
    model = TwoModeLossModel(r.gamma1, r.gamma2, r.gamma11, r.gamma12, r.gamma22, max(spec.N_mean, rpn["n_particles"]))
    inner = sdp_rate(model, rpn["n_particles"], rpn["superselect"])

    def rate(N):
        try:
            return inner(N)
        except ValueError:
            # outside the noise span: no finite bound
            return math.inf

    return rate


def cmd_compare(cfg: RunConfig, seed: int) -> str:
    spec, rows = simulate_rows(cfg, seed)
    rate = bound_rate(spec, cfg)
    n = cfg["rpn"]["n_particles"]
    samples = cfg["simulation"]["decay_samples"]
    # Sectors are distinguishable, so the bound averages over the initial number.
    per_time = sum(w * rate(float(N)) for N, w in number_sectors(spec) if N >= n)
    for row in rows:
        T, t, reps = row["T_s"], row["t_s"], row["_reps"]
        ts = np.linspace(0.0, t, max(samples, 2))
        Ns = [ramsey(row["_prepared"], row["_best"], tt).mean_atom_number() for tt in ts]
        row["bound_fq_const"] = T * per_time
        row["bound_fq_decay"] = reps * sampled_bound(rate, ts, np.maximum(Ns, n), n)
        row["delta_omega_bound_const"] = 1 / math.sqrt(row["bound_fq_const"])
        row["delta_omega_bound_decay"] = 1 / math.sqrt(row["bound_fq_decay"])
        row["above_bound"] = row["delta_omega"] >= max(row["delta_omega_bound_const"], row["delta_omega_bound_decay"])
    return write_csv(rows, COMPARE_COLUMNS)


COMMANDS = {
    "check-hls": cmd_check_hls,
    "bound": cmd_bound,
    "scaling": cmd_scaling,
    "qec": cmd_qec,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rpnbound", description="QFI bounds and trajectory simulations for lossy interferometry")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="TOML run configuration")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--seed", type=int, default=0, help="random seed for simulations and searches")
    ap.add_argument("--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.command)
        text = COMMANDS[args.command](cfg, args.seed)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as e:
        print(str(e), file=sys.stderr)
        return EXIT_INFEASIBLE
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
