"""``egl`` command-line interface.

Every subcommand reads a JSON config (validated before any computation),
writes CSV/JSON files into ``--out`` and nothing else. CSV files start with
one ``#`` line carrying the config digest and seed; JSON files carry the
same data under ``"meta"``. Progress goes to stderr.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import config as cf
from . import optimize as op
from ._rng import config_digest, derive_seed
from .embed import mc_embedding_error
from .exact_error import balanced_two_block_error, normal_approx_error
from .model import Design, errorful_block_matrix, rates_along_tau
from .sim import (
    BinaryChannel,
    chance_error,
    celegans_experiment,
    estimate_sbm,
    load_graph,
    loo_error,
    paired_vertex_error,
    sample_sbm,
)

COMMANDS = {
    "surface": "error surface over the (kappa, tau) grid and its argmin",
    "path": "(Btilde_11, Btilde_12) path as tau sweeps at fixed kappa",
    "curves": "mean and variance of the normalized degree difference along tau",
    "compare": "exact, normal and embedding error curves with the four optimal thresholds",
    "celegans": "leave-one-out error grid on a labeled graph (or a synthetic surrogate)",
    "simulate": "Monte Carlo run reports for any classifier and channel",
}
_TRIALS_KEY = {"compare": "compare", "celegans": "celegans", "simulate": "simulate"}


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Run:
    """Output sink for one invocation: knows the digest, seed and directory."""

    def __init__(self, command, cfg, out_dir, quiet=False):
        self.command = command
        self.cfg = cfg
        self.out_dir = out_dir
        self.seed = cfg["seed"]
        self.digest = config_digest({"command": command, "config": cfg})
        self.quiet = quiet
        self.written = []
        os.makedirs(out_dir, exist_ok=True)

    @property
    def meta(self):
        return {"command": self.command, "config_digest": self.digest, "seed": self.seed}

    def progress(self, msg):
        if not self.quiet:
            print(f"[egl {self.command}] {msg}", file=sys.stderr, flush=True)

    def write_csv(self, name, header, rows):
        path = os.path.join(self.out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(f"# egl {self.command} config_digest={self.digest} seed={self.seed}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.written.append(path)
        self.progress(f"wrote {path}")

    def write_json(self, name, payload):
        path = os.path.join(self.out_dir, name)
        with open(path, "w") as fh:
            json.dump({"meta": self.meta, **payload}, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")
        self.written.append(path)
        self.progress(f"wrote {path}")


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _nan_to_none(x):
    x = float(x)
    return None if np.isnan(x) else x


# -- subcommands ---------------------------------------------------------------


def cmd_surface(run):
    cfg = run.cfg
    bm, fm = cf.block_model(cfg["model"]), cf.feature_model(cfg)
    kg, tg = cf.grid_from(cfg["kappa_grid"]), cf.grid_from(cfg["tau_grid"])
    run.progress(f"evaluating {len(kg)} x {len(tg)} cells with the {cfg['evaluator']} evaluator")
    s = op.build_surface(bm, fm, kg, tg, cfg["evaluator"], workers=cfg["threads"])
    rows = ((k, s.h_kappa[i], t, s.L[i, j]) for i, k in enumerate(kg) for j, t in enumerate(tg))
    run.write_csv("surface.csv", ["kappa", "h_kappa", "tau", "L"], rows)
    best = s.per_kappa_argmin_tau
    run.write_csv("per_kappa_tau.csv", ["kappa", "h_kappa", "tau_star", "L"],
                  ((k, s.h_kappa[i], best[i], s.L[i].min()) for i, k in enumerate(kg)))
    opt = s.argmin_dict()
    opt["tau_bayes_at_kappa_star"] = _nan_to_none(op.bayes_threshold(bm, fm, opt["kappa_star"]))
    run.write_json("argmin.json", {"argmin": opt, "grid_shape": [len(kg), len(tg)]})


def cmd_path(run):
    cfg = run.cfg
    bm, fm = cf.block_model(cfg["model"]), cf.feature_model(cfg)
    tg = cf.grid_from(cfg["tau_grid"])
    p = op.btilde_path(bm, fm, cfg["kappa"], tg)
    run.write_csv("path.csv", ["tau", "b11", "b12", "L"], zip(p.tau, p.b11, p.b12, p.L))
    j = int(np.argmin(p.L))
    tb = op.bayes_threshold(bm, fm, cfg["kappa"])
    n1 = (bm.n - 1) // 2
    bayes_point = None
    if not np.isnan(tb):
        Bt = errorful_block_matrix(bm, rates_along_tau(fm, cfg["kappa"], np.array([tb])))[0]
        bayes_point = {"tau": tb, "b11": Bt[0, 0], "b12": Bt[0, 1],
                       "L": float(balanced_two_block_error(n1, Bt[0, 0], Bt[0, 1]))}
    run.write_json("path.json", {
        "kappa": cfg["kappa"],
        "optimum": {"tau": p.tau[j], "b11": p.b11[j], "b12": p.b12[j], "L": p.L[j]},
        "bayes": bayes_point,
    })


def cmd_curves(run):
    cfg = run.cfg
    bm, fm = cf.block_model(cfg["model"]), cf.feature_model(cfg)
    c = op.mean_variance_curve(bm, fm, cfg["kappa"], cf.grid_from(cfg["tau_grid"]))
    run.write_csv("curves.csv", ["tau", "mean", "variance"], zip(c.tau, c.mean, c.variance))
    run.write_json("curves.json", {"kappa": cfg["kappa"], "mean_argmax_tau": c.mean_argmax_tau,
                                   "variance_nonincreasing": c.variance_nonincreasing})


def cmd_compare(run):
    cfg = run.cfg
    cc = cfg["compare"]
    bm, fm = cf.block_model(cfg["model"]), cf.feature_model(cfg)
    kappa = cfg["kappa"]
    fine = cf.grid_from(cfg["tau_grid"])
    coarse = op.grid(cfg["tau_grid"]["start"], cfg["tau_grid"]["stop"], cc["tau_step"])
    taus = np.union1d(fine, coarse)
    n1 = (bm.n - 1) // 2
    Bt = errorful_block_matrix(bm, rates_along_tau(fm, kappa, taus))
    L_exact = balanced_two_block_error(n1, Bt[:, 0, 0], Bt[:, 0, 1])
    L_normal = normal_approx_error(2 * n1, Bt[:, 0, 0], Bt[:, 0, 1])

    row = op.build_surface(bm, fm, [kappa], fine, "balanced")
    optima = {
        "kappa": kappa,
        "tau_star": row.argmin.tau,
        "L_star": row.argmin.value,
        "tau_normal": op.normal_approx_optimum(bm, fm, [kappa], fine).tau,
        "tau_projection": op.projection_optimum(bm, fm, [kappa], fine, cc["d"]).tau,
        "tau_bayes": _nan_to_none(op.bayes_threshold(bm, fm, kappa)),
    }
    header = ["tau", "L_exact", "L_normal"]
    cols = [taus, L_exact, L_normal]
    if cc["trials"] > 0:
        d = cc["d"] or int(np.linalg.matrix_rank(bm.B))
        run.progress(f"embedding Monte Carlo: {len(coarse)} tau values x {cc['trials']} trials")
        curve = mc_embedding_error(bm, fm, kappa, coarse, d, cc["trials"], run.seed, cc["batch"],
                                   select=cc["select"], workers=cfg["threads"],
                                   progress=lambda j: run.progress(f"tau {coarse[j]:.3f} done"))
        lookup = {float(t): (l, s) for t, l, s in zip(curve.tau, curve.L_hat, curve.se)}
        emb = [lookup.get(float(t), (None, None)) for t in taus]
        header += ["L_hat_embedding", "se"]
        cols += [[e[0] for e in emb], [e[1] for e in emb]]
        optima["tau_embedding_argmin"] = curve.argmin_tau
        optima["embedding_trials"] = cc["trials"]
        optima["embedding_degenerate"] = int(curve.degenerate.sum())
    run.write_csv("compare.csv", header, zip(*cols))
    run.write_json("optima.json", {"optima": optima,
                                   "max_abs_normal_gap": float(np.max(np.abs(L_exact - L_normal)))})


def _load_or_surrogate(run, section):
    if section["edges"] and section["labels"]:
        g = load_graph(section["edges"], section["labels"])
        return g, {"source": "files", "edges_file": section["edges"], "labels_file": section["labels"],
                   "label_names": list(g.label_names or [])}
    bm = cf.block_model(section["surrogate"])
    counts = block_counts(bm.n, bm.pi)
    g = sample_sbm(bm, derive_seed(run.seed, 0), counts=counts)
    return g, {"source": "surrogate", "surrogate": section["surrogate"], "block_sizes": counts}


def block_counts(n, pi):
    """Largest-remainder rounding of n * pi to integers summing to n."""
    raw = n * np.asarray(pi, dtype=float)
    counts = np.floor(raw).astype(int)
    short = n - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    counts[order[:short]] += 1
    return counts.tolist()


def cmd_celegans(run):
    cfg = run.cfg
    cc = cfg["celegans"]
    g, source = _load_or_surrogate(run, cc)
    est = estimate_sbm(g)
    run.progress(f"graph: n={g.n}, edges={g.n_edges}, density={g.density:.4f}")
    xs, ys, cg = cf.grid_from(cc["x_grid"]), cf.grid_from(cc["y_grid"]), cf.grid_from(cc["curve_grid"])
    gold = loo_error(g, BinaryChannel(1.0, 1.0), "plugin", cc["trials"], derive_seed(run.seed, 1),
                     cc["estimate"], cfg["threads"])
    total = len(xs) * len(ys) + len(cc["q_list"]) * len(cg)
    done = [0]

    def tick(row):
        done[0] += 1
        run.progress(f"{done[0]}/{total} x={row['x']:.3f} y={row['y']:.3f} error={row['mean_error']:.4f}")

    rows = celegans_experiment(g, xs, ys, cc["q_list"], cc["trials"], derive_seed(run.seed, 2), cg,
                               cc["estimate"], cfg["threads"], tick)
    keys = ["x", "y", "q", "mean_error", "se", "ci_lo", "ci_hi", "trials", "seed"]
    run.write_csv("celegans.csv", keys, ([r[k] for k in keys] for r in rows))
    run.write_json("celegans.json", {
        "graph": {**source, "n": g.n, "edges": g.n_edges, "density": g.density},
        "B_hat": est.B_hat, "pi_hat": est.pi_hat,
        "chance_error": chance_error(g.labels, g.K),
        "perfect_observation": {"error_rate": gold.error_rate, "se": gold.std_error,
                                "trials": gold.trials},
    })


def cmd_simulate(run):
    cfg = run.cfg
    sc = cfg["simulate"]
    reports = []
    if sc["experiment"] == "vertex":
        bm, fm = cf.block_model(cfg["model"]), cf.feature_model(cfg)
        for i, des in enumerate(sc["designs"]):
            run.progress(f"design kappa={des['kappa']} tau={des['tau']}")
            out = paired_vertex_error(bm, fm, Design(des["kappa"], des["tau"]), sc["classifiers"],
                                      sc["trials"], derive_seed(run.seed, i), mode=sc["mode"],
                                      workers=cfg["threads"])
            reports += [json.loads(out[c].to_json()) for c in sc["classifiers"]]
    else:
        bad = [c for c in sc["classifiers"] if c not in ("plugin", "gamma")]
        if bad:
            raise cf.ConfigError("/simulate/classifiers", "leave-one-out supports plugin and gamma only")
        if cfg["celegans"]["edges"] and cfg["celegans"]["labels"]:
            g = load_graph(cfg["celegans"]["edges"], cfg["celegans"]["labels"])
        else:
            g = sample_sbm(cf.block_model(cfg["model"]), derive_seed(run.seed, 0))
        for i, ch in enumerate(sc["channels"]):
            for c in sc["classifiers"]:
                run.progress(f"channel assess={ch['assess']} accuracy={ch['accuracy']} classifier={c}")
                rep = loo_error(g, BinaryChannel(ch["assess"], ch["accuracy"], sc["mode"]), c,
                                sc["trials"], derive_seed(run.seed, i), sc["estimate"], cfg["threads"])
                reports.append(json.loads(rep.to_json()))
    run.write_json("simulate.json", {"experiment": sc["experiment"], "reports": reports})


HANDLERS = {"surface": cmd_surface, "path": cmd_path, "curves": cmd_curves, "compare": cmd_compare,
            "celegans": cmd_celegans, "simulate": cmd_simulate}


def build_parser():
    p = argparse.ArgumentParser(prog="egl", description="Inference on errorfully observed graphs.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in COMMANDS.items():
        s = sub.add_parser(name, help=text, description=text)
        s.add_argument("--config", help="JSON config file (defaults to the demonstration setting)")
        s.add_argument("--out", required=True, help="output directory")
        s.add_argument("--seed", type=int, help="override the config seed")
        s.add_argument("--trials", type=int, help="override the Monte Carlo trial count")
        s.add_argument("--threads", type=int, help="worker threads")
        s.add_argument("--quiet", action="store_true", help="no progress on stderr")
    return p


def _user_config(args):
    user = {}
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise cf.ConfigError("", f"not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise cf.ConfigError("", "config must be a JSON object")
    if args.seed is not None:
        user["seed"] = args.seed
    if args.threads is not None:
        user["threads"] = args.threads
    if args.trials is not None:
        key = _TRIALS_KEY.get(args.command)
        if key is None:
            print(f"egl: --trials has no effect on '{args.command}'", file=sys.stderr)
        else:
            user.setdefault(key, {})["trials"] = args.trials
    return user


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cf.resolve(_user_config(args))
    except (cf.ConfigError, OSError) as exc:
        print(f"egl: config error: {exc}", file=sys.stderr)
        return 2
    run = Run(args.command, cfg, args.out, args.quiet)
    try:
        HANDLERS[args.command](run)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"egl {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
