"""``kolmo`` command line: simulation, reduction, training, and statistics.

Every artifact-producing stage writes the artifact atomically and drops a
``<artifact>.manifest.json`` beside it recording the package version, the
exact argv, and SHA-256 hashes of all inputs, so any output can be
reproduced by replaying the manifest's argv. ``kolmo run <config.json>``
executes a list of stages, each a ``{"cmd": ..., "args": {...}}`` record
whose keys map onto the stage's flags (unknown keys are rejected).

Exit codes: 0 success, 1 stage failure (diagnostic names the stage),
2 argument/config parse errors.
"""

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from . import burst_predict as bp
from . import labeling as lb
from . import latent_dynamics as ld
from . import reduction as red
from . import spectral as sp
from . import stats as st
from . import storage
from . import symmetry as sym
from .errors import BinMismatchError, KolmoError
from .nnet import TrainConfig


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _manifest(out_path: str, argv: list, inputs: list):
    doc = {
        "package_version": __version__,
        "argv": list(argv),
        "inputs": {p: _sha256(p) for p in inputs if os.path.exists(p)},
        "output": os.path.basename(out_path),
    }
    storage.atomic_write_text(
        out_path + ".manifest.json", json.dumps(doc, indent=2, sort_keys=True)
    )


def _widths(text: str):
    return tuple(int(t) for t in text.split(",") if t.strip())


# ----------------------------------------------------------------- simulate


def cmd_simulate(args, argv):
    grid = sp.Grid(nx=args.nx, ny=args.ny)
    params = sp.FlowParams(re=args.re, n=args.n, dt=args.dt)
    ic = sp.random_initial_condition(grid, seed=args.seed)
    if args.discard > 0:
        ic = sp.advance(ic, params, args.discard)
    series = sp.simulate(ic, params, args.t_total, args.save_every)
    storage.write_snapshots(args.out, series)
    _manifest(args.out, argv, [])
    print(f"simulate: wrote {series.count} snapshots to {args.out}")
    return 0


# ------------------------------------------------------------------- reduce


def cmd_reduce(args, argv):
    series = storage.read_snapshots(args.infile)
    aligned = sym.phase_align(series)
    if args.sr or args.rotation:
        aligned = sym.collapse_shift_reflect(aligned)
    if args.rotation:
        if args.template:
            template = storage.read_snapshots(args.template).snapshots[0]
        else:
            template = aligned.snapshots[0].copy()
            tpath = args.out + ".template.kf"
            storage.write_snapshots(
                tpath,
                sp.SnapshotSeries(
                    template[None], series.grid, series.params, series.save_every
                ),
            )
        aligned = sym.collapse_rotation(aligned, template)
    out_series = sp.SnapshotSeries(
        aligned.snapshots, series.grid, series.params, series.save_every
    )
    storage.write_snapshots(args.out, out_series)
    sidecar = args.out + ".ops.csv"
    storage.write_csv(
        sidecar,
        ["t", "phi_x", "phi_y", "sr_power", "rotated"],
        [
            aligned.times,
            aligned.phase.phi_x,
            aligned.phase.phi_y,
            [sym.sr_power_of(o) for o in aligned.ops_applied],
            [int(sym.was_rotated(o)) for o in aligned.ops_applied],
        ],
    )
    _manifest(args.out, argv, [args.infile] + ([args.template] if args.template else []))
    print(f"reduce: wrote {args.out} and {sidecar}")
    return 0


# --------------------------------------------------------------------- pca


def cmd_pca(args, argv):
    series = storage.read_snapshots(args.infile)
    basis = red.fit_pca(series.flattened(), center=not args.no_center)
    scale = float(np.max(np.abs(series.flattened())))
    storage.write_pca(args.out, basis, scale=scale)
    _manifest(args.out, argv, [args.infile])
    print(f"pca: wrote {args.out}")
    return 0


# ---------------------------------------------------------------- train-ae


def _split(flat, frac):
    cut = int(round(len(flat) * (1.0 - frac)))
    return flat[:cut], flat[cut:]


def cmd_train_ae(args, argv):
    series = storage.read_snapshots(args.infile)
    train, test = _split(series.flattened(), args.test_frac)
    cfg = TrainConfig(
        epochs=args.epochs, batch_size=args.batch, lr=args.lr, seed=args.seed_base
    )
    ae, info = red.train_autoencoder(
        train,
        test,
        args.dh,
        cfg,
        n_models=args.models,
        enc_hidden=_widths(args.enc_hidden),
        dec_hidden=_widths(args.dec_hidden),
        center=not args.no_center,
        scale=not args.no_scale,
    )
    meta = {
        "test_mse": info["test_mse"],
        "pca_test_mse": info["pca_test_mse"],
        "best_seed": info["best_seed"],
        "epochs": args.epochs,
        "enc_hidden": list(_widths(args.enc_hidden)),
        "dec_hidden": list(_widths(args.dec_hidden)),
        "re": series.params.re,
        "n": series.params.n,
        "dt": series.params.dt,
        "save_every": series.save_every,
    }
    red.save_bundle(args.out, ae, meta)
    best = info["models"][[m["seed"] for m in info["models"]].index(info["best_seed"])]
    storage.write_csv(
        os.path.join(args.out, "loss.csv"),
        ["epoch", "train_loss", "test_loss"],
        list(zip(*best["history"])),
    )
    _manifest(os.path.join(args.out, "meta.json"), argv, [args.infile])
    print(
        f"train-ae: d_h={args.dh} test MSE {info['test_mse']:.6g} "
        f"(PCA {info['pca_test_mse']:.6g}) -> {args.out}"
    )
    return 0


# ------------------------------------------------------------------ encode


def cmd_encode(args, argv):
    ae = red.load_bundle(args.model)
    series = storage.read_snapshots(args.infile)
    h = red.encode(ae, series.flattened())
    sidecar = args.sidecar or (args.infile + ".ops.csv")
    if os.path.exists(sidecar):
        _, cols = storage.read_csv(sidecar)
        phi = cols["phi_x"]
    else:
        phi = np.zeros(series.count)
    header = ["t"] + [f"h_{k+1}" for k in range(ae.d_h)] + ["phi_x"]
    columns = [series.times] + [h[:, k] for k in range(ae.d_h)] + [phi]
    storage.write_csv(args.out, header, columns)
    _manifest(args.out, argv, [args.infile])
    print(f"encode: wrote {args.out}")
    return 0


def _read_latent(path):
    header, cols = storage.read_csv(path)
    hcols = [c for c in header if c.startswith("h_")]
    h = np.stack([cols[c] for c in hcols], axis=1)
    t = cols["t"]
    tau = float(t[1] - t[0]) if len(t) > 1 else ld.DEFAULT_TAU
    return ld.LatentSeries(h, cols["phi_x"], tau=tau)


def _split_latent(latent, frac):
    cut = int(round(latent.count * (1.0 - frac)))
    return (
        ld.LatentSeries(latent.h[:cut], latent.phi_x[:cut], latent.tau),
        ld.LatentSeries(latent.h[cut:], latent.phi_x[cut:], latent.tau),
    )


# ------------------------------------------------------------ map training


def _map_cfg(args):
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        lr_drop_epoch=args.lr_drop_epoch,
        lr_drop_factor=0.1,
        seed=args.seed_base,
    )


def cmd_train_map(args, argv):
    latent = _read_latent(args.latent)
    train, test = _split_latent(latent, args.test_frac)
    tmap, info = ld.train_map(
        train, test, _map_cfg(args), n_models=args.models, hidden=_widths(args.hidden)
    )
    ld.save_map(args.model_dir, tmap, "fmap")
    _manifest(os.path.join(args.model_dir, "fmap.knet1"), argv, [args.latent])
    print(f"train-map: one-step test MSE {info['test_mse']:.6g} -> {args.model_dir}/fmap")
    return 0


def cmd_train_phase(args, argv):
    latent = _read_latent(args.latent)
    train, test = _split_latent(latent, args.test_frac)
    gmap, info = ld.train_phase_map(
        train, test, _map_cfg(args), n_models=args.models, hidden=_widths(args.hidden)
    )
    ld.save_map(args.model_dir, gmap, "gmap")
    _manifest(os.path.join(args.model_dir, "gmap.knet1"), argv, [args.latent])
    print(f"train-phase: test MSE {info['test_mse']:.6g} -> {args.model_dir}/gmap")
    return 0


# ----------------------------------------------------------------- rollout


def _bundle_params(model_dir):
    with open(os.path.join(model_dir, "meta.json")) as f:
        meta = json.load(f)
    return (
        sp.FlowParams(re=meta["re"], n=meta["n"], dt=meta["dt"]),
        meta.get("save_every", ld.DEFAULT_TAU),
    )


def cmd_rollout(args, argv):
    ae = red.load_bundle(args.model_dir)
    tmap = ld.load_map(args.model_dir, "fmap", "pattern")
    gpath = os.path.join(args.model_dir, "gmap.knet1")
    gmap = ld.load_map(args.model_dir, "gmap", "phase") if os.path.exists(gpath) else None
    latent = _read_latent(args.latent)
    h0 = latent.h[args.ic_index]
    phi0 = float(latent.phi_x[args.ic_index])
    series = ld.rollout(tmap, gmap, h0, phi0, args.steps, tau=latent.tau)
    header = ["t"] + [f"h_{k+1}" for k in range(series.d_h)] + ["phi_x"]
    storage.write_csv(
        args.out,
        header,
        [series.times] + [series.h[:, k] for k in range(series.d_h)] + [series.phi_x],
    )
    _manifest(args.out, argv, [args.latent])
    if args.decode_out:
        params, _ = _bundle_params(args.model_dir)
        grid = sp.Grid(nx=args.nx, ny=args.ny)
        snaps = ld.decode_rollout(ae, series, grid, params, apply_phase=args.apply_phase)
        storage.write_snapshots(args.decode_out, snaps)
        _manifest(args.decode_out, argv, [args.latent])
    print(f"rollout: {args.steps} steps from IC {args.ic_index} -> {args.out}")
    return 0


# ------------------------------------------------------------------- label


def cmd_label(args, argv):
    series = storage.read_snapshots(args.infile)
    labels = lb.label(
        series,
        norm_threshold=args.norm_threshold,
        diff_threshold=args.diff_threshold,
        b=args.past,
        f=args.future,
    )
    idx = labels.snapshot_indices
    storage.write_csv(
        args.out,
        ["index", "norm", "label"],
        [idx, labels.norms[idx], labels.labels],
    )
    _manifest(args.out, argv, [args.infile])
    frac = float(np.mean(labels.labels))
    print(f"label: {len(idx)} labeled snapshots, bursting fraction {frac:.3f}")
    return 0


def _read_labels(path) -> lb.LabelSeries:
    _, cols = storage.read_csv(path)
    idx = cols["index"].astype(int)
    first = int(idx[0])
    last = int(idx[-1]) + 1
    norms = np.zeros(last)  # norms known only on the labeled range
    norms[idx] = cols["norm"]
    return lb.LabelSeries(cols["label"].astype(int), first, last, norms)


# ------------------------------------------------------------------- stats


def _observables(path):
    series = storage.read_snapshots(path)
    return sp.series_observables(series.snapshots, series.grid, series.params), series


def _pdf_fields(obs, what):
    if what == "id":
        return obs["i"], obs["d"]
    if what == "a01":
        return obs["re_a01"], obs["im_a01"]
    raise ValueError(f"unknown pdf variables {what!r}")


def cmd_stats_pdf(args, argv):
    obs, _ = _observables(args.infile)
    a, b = _pdf_fields(obs, args.what)
    if args.range_with:
        obs_t, _ = _observables(args.range_with)
        at, bt = _pdf_fields(obs_t, args.what)
        ranges = (st.pooled_range(a, at), st.pooled_range(b, bt))
    else:
        ranges = (st.pooled_range(a), st.pooled_range(b))
    hist = st.joint_pdf(a, b, bins=args.bins, ranges=ranges)
    xc = 0.5 * (hist.x_edges[:-1] + hist.x_edges[1:])
    yc = 0.5 * (hist.y_edges[:-1] + hist.y_edges[1:])
    xx, yy = np.meshgrid(xc, yc, indexing="ij")
    storage.write_csv(
        args.out,
        ["x", "y", "density"],
        [xx.ravel(), yy.ravel(), hist.density.ravel()],
    )
    _manifest(
        args.out, argv, [args.infile] + ([args.range_with] if args.range_with else [])
    )
    print(f"stats pdf: wrote {args.out}")
    return 0


def _hist_from_csv(path) -> st.Histogram2D:
    _, cols = storage.read_csv(path)
    x = np.unique(cols["x"])
    y = np.unique(cols["y"])
    dens = cols["density"].reshape(len(x), len(y))
    dx = x[1] - x[0] if len(x) > 1 else 1.0
    dy = y[1] - y[0] if len(y) > 1 else 1.0
    xe = np.concatenate([x - dx / 2, [x[-1] + dx / 2]])
    ye = np.concatenate([y - dy / 2, [y[-1] + dy / 2]])
    mass = dens * dx * dy
    counts = np.round(mass * 1e12).astype(np.int64)  # mass ratios preserved
    return st.Histogram2D(xe, ye, counts, dens)


def cmd_stats_kl(args, argv):
    pred = _hist_from_csv(args.pred)
    truth = _hist_from_csv(args.truth)
    if pred.counts.shape != truth.counts.shape:
        raise BinMismatchError("PDF grids differ between files")
    kl = st.kl_divergence(pred, truth)
    print(f"stats kl: D_KL(pred||truth) = {kl:.6g}")
    if args.out:
        storage.write_csv(args.out, ["kl"], [[kl]])
        _manifest(args.out, argv, [args.pred, args.truth])
    return 0


def cmd_stats_durations(args, argv):
    labels = _read_labels(args.labels)
    t_q, t_b = lb.durations(labels, args.tau)
    kinds = ["q"] * len(t_q) + ["b"] * len(t_b)
    storage.write_csv(
        args.out, ["kind", "duration"], [kinds, np.concatenate([t_q, t_b])]
    )
    _manifest(args.out, argv, [args.labels])
    mq = float(np.mean(t_q)) if len(t_q) else float("nan")
    mb = float(np.mean(t_b)) if len(t_b) else float("nan")
    print(f"stats durations: <t_q> = {mq:.4g}, <t_b> = {mb:.4g} -> {args.out}")
    return 0


def cmd_stats_msd(args, argv):
    latent = _read_latent(args.infile)
    phi = sym.unwrap_increments(latent.phi_x) if args.unwrap else latent.phi_x
    curve = st.msd(phi, latent.tau, args.max_lag_steps)
    storage.write_csv(args.out, ["lag", "msd"], [curve.lags, curve.msd])
    _manifest(args.out, argv, [args.infile])
    print(f"stats msd: wrote {args.out}")
    return 0


def cmd_stats_ensemble(args, argv):
    ae = red.load_bundle(args.model_dir)
    tmap = None
    if not args.replay_truth:
        tmap = ld.load_map(args.model_dir, "fmap", "pattern")
    truth = storage.read_snapshots(args.truth)
    latent = _read_latent(args.latent)
    labels = _read_labels(args.labels)
    ics = st.sample_ics(labels, args.horizon_steps, args.n_ics, seed=args.seed)
    err = st.ensemble_error(
        truth.flattened(),
        latent.h,
        ae,
        tmap,
        labels,
        ics,
        args.horizon_steps,
        tau=latent.tau,
    )
    storage.write_csv(
        args.out,
        ["lead_time", "pooled", "quiescent", "bursting"],
        [err.lead_times, err.pooled, err.quiescent, err.bursting],
    )
    _manifest(args.out, argv, [args.truth, args.latent, args.labels])
    print(
        f"stats ensemble: {err.n_quiescent} quiescent / {err.n_bursting} bursting ICs "
        f"-> {args.out}"
    )
    return 0


# ----------------------------------------------------------- predict-burst


def cmd_predict_burst(args, argv):
    labels = _read_labels(args.labels)
    inputs = [args.labels]
    kind = args.indicator
    if kind in ("latent", "pca"):
        if kind == "latent":
            latent = _read_latent(args.latent)
            feats = latent.h[:, : args.dh]
            inputs.append(args.latent)
        else:
            ae = red.load_bundle(args.model_dir)
            series = storage.read_snapshots(args.infile)
            feats = ae.pca.coefficients(series.flattened())[:, : args.dh] / ae.input_scale
            inputs.append(args.infile)
    elif kind in ("mode10", "mode02"):
        series = storage.read_snapshots(args.infile)
        a = np.fft.fft2(series.snapshots, axes=(-2, -1)) / series.grid.npoints
        amp = np.abs(a[:, 1, 0]) if kind == "mode10" else np.abs(a[:, 0, 2])
        feats = amp[:, None]
        inputs.append(args.infile)
    elif kind == "dphi":
        latent = _read_latent(args.latent)
        dphi = np.zeros(latent.count)
        dphi[1:] = sym.wrap_angle(np.diff(latent.phi_x))
        feats = dphi[:, None]
        inputs.append(args.latent)
    else:
        raise ValueError(f"unknown indicator {kind!r}")
    tau = args.tau
    steps = [int(round(t / tau)) for t in np.arange(0.0, args.tau_b_max + tau / 2, tau)]
    rows = bp.evaluate_horizon_sweep(
        {kind: feats},
        labels,
        steps,
        c=args.c,
        gamma=args.gamma,
        max_train=args.max_train,
        seed=args.seed,
    )
    storage.write_csv(
        args.out,
        ["indicator", "tau_b", "accuracy_pct", "recall_pct", "majority_pct"],
        [
            [r["indicator"] for r in rows],
            [r["tau_b_steps"] * tau for r in rows],
            [r["accuracy_pct"] for r in rows],
            [r["recall_pct"] for r in rows],
            [r["majority_pct"] for r in rows],
        ],
    )
    _manifest(args.out, argv, inputs)
    print(f"predict-burst: {len(rows)} rows -> {args.out}")
    return 0


# --------------------------------------------------------------------- run


def cmd_run(args, argv):
    try:
        with open(args.config) as f:
            config = json.load(f)
        stages = config["stages"]
        assert isinstance(stages, list)
    except (OSError, json.JSONDecodeError, KeyError, AssertionError) as e:
        print(f"kolmo run: bad config {args.config}: {e}", file=sys.stderr)
        return 2
    for k, stage in enumerate(stages):
        if not isinstance(stage, dict) or "cmd" not in stage:
            print(f"kolmo run: stage {k} lacks a 'cmd'", file=sys.stderr)
            return 2
        stage_argv = stage["cmd"].split()  # "stats pdf" style subcommands
        for key, val in stage.get("args", {}).items():
            flag = "--" + key.replace("_", "-")
            if isinstance(val, bool):
                if val:
                    stage_argv.append(flag)
            else:
                stage_argv.extend([flag, str(val)])
        print(f"kolmo run [{k+1}/{len(stages)}]: {' '.join(stage_argv)}")
        rc = main(stage_argv)
        if rc != 0:
            print(
                f"kolmo run: stage {k+1} ({stage['cmd']}) failed with exit {rc}",
                file=sys.stderr,
            )
            return 1
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kolmo", description=__doc__)
    p.add_argument("--version", action="version", version=f"kolmo {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    q = sub.add_parser("simulate", help="integrate the flow and save snapshots")
    q.add_argument("--re", type=float, required=True)
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--nx", type=int, default=32)
    q.add_argument("--ny", type=int, default=32)
    q.add_argument("--dt", type=float, default=0.01)
    q.add_argument("--t-total", type=float, required=True)
    q.add_argument("--save-every", type=float, default=5.0)
    q.add_argument("--discard", type=float, default=0.0)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("reduce", help="phase-align and collapse symmetries")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--phase", action="store_true", help="phase alignment (always applied)")
    q.add_argument("--sr", action="store_true", help="collapse shift-reflect")
    q.add_argument("--rotation", action="store_true", help="collapse rotation")
    q.add_argument("--template", default=None)
    q.set_defaults(func=cmd_reduce)

    q = sub.add_parser("pca", help="fit a PCA basis from aligned snapshots")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--no-center", action="store_true")
    q.set_defaults(func=cmd_pca)

    q = sub.add_parser("train-ae", help="train the autoencoder ensemble")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--dh", type=int, required=True)
    q.add_argument("--epochs", type=int, default=300)
    q.add_argument("--batch", type=int, default=64)
    q.add_argument("--lr", type=float, default=1e-3)
    q.add_argument("--models", type=int, default=4)
    q.add_argument("--enc-hidden", default="5000,1000")
    q.add_argument("--dec-hidden", default="1000,5000")
    q.add_argument("--test-frac", type=float, default=0.2)
    q.add_argument("--seed-base", type=int, default=0)
    q.add_argument("--no-center", action="store_true")
    q.add_argument("--no-scale", action="store_true")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_train_ae)

    q = sub.add_parser("encode", help="map snapshots to latent coordinates")
    q.add_argument("--model", required=True)
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--sidecar", default=None)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_encode)

    for name, default_hidden, func in (
        ("train-map", "500,500", cmd_train_map),
        ("train-phase", "500,500,500", cmd_train_phase),
    ):
        q = sub.add_parser(name, help=f"{name} ensemble on latent data")
        q.add_argument("--model-dir", required=True)
        q.add_argument("--latent", required=True)
        q.add_argument("--epochs", type=int, default=600)
        q.add_argument("--batch", type=int, default=64)
        q.add_argument("--lr", type=float, default=1e-3)
        q.add_argument("--lr-drop-epoch", type=int, default=300)
        q.add_argument("--models", type=int, default=5)
        q.add_argument("--hidden", default=default_hidden)
        q.add_argument("--test-frac", type=float, default=0.2)
        q.add_argument("--seed-base", type=int, default=0)
        q.set_defaults(func=func)

    q = sub.add_parser("rollout", help="recurrent latent prediction")
    q.add_argument("--model-dir", required=True)
    q.add_argument("--latent", required=True, help="latent CSV supplying the IC")
    q.add_argument("--steps", type=int, required=True)
    q.add_argument("--ic-index", type=int, default=0)
    q.add_argument("--apply-phase", action="store_true")
    q.add_argument("--decode-out", default=None)
    q.add_argument("--nx", type=int, default=32)
    q.add_argument("--ny", type=int, default=32)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_rollout)

    q = sub.add_parser("label", help="quiescent/bursting labeling")
    q.add_argument("--in", dest="infile", required=True)
    q.add_argument("--norm-threshold", type=float, default=60.0)
    q.add_argument("--diff-threshold", type=float, default=5.0)
    q.add_argument("--past", type=int, default=10)
    q.add_argument("--future", type=int, default=10)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_label)

    q = sub.add_parser("stats", help="statistics subcommands")
    ssub = q.add_subparsers(dest="stats_cmd", required=True)

    s = ssub.add_parser("pdf", help="joint PDF of I-D or Re/Im a01")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--what", choices=("id", "a01"), default="id")
    s.add_argument("--range-with", default=None,
                   help="pool the histogram range with this run's data")
    s.add_argument("--bins", type=int, default=100)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stats_pdf)

    s = ssub.add_parser("kl", help="KL divergence between two PDF files")
    s.add_argument("--pred", required=True)
    s.add_argument("--truth", required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_stats_kl)

    s = ssub.add_parser("durations", help="quiescent/bursting interval durations")
    s.add_argument("--labels", required=True)
    s.add_argument("--tau", type=float, default=5.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stats_durations)

    s = ssub.add_parser("msd", help="mean squared displacement of the phase")
    s.add_argument("--in", dest="infile", required=True, help="latent CSV with phi_x")
    s.add_argument("--max-lag-steps", type=int, default=200)
    s.add_argument("--unwrap", action="store_true", help="phi_x is wrapped; unwrap it")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stats_msd)

    s = ssub.add_parser("ensemble", help="tracking error over many ICs")
    s.add_argument("--model-dir", required=True)
    s.add_argument("--truth", required=True, help="aligned KFLOW1 truth")
    s.add_argument("--latent", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--n-ics", type=int, default=1000)
    s.add_argument("--horizon-steps", type=int, default=12)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--replay-truth", action="store_true",
                   help="replay true latents (reconstruction floor)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stats_ensemble)

    q = sub.add_parser("predict-burst", help="SVM bursting prediction sweep")
    q.add_argument("--indicator", choices=bp.INDICATOR_KINDS, required=True)
    q.add_argument("--dh", type=int, default=5)
    q.add_argument("--tau", type=float, default=5.0)
    q.add_argument("--tau-b-max", type=float, default=50.0)
    q.add_argument("--c", type=float, default=1.0)
    q.add_argument("--gamma", type=float, default=None)
    q.add_argument("--max-train", type=int, default=5000)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--labels", required=True)
    q.add_argument("--latent", default=None)
    q.add_argument("--in", dest="infile", default=None)
    q.add_argument("--model-dir", default=None)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_predict_burst)

    q = sub.add_parser("run", help="execute a staged pipeline config")
    q.add_argument("config")
    q.set_defaults(func=cmd_run)

    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args, argv)
    except (KolmoError, OSError, ValueError, KeyError, IndexError) as e:
        print(f"kolmo: {args.cmd}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
