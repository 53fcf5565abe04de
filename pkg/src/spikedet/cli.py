"""Command-line surface.

Subcommands: law (spectral-law queries), tw (Tracy-Widom CDF/quantile),
network (spec ingestion check), scenario (catalog listing and
observability), detect / localize (on stored observation matrices), and
simulate (Monte Carlo sweeps and histogram runs).

Exit codes: 0 success (detect: H0), 2 usage or missing file, 3 domain
error, 4 localization inconclusive, 10 detect rejected H0.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return s if s else "0"


def _report_to_dict(report) -> dict:
    from dataclasses import asdict

    d = asdict(report)
    return d


def cmd_law(args) -> int:
    from .spectral_law import MarchenkoPastur
    from .spike_algebra import rho_of_omega_mp, zeta_mp

    law = MarchenkoPastur(args.c)
    if args.edges:
        print(f"a={_fmt(law.a)} b={_fmt(law.b)}")
        return 0
    if args.rho:
        if args.omega is None:
            raise ValueError("--rho requires --omega")
        rho = rho_of_omega_mp(args.omega, args.c)
        zeta = zeta_mp(args.omega, args.c)
        print(f"rho={_fmt(rho)} zeta={_fmt(zeta)}")
        return 0
    if args.m_at is not None:
        x = args.m_at
        m = law.m(x)
        print(
            f"m={_fmt(m.real)} h={_fmt(law.h(x))} h'={_fmt(law.h_prime(x))} "
            f"a={_fmt(law.a)} b={_fmt(law.b)}"
        )
        return 0
    raise ValueError("nothing to do: pass --edges, --rho or --m-at")


def cmd_tw(args) -> int:
    from .tracy_widom import tw2_cdf, tw2_quantile

    if args.cdf is not None:
        print(f"F={tw2_cdf(args.cdf):.6f}")
        return 0
    if args.quantile is not None:
        print(f"s={tw2_quantile(args.quantile):.6f}")
        return 0
    raise ValueError("nothing to do: pass --cdf or --quantile")


def cmd_network(args) -> int:
    from .failure_models import network_from_spec

    model = network_from_spec(args.spec)
    gram_min = float(np.linalg.eigvalsh(model.gram()).min())
    print(
        json.dumps(
            {
                "N": model.N,
                "p": model.p,
                "sigma2": model.sigma2,
                "gram_min_eigenvalue": gram_min,
                "psd": bool(gram_min >= 0.0),
            }
        )
    )
    return 0


def _load_catalog(path: str | Path):
    from .failure_models import network_from_spec, node_failure_scenario, param_change_scenario

    doc = json.loads(Path(path).read_text())
    spec = doc["network"]
    if isinstance(spec, str):
        spec_path = (Path(path).parent / spec).resolve()
        spec = json.loads(spec_path.read_text())
    if "channel" in doc:
        spec = dict(spec, channel=doc["channel"])
    model = network_from_spec(spec)
    scenarios = []
    for idx, item in enumerate(doc["scenarios"], start=1):
        kind = item["type"]
        sid = item.get("id", idx)
        if kind == "node_failure":
            scenarios.append(
                node_failure_scenario(
                    model, item["nodes"], item.get("sigma_fail"), id=sid,
                    label=item.get("label"),
                )
            )
        elif kind == "param_change":
            scenarios.append(
                param_change_scenario(
                    model, item["params"], item["beta"], id=sid, label=item.get("label")
                )
            )
        else:
            raise ValueError(f"unknown scenario type {kind!r}")
    return model, scenarios


def cmd_scenario(args) -> int:
    from .detection import observability_thresholds

    model, scenarios = _load_catalog(args.catalog)
    obs = observability_thresholds(scenarios, model.N)
    out = {
        "N": model.N,
        "scenarios": [
            {"id": sc.id, "label": sc.label, "omegas": [round(w, 8) for w in sc.omegas()]}
            for sc in scenarios
        ],
        "c_plus": obs.c_plus,
        "c_minus": obs.c_minus,
        "n_min_upper": obs.n_min_upper,
        "n_min_lower": obs.n_min_lower,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_detect(args) -> int:
    from .detection import DetectionConfig, detect
    from .matio import read_matrix
    from .spectrum import SpikeSpectrum

    sigma = read_matrix(args.input)
    spectrum = SpikeSpectrum.from_observations(sigma, compute_vectors=False)
    mode = args.mode.replace("-", "_")
    config = DetectionConfig(eta=args.eta, mode=mode, fixed_b=args.b)
    report = detect(spectrum, config)
    print(json.dumps(_report_to_dict(report)))
    return 10 if report.rejected else 0


def cmd_localize(args) -> int:
    from .localization import LocalizeOptions, localize_known, localize_unknown_amplitude
    from .matio import read_matrix
    from .spectrum import SpikeSpectrum

    sigma = read_matrix(args.input)
    spectrum = SpikeSpectrum.from_observations(sigma)
    model, scenarios = _load_catalog(args.catalog)
    if args.unknown_amplitude:
        basis = [sc.spikes[0].basis[:, 0] for sc in scenarios]
        report = localize_unknown_amplitude(spectrum, basis, side=args.side)
    else:
        opts = LocalizeOptions(
            preselect_count=args.preselect,
            use_eigenvalue_terms=not args.no_eigenvalue_terms,
            max_top=args.max_top,
            max_bottom=args.max_bottom,
        )
        report = localize_known(spectrum, scenarios, opts)
    payload = _report_to_dict(report)
    if report.chosen is not None:
        payload["chosen_id"] = scenarios[report.chosen].id
    print(json.dumps(payload))
    return 4 if report.status == "inconclusive" else 0


def cmd_simulate(args) -> int:
    from .presets import figure_preset
    from .sim_harness import (
        ExperimentConfig,
        result_to_csv,
        run_detection_localization_sweep,
        run_histogram_experiment,
    )

    if args.figure is not None:
        config = figure_preset(args.figure, trials=args.trials, base_seed=args.seed)
    elif args.config is not None:
        doc = json.loads(Path(args.config).read_text())
        model, scenarios = _load_catalog(args.config) if "scenarios" in doc else (None, [])
        from .localization import LocalizeOptions

        config = ExperimentConfig(
            N=doc["N"] if model is None else model.N,
            n_grid=tuple(doc["n_grid"]),
            etas=tuple(doc["etas"]),
            trials=args.trials or int(doc.get("trials", 1000)),
            base_seed=args.seed if args.seed is not None else int(doc.get("base_seed", 0)),
            scenarios=tuple(scenarios),
            true_index=doc.get("true_index"),
            detection_mode=doc.get("detection_mode", "upper"),
            localize_opts=LocalizeOptions(
                use_eigenvalue_terms=doc.get("use_eigenvalue_terms", True)
            ),
            unknown_amplitude=doc.get("unknown_amplitude", False),
            label=doc.get("label", Path(args.config).stem),
        )
    else:
        raise ValueError("pass --figure or --config")

    if args.figure == 1:
        result = run_histogram_experiment(config, workers=args.workers)
        out = Path(args.out or "preset1_samples.txt")
        with open(out, "w") as fh:
            for v in result.samples["v"]:
                fh.write(f"{v:.10f}\n")
        sidecar = out.with_suffix(out.suffix + ".json")
        sidecar.write_text(json.dumps(result.meta, sort_keys=True))
        print(f"wrote {out} and {sidecar}")
        return 0

    result = run_detection_localization_sweep(config, workers=args.workers)
    csv = result_to_csv(result)
    if args.out:
        Path(args.out).write_text(csv)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spikedet",
        description="Spiked-model detection and localization toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("law", help="Marchenko-Pastur law queries")
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--m-at", type=float, default=None)
    p.add_argument("--edges", action="store_true")
    p.add_argument("--rho", action="store_true")
    p.add_argument("--omega", type=float, default=None)
    p.set_defaults(func=cmd_law)

    p = sub.add_parser("tw", help="Tracy-Widom CDF / quantile")
    p.add_argument("--cdf", type=float, default=None)
    p.add_argument("--quantile", type=float, default=None)
    p.set_defaults(func=cmd_tw)

    p = sub.add_parser("network", help="validate and summarize a network spec")
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_network)

    p = sub.add_parser("scenario", help="list a scenario catalog and observability")
    p.add_argument("--catalog", required=True)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("detect", help="failure-presence test on a stored matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument(
        "--mode",
        default="upper",
        choices=["upper", "lower", "two-sided-fixed-b", "two-sided-symmetric"],
    )
    p.add_argument("--b", type=float, default=None)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("localize", help="failure identification on a stored matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--preselect", type=int, default=None)
    p.add_argument("--unknown-amplitude", action="store_true")
    p.add_argument("--side", default="upper", choices=["upper", "lower"])
    p.add_argument("--no-eigenvalue-terms", action="store_true")
    p.add_argument("--max-top", type=int, default=None)
    p.add_argument("--max-bottom", type=int, default=None)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("simulate", help="Monte Carlo studies")
    p.add_argument("--figure", type=int, default=None, choices=[1, 3, 4, 5])
    p.add_argument("--config", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=20140213)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
