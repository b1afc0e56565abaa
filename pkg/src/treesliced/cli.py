"""Command-line client for the distance pipeline.

Each subcommand is a thin wrapper that reads input files, calls the
service (in-process by default, remote with --server), and writes the
response to disk together with a run manifest. Exit codes: 0 success,
2 usage error, 3 validation failure, 4 I/O error.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from .io import load_matrix_csv, save_gram_csv, save_matrix_csv, write_manifest

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

QUANTILE_CHOICES = ("none", "10", "20", "50")


class CommandError(Exception):
    """Failure with a CLI exit code attached."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _client(server: str = None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client, path: str, payload: dict) -> dict:
    try:
        resp = client.post(path, json=payload)
    except Exception as exc:  # connection refused, DNS, timeouts
        raise CommandError(EXIT_IO, f"service request failed: {exc}") from exc
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise CommandError(EXIT_VALIDATION, f"{path}: {detail}")
    return resp.json()


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise CommandError(EXIT_VALIDATION, f"{path}: invalid JSON ({exc})") from exc


def _write_json(obj, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, separators=(",", ":"))
            fh.write("\n")
    except OSError as exc:
        raise CommandError(EXIT_IO, f"{path}: {exc.strerror or exc}") from exc


def _flags(args) -> dict:
    skip = {"func", "server"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _manifest(args, out_path: str, seed, started: float, extra_artifacts: dict = None):
    artifacts = {os.path.basename(out_path): out_path}
    if extra_artifacts:
        artifacts.update(extra_artifacts)
    return write_manifest(
        out_path + ".manifest.json",
        command=args.func.__name__.removeprefix("cmd_"),
        flags=_flags(args),
        seed=seed,
        artifacts=artifacts,
        timings={"wall_s": time.perf_counter() - started},
    )


def cmd_gen_orbits(args) -> int:
    started = time.perf_counter()
    payload = {
        "classes": args.classes,
        "per_class": args.per_class,
        "points": args.points,
        "seed": args.seed,
    }
    resp = _post(_client(args.server), "/orbits", payload)
    clouds = [{"label": c["label"], "points": c["points"]} for c in resp["clouds"]]
    _write_json(clouds, args.out)
    _manifest(args, args.out, args.seed, started)
    print(f"wrote {len(clouds)} clouds to {args.out}")
    return EXIT_OK


def cmd_build_ensemble(args) -> int:
    started = time.perf_counter()
    measures = _read_json(args.input)
    payload = {
        "measures": measures,
        "kind": args.kind,
        "slices": args.slices,
        "depth": args.depth,
        "kappa": args.kappa,
        "edge_metric": args.edge_metric,
        "expansion": args.expansion,
        "seed": args.seed,
    }
    resp = _post(_client(args.server), "/ensembles", payload)
    _write_json(resp["ensemble"], args.out)
    _manifest(args, args.out, args.seed, started)
    trees = resp["ensemble"]["trees"]
    print(f"wrote ensemble of {len(trees)} trees to {args.out}")
    return EXIT_OK


def cmd_distances(args) -> int:
    started = time.perf_counter()
    measures = _read_json(args.measures)
    payload = {
        "measures": measures,
        "mode": args.mode,
        "threads": args.threads,
        "sw_dirs": args.dirs,
        "seed": args.seed,
    }
    if args.ensemble:
        payload["ensemble"] = _read_json(args.ensemble)
    if args.pairs != "all":
        payload["pairs"] = _read_json(args.pairs)
    resp = _post(_client(args.server), "/distances", payload)
    matrix = np.array(
        [[np.nan if v is None else v for v in row] for row in resp["matrix"]], dtype=np.float64
    )
    try:
        save_matrix_csv(resp["ids"], matrix, args.out)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"{args.out}: {exc.strerror or exc}") from exc
    _manifest(args, args.out, args.seed, started)
    print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} {args.mode} matrix to {args.out}")
    return EXIT_OK


def cmd_gram(args) -> int:
    started = time.perf_counter()
    try:
        ids, matrix = load_matrix_csv(args.dist)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"{args.dist}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise CommandError(EXIT_VALIDATION, str(exc)) from exc
    quantile = None if args.bandwidth_quantile == "none" else float(args.bandwidth_quantile)
    payload = {"ids": ids, "matrix": matrix.tolist(), "bandwidth_quantile": quantile}
    resp = _post(_client(args.server), "/gram", payload)
    try:
        save_gram_csv(resp["ids"], np.asarray(resp["matrix"], dtype=np.float64), args.out)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"{args.out}: {exc.strerror or exc}") from exc
    _manifest(args, args.out, None, started)
    print(f"wrote kernel matrix (bandwidth {resp['bandwidth']:g}) to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    started = time.perf_counter()
    payload = {"suite": args.suite, "seed": args.seed, "trials": args.trials}
    resp = _post(_client(args.server), "/validate", payload)
    failed = []
    for suite in resp["suites"]:
        verdict = "PASS" if suite["passed"] else "FAIL"
        print(f"suite {suite['name']}: {verdict}")
        if not suite["passed"]:
            failed.append(suite)
    if failed:
        print("first failure details:")
        print(json.dumps(failed[0]["details"], indent=2, sort_keys=True))
    if args.out:
        _write_json(resp, args.out)
        _manifest(args, args.out, args.seed, started)
    else:
        manifest = {
            "command": "validate",
            "flags": _flags(args),
            "master_seed": args.seed,
            "artifacts": {},
            "timings": {"wall_s": time.perf_counter() - started},
        }
        print(json.dumps(manifest, sort_keys=True))
    return EXIT_OK if not failed else EXIT_VALIDATION


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("treesliced.service:app", host=args.host, port=args.port)
    return EXIT_OK


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesliced",
        description="Tree-sliced transport distances: generate data, build tree ensembles, "
        "compute distance and kernel matrices, run validation suites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_server(p):
        p.add_argument("--server", default=None, help="remote service URL (default: in-process)")

    p = sub.add_parser("gen-orbits", help="generate the synthetic orbit dataset")
    p.add_argument("--classes", type=float, nargs="+", default=[2.5, 3.5, 4.0, 4.1, 4.3])
    p.add_argument("--per-class", type=_positive_int, default=50)
    p.add_argument("--points", type=_positive_int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    add_server(p)
    p.set_defaults(func=cmd_gen_orbits)

    p = sub.add_parser("build-ensemble", help="sample a tree ensemble over a measure list")
    p.add_argument("--input", required=True, help="measures JSON file")
    p.add_argument("--kind", choices=["quadtree", "cluster"], default="quadtree")
    p.add_argument("--slices", type=_positive_int, default=10)
    p.add_argument("--depth", type=_positive_int, default=6)
    p.add_argument("--kappa", type=_positive_int, default=4)
    p.add_argument("--edge-metric", choices=["euclidean", "l1"], default="euclidean")
    p.add_argument("--expansion", choices=["random", "none"], default="random",
                   help="'none' uses the tight bounding box (deterministic)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    add_server(p)
    p.set_defaults(func=cmd_build_ensemble)

    p = sub.add_parser("distances", help="pairwise distance matrix between measures")
    p.add_argument("--ensemble", default=None, help="ensemble JSON (required for tsw mode)")
    p.add_argument("--measures", required=True)
    p.add_argument("--mode", choices=["tsw", "sw", "exact"], default="tsw")
    p.add_argument("--pairs", default="all", help="'all' or a JSON file of [i,j] pairs")
    p.add_argument("--threads", type=_positive_int,
                   default=int(os.environ.get("TSW_THREADS", "1")))
    p.add_argument("--dirs", type=_positive_int, default=10, help="projection count for sw mode")
    p.add_argument("--seed", type=int, default=0, help="direction seed for sw mode")
    p.add_argument("--out", required=True)
    add_server(p)
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("gram", help="kernel matrix from a distance matrix CSV")
    p.add_argument("--dist", required=True, help="distance CSV from the distances command")
    p.add_argument("--bandwidth-quantile", choices=list(QUANTILE_CHOICES), default="none",
                   help="'none' uses bandwidth 1")
    p.add_argument("--out", required=True)
    add_server(p)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("validate", help="run validation suites")
    p.add_argument("--suite", choices=["all", "oracle", "nd", "bound", "cluster", "rank"],
                   default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=_positive_int, default=None)
    p.add_argument("--out", default=None, help="optional report JSON path")
    add_server(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
