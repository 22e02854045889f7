"""Command-line entry point: ``rqat-inr {encode,decode,sweep,bdrate,macs}``.

Exit status: 0 success, 1 usage error, 2 data error, 3 training failure.
"""

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from PIL import UnidentifiedImageError

from . import metrics
from .bitstream import decode_image
from .codec import EncoderConfig, encode_image
from .errors import InvalidArgumentError, RqatError, TrainingError
from .imageio import load_image, save_image
from .rqat import DEFAULT_LAMBDA_GRID
from .siren import DEFAULT_W0

log = logging.getLogger("rqat_inr")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TRAINING = 0, 1, 2, 3
CSV_FIELDS = [
    "image", "dims", "q", "lambda", "bpp_total", "bpp_payload",
    "psnr_fp", "psnr_quant", "rate_bits_eq3", "seconds",
]
IMAGE_SUFFIXES = {".png", ".ppm"}
THREADS_ENV = "RQAT_INR_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(t) for t in text.replace("-", ",").split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _dims_label(dims):
    return "-".join(str(d) for d in dims)


def _fmt(x):
    return f"{x:.6f}" if isinstance(x, float) else str(x)


def _print_json(obj):
    print(json.dumps(obj, sort_keys=True))


def cmd_encode(args):
    cfg = EncoderConfig(
        layer_dims=args.dims, w0=args.w0, q=args.q, lambda_grid=args.lambda_grid,
        iters_fp=args.iters_fp, iters_qat=args.iters_qat, lr=args.lr, seed=args.seed,
        init=args.init,
    )
    if args.init == "fp" and args.iters_fp < 1:
        raise UsageError("--init fp needs --iters-fp >= 1")
    if not 2 <= args.q <= 15:
        raise UsageError("--q must be between 2 and 15")
    if args.iters_qat < 1 or args.iters_fp < 0:
        raise UsageError("iteration counts must be positive")
    image = load_image(args.input)
    report = encode_image(image, cfg)
    Path(args.output).write_bytes(report.stream)
    _print_json(report.summary())
    return EXIT_OK


def cmd_decode(args):
    data = Path(args.input).read_bytes()
    image = decode_image(data, w0=args.w0)
    save_image(args.output, image)
    summary = {
        "width": image.width,
        "height": image.height,
        "bpp_total": metrics.bpp(data, image.width, image.height),
    }
    if args.reference:
        summary["psnr"] = metrics.psnr(image, load_image(args.reference))
    _print_json(summary)
    return EXIT_OK


def _sweep_configs(sweep_cfg):
    out = []
    for i, c in enumerate(sweep_cfg["configs"]):
        cfg = EncoderConfig(
            layer_dims=tuple(c["dims"]),
            w0=float(c.get("w0", DEFAULT_W0)),
            q=int(c.get("q", 8)),
            lambda_grid=tuple(c.get("lambda_grid", DEFAULT_LAMBDA_GRID)),
            iters_fp=int(c.get("iters_fp", 15000)),
            iters_qat=int(c.get("iters_qat", 15000)),
            lr=float(c.get("lr", 2e-4)),
            seed=int(c.get("seed", 0)),
            init=c.get("init", "fp"),
        )
        out.append(cfg)
    return out


def run_sweep(images, configs, threads=1):
    """Encode every image with every config.

    Returns ``(rows, failures)``; rows are CSV dicts, per-config data rows
    followed by that config's ``AVERAGE`` row.
    """
    jobs = [(cfg, path) for cfg in configs for path in images]

    def work(job):
        cfg, path = job
        try:
            rep = encode_image(load_image(path), cfg)
        except (RqatError, OSError, UnidentifiedImageError) as exc:
            return job, exc
        return job, rep

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(work, jobs))

    rows, failures = [], []
    for cfg in configs:
        mine = []
        for (c, path), rep in results:
            if c is not cfg:
                continue
            if isinstance(rep, Exception):
                failures.append((path, rep))
                log.error("%s failed: %s", path, rep)
                continue
            mine.append({
                "image": Path(path).name,
                "dims": _dims_label(cfg.layer_dims),
                "q": cfg.q,
                "lambda": rep.lam,
                "bpp_total": rep.bpp_total,
                "bpp_payload": rep.bpp_payload,
                "psnr_fp": rep.psnr_fp,
                "psnr_quant": rep.psnr,
                "rate_bits_eq3": rep.rate_bits,
                "seconds": rep.seconds,
            })
        rows += mine
        if mine:
            avg = {"image": "AVERAGE", "dims": _dims_label(cfg.layer_dims), "q": cfg.q, "lambda": ""}
            for key in CSV_FIELDS[4:]:
                avg[key] = sum(r[key] for r in mine) / len(mine)
            rows.append(avg)
    return rows, failures


def write_csv(rows, fh):
    writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})


def cmd_sweep(args):
    sweep_cfg = json.loads(Path(args.config).read_text())
    image_dir = Path(args.images or sweep_cfg.get("image_dir", "."))
    images = sorted(p for p in image_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not images:
        raise UsageError(f"no PNG/PPM images in {image_dir}")
    threads = args.threads or int(os.environ.get(THREADS_ENV, "1"))
    rows, failures = run_sweep(images, _sweep_configs(sweep_cfg), threads)
    if args.output == "-":
        write_csv(rows, sys.stdout)
    else:
        with open(args.output, "w", newline="") as fh:
            write_csv(rows, fh)
    if failures:
        return EXIT_TRAINING if any(isinstance(e, TrainingError) for _, e in failures) else EXIT_DATA
    return EXIT_OK


def read_curve(path, rate_column="bpp_total"):
    """RD points from a sweep CSV: the AVERAGE rows, or every row if there are none."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    avg = [r for r in rows if r["image"] == "AVERAGE"]
    return [
        metrics.RDPoint(float(r[rate_column]), float(r["psnr_quant"]), r["dims"])
        for r in (avg or rows)
    ]


def cmd_bdrate(args):
    value = metrics.bd_rate(read_curve(args.anchor, args.rate_column), read_curve(args.test, args.rate_column))
    _print_json({"bd_rate_percent": value})
    return EXIT_OK


def cmd_macs(args):
    _print_json({"dims": list(args.dims), "kmac_per_pixel": metrics.mac_per_pixel(args.dims)})
    return EXIT_OK


def build_parser():
    p = _Parser(prog="rqat-inr", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("encode", help="compress an image into a stream")
    e.add_argument("input")
    e.add_argument("output")
    e.add_argument("--dims", type=_int_list, default=(2, 32, 32, 32, 32, 32, 3),
                   help="layer widths, e.g. 2,32,32,3")
    e.add_argument("--w0", type=float, default=DEFAULT_W0)
    e.add_argument("--q", type=int, default=8, help="quantization bits (8 for low, 10 for high rates)")
    e.add_argument("--lambda-grid", type=_float_list, default=DEFAULT_LAMBDA_GRID)
    e.add_argument("--iters-fp", type=int, default=15000)
    e.add_argument("--iters-qat", type=int, default=15000)
    e.add_argument("--lr", type=float, default=2e-4)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--init", choices=("fp", "random"), default="fp")
    e.set_defaults(func=cmd_encode)

    d = sub.add_parser("decode", help="reconstruct an image from a stream")
    d.add_argument("input")
    d.add_argument("output")
    d.add_argument("--w0", type=float, default=DEFAULT_W0)
    d.add_argument("--reference", help="original image; adds its PSNR to the summary")
    d.set_defaults(func=cmd_decode)

    s = sub.add_parser("sweep", help="encode a directory under several configs, emit CSV")
    s.add_argument("config", help="JSON file with a 'configs' list")
    s.add_argument("--images", help="image directory (overrides the config's image_dir)")
    s.add_argument("--output", default="-")
    s.add_argument("--threads", type=int, default=0, help=f"worker threads (default ${THREADS_ENV} or 1)")
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bdrate", help="Bjontegaard delta rate of TEST vs ANCHOR sweep CSVs")
    b.add_argument("anchor")
    b.add_argument("test")
    b.add_argument("--rate-column", choices=("bpp_total", "bpp_payload"), default="bpp_total")
    b.set_defaults(func=cmd_bdrate)

    m = sub.add_parser("macs", help="analytic kMAC per pixel of a network")
    m.add_argument("--dims", type=_int_list, required=True)
    m.set_defaults(func=cmd_macs)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rqat-inr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"rqat-inr: training failed: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except (InvalidArgumentError, RqatError, OSError, UnidentifiedImageError, ValueError, KeyError) as exc:
        print(f"rqat-inr: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
