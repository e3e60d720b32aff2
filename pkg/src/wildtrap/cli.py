"""Command line interface.

Subcommands: serve, pipeline run, eval run, bench throughput,
fleet simulate, alerts simulate, curation export, curation augment.
Exit codes: 0 success, 1 domain error, 2 usage error. ``--json`` prints a
machine-readable result on stdout.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .alerts.channels import FileChannel
from .alerts.engine import AlertEngine, load_rules
from .curation.augment import AugmentSpec, augment
from .curation.corrections import load_corrections
from .curation.export import export_training_manifest
from .errors import WildtrapError
from .evaluation.export import export_pr_plot_data
from .evaluation.metrics import EvalConfig, evaluate_files
from .geometry import Box
from .ingest.blobstore import BlobStore
from .ingest.cameras import load_camera_registry, save_camera_registry
from .ingest.fleet import LinkModel, simulate_fleet
from .ingest.synth import SyntheticImageSource
from .pipeline.backends import RemoteBackend, SyntheticBackend
from .pipeline.bench import bench_throughput
from .pipeline.runner import PipelineRunner
from .service.config import load_config
from .service.http import serve
from .store.events import EventStore


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wildtrap",
        description="Camera-trap ingest, detection pipeline, alerting and evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the platform service")
    p_serve.add_argument("--config", help="JSON config file")
    p_serve.add_argument("--listen", help="host:port (default 127.0.0.1:8777)")
    p_serve.add_argument("--store", help="store root directory")
    p_serve.add_argument("--rules", help="alert rules JSON file")
    p_serve.add_argument("--cameras", help="camera registry JSON file")
    p_serve.add_argument("--profile", help="model profile JSON file")
    p_serve.add_argument("--token", help="shared auth token")
    p_serve.add_argument("--concurrency", type=int)
    p_serve.add_argument("--jitter", type=float, help="synthetic backend jitter (px)")
    p_serve.add_argument("--seed", type=int, help="synthetic backend seed")
    p_serve.add_argument("--backend-url", help="remote detector URL instead of synthetic")

    p_pipe = sub.add_parser("pipeline", help="pipeline operations")
    pipe_sub = p_pipe.add_subparsers(dest="pipeline_command", required=True)
    p_run = pipe_sub.add_parser("run", help="process stored assets into events")
    p_run.add_argument("--store", required=True)
    p_run.add_argument("--cameras", help="camera registry for realtime priorities")
    p_run.add_argument("--jitter", type=float, default=0.0)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--concurrency", type=int, default=4)
    p_run.add_argument("--retry-limit", type=int, default=3)
    p_run.add_argument("--min-confidence", type=float)
    p_run.add_argument("--backend-url", help="remote detector URL instead of synthetic")
    p_run.add_argument("--all", action="store_true",
                       help="reprocess assets that already have outcomes")
    p_run.add_argument("--json", action="store_true")

    p_eval = sub.add_parser("eval", help="evaluation operations")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)
    p_eval_run = eval_sub.add_parser("run", help="score detections against ground truth")
    p_eval_run.add_argument("--ground-truth", required=True)
    p_eval_run.add_argument("--detections", required=True)
    p_eval_run.add_argument("--iou", type=float, default=0.5)
    p_eval_run.add_argument("--interpolation", choices=("all_points", "eleven_point"),
                            default="all_points")
    p_eval_run.add_argument("--export-dir", help="write PR curve CSVs here")
    p_eval_run.add_argument("--json", action="store_true")

    p_bench = sub.add_parser("bench", help="benchmarks")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)
    p_thr = bench_sub.add_parser("throughput", help="measure pipeline throughput")
    p_thr.add_argument("--latency-ms", type=float, default=5.0)
    p_thr.add_argument("--concurrency", type=int, default=8)
    p_thr.add_argument("--images", type=int, default=20000)
    p_thr.add_argument("--json", action="store_true")

    p_fleet = sub.add_parser("fleet", help="fleet simulation")
    fleet_sub = p_fleet.add_subparsers(dest="fleet_command", required=True)
    p_sim = fleet_sub.add_parser("simulate", help="deliver synthetic captures over a lossy link")
    p_sim.add_argument("--store", required=True)
    p_sim.add_argument("--cameras", type=int, default=4)
    p_sim.add_argument("--images", type=int, default=5)
    p_sim.add_argument("--drop-rate", type=float, default=0.0)
    p_sim.add_argument("--latency-ms", type=float, default=40.0)
    p_sim.add_argument("--bandwidth", type=float, default=1e6)
    p_sim.add_argument("--max-retries", type=int, default=5)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--labels", help="comma-separated truth labels")
    p_sim.add_argument("--box-size", type=int, default=60)
    p_sim.add_argument("--registry-out", help="write the simulated camera registry here")
    p_sim.add_argument("--json", action="store_true")

    p_alerts = sub.add_parser("alerts", help="alert operations")
    alerts_sub = p_alerts.add_subparsers(dest="alerts_command", required=True)
    p_asim = alerts_sub.add_parser("simulate",
                                   help="evaluate stored events against rules and dispatch")
    p_asim.add_argument("--store", required=True)
    p_asim.add_argument("--rules", required=True)
    p_asim.add_argument("--cameras", required=True)
    p_asim.add_argument("--json", action="store_true")

    p_cur = sub.add_parser("curation", help="dataset curation")
    cur_sub = p_cur.add_subparsers(dest="curation_command", required=True)
    p_exp = cur_sub.add_parser("export", help="export a corrected training dataset")
    p_exp.add_argument("--store", required=True)
    p_exp.add_argument("--corrections", help="corrections JSONL (default <store>/corrections.jsonl)")
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--policy", choices=("confirmed_only", "include_unreviewed"),
                       default="confirmed_only")
    p_exp.add_argument("--json", action="store_true")
    p_aug = cur_sub.add_parser("augment", help="write augmented image variants")
    p_aug.add_argument("--image", required=True)
    p_aug.add_argument("--truth", required=True, help="truth sidecar JSON")
    p_aug.add_argument("--out", required=True)
    p_aug.add_argument("--rotations", default="0", help="comma list from 0,90,180,270")
    p_aug.add_argument("--translations", default="0,0",
                       help='semicolon-separated "dx,dy" pairs')
    p_aug.add_argument("--flip", action="store_true")
    p_aug.add_argument("--seed", type=int, default=0)
    p_aug.add_argument("--json", action="store_true")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except (WildtrapError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run(args) -> int:
    if args.command == "serve":
        backend = None
        if args.backend_url:
            backend = {"mode": "remote", "url": args.backend_url}
        elif args.jitter is not None or args.seed is not None:
            backend = {"mode": "truth_sidecar", "jitter_px": args.jitter or 0.0,
                       "seed": args.seed or 0}
        config = load_config(
            config_file=args.config, listen_address=args.listen, store_root=args.store,
            rules_file=args.rules, camera_registry_file=args.cameras,
            profile=args.profile, auth_token=args.token,
            concurrency=args.concurrency, backend=backend)
        return serve(config)

    if args.command == "pipeline":
        return _pipeline_run(args)
    if args.command == "eval":
        return _eval_run(args)
    if args.command == "bench":
        report = bench_throughput(args.latency_ms, args.concurrency, args.images)
        if args.json:
            print(json.dumps(report.to_dict(), sort_keys=True))
        else:
            print(f"{report.images_per_s:.1f} images/s over {report.image_count} images "
                  f"(theoretical {report.theoretical_images_per_s:.1f}/s, "
                  f"overhead {report.overhead_fraction:.1%})")
            print(f"latency p50 {report.p50_ms:.2f} ms, p99 {report.p99_ms:.2f} ms")
        return 0
    if args.command == "fleet":
        return _fleet_simulate(args)
    if args.command == "alerts":
        return _alerts_simulate(args)
    if args.command == "curation":
        if args.curation_command == "export":
            return _curation_export(args)
        return _curation_augment(args)
    raise AssertionError(f"unhandled command {args.command}")


def _pipeline_run(args) -> int:
    blobs = BlobStore(args.store)
    events = EventStore(Path(args.store) / "events")
    try:
        registry = load_camera_registry(args.cameras) if args.cameras else {}
        if args.backend_url:
            profile = _default_profile()
            backend = RemoteBackend(url=args.backend_url, model_id=profile.model_id)
        else:
            profile = _default_profile()
            backend = SyntheticBackend(store=blobs, model_id=profile.model_id,
                                       jitter_px=args.jitter, seed=args.seed)
        runner = PipelineRunner(blobs, events, backend, profile,
                                concurrency=args.concurrency,
                                retry_limit=args.retry_limit,
                                min_confidence=args.min_confidence,
                                retry_backoff_s=0.05)
        assets = [a for a in blobs.iter_assets()
                  if args.all or not events.has_terminal_outcome(a.sha256)]
        priorities = {cid: ("realtime" if cam.realtime else "batch")
                      for cid, cam in registry.items()}
        result = runner.run(assets, priorities=priorities)
        stats = events.platform_stats()
    finally:
        events.close()
    if args.json:
        print(json.dumps({"result": result.to_dict(), "stats": stats}, sort_keys=True))
    else:
        print(f"processed {len(result.processed)} assets, "
              f"{result.events_created} events, "
              f"{len(result.dead_lettered)} dead-lettered, "
              f"{result.retries} retries")
        print(f"platform stats: {stats}")
    return 0


def _default_profile():
    from .pipeline.preprocess import default_profile
    return default_profile()


def _eval_run(args) -> int:
    config = EvalConfig(iou_threshold=args.iou, interpolation=args.interpolation)
    report = evaluate_files(args.detections, args.ground_truth, config)
    if args.export_dir:
        export_pr_plot_data(report, args.export_dir)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
        return 0
    print(f"{'label':<24} {'AP':>8} {'GT':>6} {'dets':>6}")
    for cls in report.per_class:
        print(f"{cls.label:<24} {cls.ap:>8.4f} {cls.n_ground_truth:>6} {cls.n_detections:>6}")
    for entry in report.excluded:
        print(f"{entry['label']:<24} {'—':>8} {0:>6} {entry['n_detections']:>6} (no ground truth)")
    print(f"mAP@{config.iou_threshold:g}: {report.map:.4f} "
          f"({len(report.per_class)} classes)")
    return 0


def _fleet_simulate(args) -> int:
    blobs = BlobStore(args.store)
    link = LinkModel(drop_rate=args.drop_rate, latency_ms=args.latency_ms,
                     bandwidth_bytes_per_s=args.bandwidth,
                     max_retries=args.max_retries, seed=args.seed)
    source = None
    if args.labels or args.box_size != 60:
        labels = tuple(l.strip() for l in (args.labels or "").split(",") if l.strip()) \
            or SyntheticImageSource().labels
        source = SyntheticImageSource(seed=args.seed, labels=labels,
                                      box_size=args.box_size)
    report = simulate_fleet(blobs, args.cameras, args.images, link, source=source)
    if args.registry_out:
        save_camera_registry(report.cameras, args.registry_out)
    if args.json:
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(f"delivered {report.delivered_count}/{len(report.outcomes)} images, "
              f"mean transmissions {report.mean_transmissions:.2f}, "
              f"{report.total_duplicates} duplicate deliveries absorbed, "
              f"{blobs.asset_count()} assets stored")
    return 0


def _alerts_simulate(args) -> int:
    store_root = Path(args.store)
    rules = load_rules(args.rules)
    registry = load_camera_registry(args.cameras)
    events = EventStore(store_root / "events")
    try:
        engine = AlertEngine(rules, registry,
                             audit_path=store_root / "alerts" / "audit.jsonl")
        channel = FileChannel(store_root / "alerts" / "dispatched.jsonl")
        created = []
        skipped = 0
        for event in events.query_events():
            if event.camera_id not in registry:
                skipped += 1
                continue
            created.extend(engine.evaluate_rules(event))
        delivered = sum(
            1 for alert in created
            if engine.dispatch(alert.alert_id, channel).state == "delivered")
        engine.close()
    finally:
        events.close()
    summary = {"alerts_created": len(created), "delivered": delivered,
               "events_skipped_no_camera": skipped}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"{len(created)} alerts created, {delivered} delivered, "
              f"{skipped} events skipped (camera not in registry)")
    return 0


def _curation_export(args) -> int:
    store_root = Path(args.store)
    blobs = BlobStore(store_root)
    events = EventStore(store_root / "events")
    try:
        corrections_path = Path(args.corrections) if args.corrections \
            else store_root / "corrections.jsonl"
        corrections = load_corrections(corrections_path) if corrections_path.exists() else []

        def dims(sha):
            if not blobs.has(sha):
                return None
            try:
                with Image.open(io.BytesIO(blobs.get_bytes(sha))) as img:
                    return img.size
            except Exception:
                return None

        dataset = export_training_manifest(events.events(), corrections,
                                           policy=args.policy, image_info=dims)
        dataset.save(args.out)
    finally:
        events.close()
    summary = {"images": len(dataset.images), "annotations": len(dataset.annotations),
               "categories": len(dataset.categories), "out": str(args.out)}
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(f"wrote {args.out}: {summary['annotations']} annotations over "
              f"{summary['images']} images, {summary['categories']} categories")
    return 0


def _curation_augment(args) -> int:
    image = np.asarray(Image.open(args.image))
    truth = json.loads(Path(args.truth).read_text(encoding="utf-8"))
    boxes = [(entry["label"], Box.from_list(entry["bbox"])) for entry in truth["boxes"]]
    rotations = tuple(int(r) for r in args.rotations.split(",") if r.strip())
    translations = tuple(
        tuple(int(v) for v in pair.split(","))
        for pair in args.translations.split(";") if pair.strip())
    spec = AugmentSpec(rotations=rotations, translations=translations,
                       horizontal_flip=args.flip, seed=args.seed)
    variants = augment(image, boxes, spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    written = []
    for variant in variants:
        img_path = out_dir / f"{stem}_{variant.name}.png"
        Image.fromarray(variant.image).save(img_path)
        sidecar = {"boxes": [{"label": label, "bbox": box.as_list()}
                             for label, box in variant.boxes]}
        (out_dir / f"{stem}_{variant.name}.truth.json").write_text(
            json.dumps(sidecar, sort_keys=True) + "\n", encoding="utf-8")
        written.append(str(img_path))
    if args.json:
        print(json.dumps({"variants": written}, sort_keys=True))
    else:
        print(f"wrote {len(written)} variants to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
