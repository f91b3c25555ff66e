"""
End-to-end cold-boot pipeline: Q1, Q2, UF and Q3 dumps, their pairwise diffs,
pixmaps and table.

Stages
------
simulate   Q1 = new_image(map, seed), the memory before the reset.
footprint  Q2 = apply_footprint(Q1, profile, seed), the memory after the
           firmware ran.
acquire    The agent streams Q2 over loopback. With an acquisition footprint A
           configured, memory changes while the traversal runs: pages at and
           above the switch address are read from apply_footprint(Q2, A).
receive    The receiver writes the UF dump.
diff       Pairwise reports in the order Q1Q2, Q1UF, Q1Q3, Q2UF, Q2Q3, UFQ3.
render     One pixmap per pair.

Q3 is the memory after the acquisition finished (Q2 with A applied, or Q2).
Failures are re-raised as `StageFailed` carrying the stage name.
"""

from __future__ import annotations

import logging
import socket
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

from django.conf import settings

from acquisition.agent import AcquisitionSummary, ImageSource, PageSource, PerturbedSource, acquire
from acquisition.artifacts import DumpArtifact
from acquisition.receiver import ReceiverServer
from core.config import Endpoint, PipelineConfig
from core.errors import StageFailed, WorkbenchError
from core.logging import bind_session
from diffing.engine import DiffReport, pairwise_report
from diffing.render import render_diff
from diffing.tables import format_table, report_to_json
from memory.fixtures import default_footprint_profile, vm_map
from memory.footprint import FootprintProfile, apply_footprint, check_profile
from memory.image import MemoryImage, new_image, write_raw_dump
from memory.ranges import MemoryMap
from memory.sidecar import load_footprint_profile, load_map_sidecar, write_footprint_profile, write_map_sidecar

logger = logging.getLogger("workbench.pipeline")

DUMP_LABELS = ("Q1", "Q2", "UF", "Q3")


@contextmanager
def stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageFailed:
        raise
    except (WorkbenchError, OSError) as exc:
        raise StageFailed(name, exc) from exc


def resolve_map(config: PipelineConfig) -> MemoryMap:
    return load_map_sidecar(config.map_file) if config.map_file else vm_map()


def resolve_footprint(config: PipelineConfig, memory_map: MemoryMap) -> FootprintProfile:
    """The reboot footprint; empty when `footprint_enabled` is off."""
    if not config.footprint_enabled:
        return FootprintProfile()
    if config.footprint_file:
        return load_footprint_profile(config.footprint_file)
    return default_footprint_profile(memory_map)


def resolve_acquisition_footprint(config: PipelineConfig) -> Optional[FootprintProfile]:
    if config.acquisition_footprint_file is None:
        return None
    return load_footprint_profile(config.acquisition_footprint_file)


@dataclass(frozen=True)
class SimulationResult:
    q1: MemoryImage
    q2: MemoryImage
    paths: Dict[str, Path]


def simulate_images(config: PipelineConfig) -> Tuple[MemoryImage, MemoryImage, FootprintProfile]:
    """In-memory Q1 and Q2 for `config`, with the footprint profile used."""
    with stage("simulate"):
        memory_map = resolve_map(config)
        profile = resolve_footprint(config, memory_map)
        check_profile(profile, memory_map)
        q1 = new_image(memory_map, config.seed, "Q1")
    with stage("footprint"):
        q2 = apply_footprint(q1, profile, config.seed).relabel("Q2")
    return q1, q2, profile


def simulate_post_reset(config: PipelineConfig) -> MemoryImage:
    return simulate_images(config)[1]


def simulate(config: PipelineConfig, out_dir: Optional[Path] = None) -> SimulationResult:
    """Write Q1.raw (pre-reset) and Q2.raw (post-reset) plus map and profile sidecars."""
    target = Path(out_dir or config.output_dir)
    q1, q2, profile = simulate_images(config)
    memory_map = q1.map
    with stage("simulate"):
        target.mkdir(parents=True, exist_ok=True)
        paths = {
            "Q1": write_raw_dump(q1, target / "Q1.raw"),
            "Q2": write_raw_dump(q2, target / "Q2.raw"),
            "map": write_map_sidecar(memory_map, target / "map.json"),
            "footprint": write_footprint_profile(profile, target / "footprint.json"),
        }
    logger.info(
        "simulation written",
        extra={"event_fields": {"out": str(target), "bytes": memory_map.top, "seed": config.seed}},
    )
    return SimulationResult(q1, q2, paths)


def loopback_acquire(
    source: "MemoryImage | PageSource",
    out_dir: Path,
    name: str,
    listen: Endpoint,
    timeout: Optional[float] = None,
) -> Tuple[AcquisitionSummary, DumpArtifact]:
    """Run a receiver and the agent concurrently over `listen` (port 0 picks a free one)."""
    if timeout is None:
        timeout = float(getattr(settings, "ACQUISITION_SOCKET_TIMEOUT_SEC", 60.0))
    with stage("receive"):
        server = ReceiverServer(listen, out_dir, name=name)
    with server, ThreadPoolExecutor(max_workers=1, thread_name_prefix="receiver") as pool:
        pending = pool.submit(server.serve_one, timeout)
        try:
            with stage("acquire"):
                summary = acquire(source, server.endpoint)
        except BaseException:
            _release_accept(server.endpoint)
            raise
        with stage("receive"):
            artifact = pending.result()
    return summary, artifact


def _release_accept(endpoint: Endpoint) -> None:
    """Connect and hang up so a receiver still blocked in accept() returns."""
    try:
        socket.create_connection(endpoint.as_tuple(), timeout=1.0).close()
    except OSError:
        pass


@dataclass
class PipelineResult:
    dumps: Dict[str, Path]
    summary: AcquisitionSummary
    artifact: DumpArtifact
    reports: List[DiffReport]
    pixmaps: Dict[int, Path] = field(default_factory=dict)
    table: str = ""
    report_path: Optional[Path] = None
    table_path: Optional[Path] = None
    session_id: str = ""


def run_pipeline(config: PipelineConfig, timeout: Optional[float] = None) -> PipelineResult:
    out_dir = Path(config.output_dir)
    with bind_session() as sid:
        simulation = simulate(config, out_dir)
        q2 = simulation.q2

        with stage("footprint"):
            acquisition_profile = resolve_acquisition_footprint(config)
            if acquisition_profile is not None:
                check_profile(acquisition_profile, q2.map)
                after = apply_footprint(q2, acquisition_profile, config.seed + 1).relabel("Q3")
                source: PageSource = PerturbedSource.at_fraction(q2, after, config.acquisition_switch)
            else:
                after = q2.relabel("Q3")
                source = ImageSource(q2)

        summary, artifact = loopback_acquire(source, out_dir, "UF", Endpoint(config.listen.host, 0), timeout)

        with stage("simulate"):
            q3_path = write_raw_dump(after, out_dir / "Q3.raw")
        dumps = {
            "Q1": simulation.paths["Q1"],
            "Q2": simulation.paths["Q2"],
            "UF": Path(artifact.raw_dump_path),
            "Q3": q3_path,
        }

        with stage("diff"):
            reports = pairwise_report([(label, dumps[label]) for label in DUMP_LABELS])

        pixmaps: Dict[int, Path] = {}
        with stage("render"):
            for index, report in enumerate(reports):
                path = out_dir / f"{report.dump_a.lower()}{report.dump_b.lower()}.ppm"
                render_diff(report, path)
                pixmaps[index] = path
            table = format_table(reports)
            table_path = out_dir / "table.txt"
            table_path.write_text(table + "\n", encoding="utf-8")
            report_path = out_dir / "report.json"
            report_path.write_text(report_to_json(reports) + "\n", encoding="utf-8")

        logger.info(
            "pipeline finished",
            extra={"event_fields": {
                "out": str(out_dir),
                "pairs": len(reports),
                "window_ns": summary.atomicity_window_ns,
                "confirmed": summary.confirmed,
            }},
        )
        return PipelineResult(
            dumps=dumps,
            summary=summary,
            artifact=artifact,
            reports=reports,
            pixmaps=pixmaps,
            table=table,
            report_path=report_path,
            table_path=table_path,
            session_id=sid,
        )
