"""Run metrics: nearest-rank percentiles and the combined run report."""

from __future__ import annotations


def percentile(samples: list[float], q: float) -> float:
    """Nearest-rank percentile: always one of the recorded samples."""
    if not samples:
        raise ValueError("no samples")
    if not 0.0 < q <= 100.0:
        raise ValueError(f"q {q}")
    ordered = sorted(samples)
    rank = max(1, -(-len(ordered) * q // 100))   # ceil without math import
    return ordered[int(rank) - 1]


def build_report(device_report: dict, host_report: dict,
                 session_dir: str | None = None) -> dict:
    """Merge the two sides' exit reports into the run-level document."""
    sent = device_report.get("frames_sent", 0)
    received = host_report.get("frames_received", 0)
    lat = device_report.get("latency_samples_ms", [])
    report = {
        "frames_sent": sent,
        "frames_received": received,
        "frames_dropped": max(0, sent - received),
        "frames_processed": host_report.get("frames_processed", 0),
        "frames_stale_dropped": host_report.get("frames_stale_dropped", 0),
        "malformed_datagrams": host_report.get("malformed_datagrams", 0),
        "results_sent": host_report.get("results_sent", 0),
        "results_received": device_report.get("results_received", 0),
        "injected_loss_dropped": device_report.get("injected_loss_dropped", 0),
        "datagram_bound_violations":
            device_report.get("datagram_bound_violations", 0),
        "mean_latency_ms": (sum(lat) / len(lat)) if lat else None,
        "p95_latency_ms": percentile(lat, 95.0) if lat else None,
        "latency_samples_ms": lat,
        "nominal_fps": device_report.get("nominal_fps"),
        "fps_timeline": device_report.get("fps_timeline", []),
        "throttle_timeline": device_report.get("throttle_timeline", []),
        "cues_fired": host_report.get("cues_fired", 0),
        "stage_ms": host_report.get("stage_ms", {}),
    }
    if session_dir is not None:
        report["session_dir"] = str(session_dir)
    return report
